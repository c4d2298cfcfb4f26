// Copyright 2026 The stdgat Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Trip ingest, demand series, per-interval commuting graphs, the static
// geographic graph and chronological windowing.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stdgat/errors.hpp"

namespace stdgat {

struct TripRecord {
  std::uint32_t origin_region = 0;
  std::uint32_t dest_region = 0;
  std::uint32_t start_interval = 0;

  bool operator==(const TripRecord&) const = default;
};

struct BoundingBox {
  double lat_min = 0.0;
  double lat_max = 0.0;
  double lng_min = 0.0;
  double lng_max = 0.0;
};

struct GridSpec {
  std::size_t n_rows = 1;
  std::size_t n_cols = 1;
  std::size_t n_intervals = 1;
  std::int64_t interval_seconds = 3600;
  std::size_t intervals_per_day = 24;
  // Day of week of interval 0; 0 = Monday ... 6 = Sunday.
  int start_weekday = 0;
  // Only needed for raw (coordinate + timestamp) ingest.
  std::optional<BoundingBox> bbox;
  std::int64_t start_time = 0;  // Unix seconds of interval 0

  std::size_t n_regions() const { return n_rows * n_cols; }

  void validate(std::size_t seq_len = 0) const {
    if (n_rows == 0 || n_cols == 0) throw ConfigError("grid needs at least one region");
    if (interval_seconds <= 0) throw ConfigError("interval length must be positive");
    if (intervals_per_day == 0) throw ConfigError("intervals_per_day must be positive");
    if (start_weekday < 0 || start_weekday > 6) throw ConfigError("start_weekday must be 0..6");
    if (n_intervals < seq_len + 1) {
      throw ConfigError("need at least L+1 = " + std::to_string(seq_len + 1) +
                        " intervals, have " + std::to_string(n_intervals));
    }
  }
};

// N x T counts, row-major by region: values[r * T + t] = x_r^t.
struct DemandSeries {
  std::size_t n_regions = 0;
  std::size_t n_intervals = 0;
  std::vector<double> values;

  double at(std::size_t region, std::size_t interval) const {
    return values[region * n_intervals + interval];
  }
  double& at(std::size_t region, std::size_t interval) {
    return values[region * n_intervals + interval];
  }
  double total() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  bool operator==(const DemandSeries&) const = default;
};

// In-neighbor lists per node, sorted ascending, always containing the node.
using NeighborSets = std::vector<std::vector<std::uint32_t>>;

struct FlowEdge {
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  std::uint32_t count = 0;

  bool operator==(const FlowEdge&) const = default;
};

struct DynamicGraphSequence {
  std::size_t n_regions = 0;
  std::uint32_t threshold = 1;
  std::vector<NeighborSets> neighbors_in;          // [interval][node]
  std::vector<std::vector<FlowEdge>> flow_counts;  // [interval], sorted by (src, dst)

  std::size_t n_intervals() const { return neighbors_in.size(); }
  const NeighborSets& at(std::size_t interval) const { return neighbors_in[interval]; }

  // Directed edges at `interval`, self-loops excluded.
  std::size_t edge_count(std::size_t interval) const {
    std::size_t e = 0;
    for (const auto& nb : neighbors_in[interval]) e += nb.size() - 1;
    return e;
  }
  bool operator==(const DynamicGraphSequence&) const = default;
};

struct FixedGraph {
  NeighborSets neighbors_in;
};

// Row i of the N x N result has byte 1 at column j iff j is an in-neighbor of i.
inline std::vector<std::uint8_t> neighbor_mask(const NeighborSets& graph) {
  const std::size_t n = graph.size();
  std::vector<std::uint8_t> mask(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::uint32_t j : graph[i]) mask[i * n + j] = 1;
  }
  return mask;
}

// ---------------------------------------------------------------------------
// Ingest

struct ParseOptions {
  // A trips file without destinations cannot define commuting edges; strict
  // mode rejects it, lenient mode treats every trip as intra-region.
  bool strict = true;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::uint64_t parse_uint(std::string_view s, std::size_t line, const char* field) {
  if (s.empty()) throw ParseError(line, std::string("empty field '") + field + "'");
  std::uint64_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') {
      throw ParseError(line, std::string("field '") + field + "' is not a non-negative integer: '" +
                                 std::string(s) + "'");
    }
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
    if (v > 0xFFFFFFFFull) throw ParseError(line, std::string("field '") + field + "' overflows");
  }
  return v;
}

inline double parse_double(std::string_view s, std::size_t line, const char* field) {
  std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size() || !std::isfinite(v)) {
    throw ParseError(line, std::string("field '") + field + "' is not a number: '" + tmp + "'");
  }
  return v;
}

inline int parse_fixed_digits(std::string_view s, std::size_t pos, std::size_t len, std::size_t line) {
  if (pos + len > s.size()) throw ParseError(line, "truncated timestamp '" + std::string(s) + "'");
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') throw ParseError(line, "bad timestamp '" + std::string(s) + "'");
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

}  // namespace detail

// Parses `YYYY-MM-DDTHH:MM:SS` (a space may replace `T`) with an optional
// `Z` or `+HH:MM` / `-HH:MM` suffix. Returns Unix seconds.
inline std::int64_t parse_iso8601(std::string_view s, std::size_t line = 0) {
  using detail::parse_fixed_digits;
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
      s[13] != ':' || s[16] != ':') {
    throw ParseError(line, "bad timestamp '" + std::string(s) + "'");
  }
  const int y = parse_fixed_digits(s, 0, 4, line);
  const int mo = parse_fixed_digits(s, 5, 2, line);
  const int d = parse_fixed_digits(s, 8, 2, line);
  const int h = parse_fixed_digits(s, 11, 2, line);
  const int mi = parse_fixed_digits(s, 14, 2, line);
  const int se = parse_fixed_digits(s, 17, 2, line);
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || se > 60) {
    throw ParseError(line, "invalid date/time '" + std::string(s) + "'");
  }
  std::int64_t offset = 0;
  std::string_view rest = s.substr(19);
  if (!rest.empty() && rest.front() == '.') {
    std::size_t i = 1;
    while (i < rest.size() && rest[i] >= '0' && rest[i] <= '9') ++i;
    rest.remove_prefix(i);
  }
  if (rest == "Z" || rest.empty()) {
    offset = 0;
  } else if (rest.size() == 6 && (rest[0] == '+' || rest[0] == '-') && rest[3] == ':') {
    const int oh = parse_fixed_digits(rest, 1, 2, line);
    const int om = parse_fixed_digits(rest, 4, 2, line);
    offset = (rest[0] == '+' ? 1 : -1) * (oh * 3600 + om * 60);
  } else {
    throw ParseError(line, "bad timezone suffix in '" + std::string(s) + "'");
  }
  const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86400 + h * 3600 + mi * 60 + se - offset;
}

inline constexpr std::string_view kIndexHeader = "origin,dest,interval";
inline constexpr std::string_view kRawHeader = "start_time,origin_lat,origin_lng,dest_lat,dest_lng";

// Reads the trips text format. The header selects index mode
// (`origin,dest,interval`) or raw mode
// (`start_time,origin_lat,origin_lng,dest_lat,dest_lng`, binned through the
// grid's bounding box and interval length). Blank lines and lines starting
// with '#' are skipped.
inline std::vector<TripRecord> parse_trips(std::istream& in, const GridSpec& grid,
                                           ParseOptions options = {}) {
  std::vector<TripRecord> trips;
  std::string line;
  std::size_t lineno = 0;
  enum class Mode { kIndex, kRaw, kIndexNoDest, kRawNoDest } mode = Mode::kIndex;
  bool have_header = false;
  const std::size_t n = grid.n_regions();

  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    if (!have_header) {
      have_header = true;
      std::string header;
      for (char c : text) {
        if (c != ' ' && c != '\t') header.push_back(c);
      }
      if (header == kIndexHeader) {
        mode = Mode::kIndex;
      } else if (header == kRawHeader) {
        mode = Mode::kRaw;
        if (!grid.bbox) throw ConfigError("raw trips need a grid bounding box");
      } else if (header == "origin,interval" || header == "start_time,origin_lat,origin_lng") {
        if (options.strict) {
          throw ValidationError(
              "trips file has no destination column; commuting edges between regions are "
              "defined by origin->destination flows, so `dest` is required (header was '" +
              header + "')");
        }
        mode = header == "origin,interval" ? Mode::kIndexNoDest : Mode::kRawNoDest;
        if (mode == Mode::kRawNoDest && !grid.bbox) throw ConfigError("raw trips need a grid bounding box");
      } else {
        throw ParseError(lineno, "unrecognized header '" + header + "', expected '" +
                                     std::string(kIndexHeader) + "' or '" + std::string(kRawHeader) + "'");
      }
      continue;
    }

    const auto f = detail::split_fields(text);
    TripRecord rec;
    if (mode == Mode::kIndex || mode == Mode::kIndexNoDest) {
      const std::size_t want = mode == Mode::kIndex ? 3 : 2;
      if (f.size() != want) {
        throw ParseError(lineno, "expected " + std::to_string(want) + " fields, got " + std::to_string(f.size()));
      }
      const auto o = detail::parse_uint(f[0], lineno, "origin");
      const auto d = mode == Mode::kIndex ? detail::parse_uint(f[1], lineno, "dest") : o;
      const auto t = detail::parse_uint(f[want - 1], lineno, "interval");
      if (o >= n) throw ValidationError("line " + std::to_string(lineno) + ": origin " + std::to_string(o) + " out of range [0, " + std::to_string(n) + ")");
      if (d >= n) throw ValidationError("line " + std::to_string(lineno) + ": dest " + std::to_string(d) + " out of range [0, " + std::to_string(n) + ")");
      if (t >= grid.n_intervals) throw ValidationError("line " + std::to_string(lineno) + ": interval " + std::to_string(t) + " out of range [0, " + std::to_string(grid.n_intervals) + ")");
      rec = {static_cast<std::uint32_t>(o), static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(t)};
    } else {
      const std::size_t want = mode == Mode::kRaw ? 5 : 3;
      if (f.size() != want) {
        throw ParseError(lineno, "expected " + std::to_string(want) + " fields, got " + std::to_string(f.size()));
      }
      const std::int64_t ts = parse_iso8601(f[0], lineno);
      const BoundingBox& bb = *grid.bbox;
      auto bin = [&](double lat, double lng, const char* which) -> std::uint32_t {
        if (lat < bb.lat_min || lat > bb.lat_max || lng < bb.lng_min || lng > bb.lng_max) {
          throw ValidationError("line " + std::to_string(lineno) + ": " + which + " outside grid bounding box");
        }
        auto cell = [](double v, double lo, double hi, std::size_t cells) {
          const auto c = static_cast<std::size_t>(std::floor((v - lo) / (hi - lo) * static_cast<double>(cells)));
          return std::min(c, cells - 1);
        };
        const std::size_t row = cell(lat, bb.lat_min, bb.lat_max, grid.n_rows);
        const std::size_t col = cell(lng, bb.lng_min, bb.lng_max, grid.n_cols);
        return static_cast<std::uint32_t>(row * grid.n_cols + col);
      };
      const auto o = bin(detail::parse_double(f[1], lineno, "origin_lat"), detail::parse_double(f[2], lineno, "origin_lng"), "origin");
      const auto d = mode == Mode::kRaw
                         ? bin(detail::parse_double(f[3], lineno, "dest_lat"), detail::parse_double(f[4], lineno, "dest_lng"), "destination")
                         : o;
      const std::int64_t rel = ts - grid.start_time;
      if (rel < 0) throw ValidationError("line " + std::to_string(lineno) + ": timestamp before grid start");
      const auto t = static_cast<std::size_t>(rel / grid.interval_seconds);
      if (t >= grid.n_intervals) throw ValidationError("line " + std::to_string(lineno) + ": timestamp after last interval");
      rec = {o, d, static_cast<std::uint32_t>(t)};
    }
    trips.push_back(rec);
  }
  return trips;
}

inline DemandSeries build_demand(std::span<const TripRecord> trips, const GridSpec& grid) {
  DemandSeries d;
  d.n_regions = grid.n_regions();
  d.n_intervals = grid.n_intervals;
  d.values.assign(d.n_regions * d.n_intervals, 0.0);
  for (const auto& trip : trips) {
    if (trip.origin_region >= d.n_regions || trip.start_interval >= d.n_intervals) {
      throw ValidationError("trip outside grid: origin " + std::to_string(trip.origin_region) +
                            ", interval " + std::to_string(trip.start_interval));
    }
    d.at(trip.origin_region, trip.start_interval) += 1.0;
  }
  return d;
}

// Rebuilds neighbor sets from per-interval flow counts: j -> i is an edge at
// t iff flow(j -> i, t) >= threshold and j != i; self-loops always present.
inline NeighborSets neighbors_from_flows(std::span<const FlowEdge> flows, std::size_t n_regions,
                                         std::uint32_t threshold) {
  NeighborSets nb(n_regions);
  for (std::size_t i = 0; i < n_regions; ++i) nb[i].push_back(static_cast<std::uint32_t>(i));
  for (const auto& e : flows) {
    if (e.src != e.dst && e.count >= threshold) nb[e.dst].push_back(e.src);
  }
  for (auto& list : nb) std::sort(list.begin(), list.end());
  return nb;
}

inline DynamicGraphSequence build_dynamic_graphs(std::span<const TripRecord> trips, const GridSpec& grid,
                                                 std::uint32_t threshold = 1) {
  if (threshold < 1) throw ConfigError("edge threshold must be >= 1");
  const std::size_t n = grid.n_regions();
  const std::size_t T = grid.n_intervals;
  std::vector<TripRecord> sorted(trips.begin(), trips.end());
  for (const auto& trip : sorted) {
    if (trip.origin_region >= n || trip.dest_region >= n || trip.start_interval >= T) {
      throw ValidationError("trip outside grid");
    }
  }
  std::sort(sorted.begin(), sorted.end(), [](const TripRecord& a, const TripRecord& b) {
    if (a.start_interval != b.start_interval) return a.start_interval < b.start_interval;
    if (a.origin_region != b.origin_region) return a.origin_region < b.origin_region;
    return a.dest_region < b.dest_region;
  });

  DynamicGraphSequence g;
  g.n_regions = n;
  g.threshold = threshold;
  g.flow_counts.resize(T);
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].start_interval == sorted[i].start_interval &&
           sorted[j].origin_region == sorted[i].origin_region && sorted[j].dest_region == sorted[i].dest_region) {
      ++j;
    }
    g.flow_counts[sorted[i].start_interval].push_back(
        {sorted[i].origin_region, sorted[i].dest_region, static_cast<std::uint32_t>(j - i)});
    i = j;
  }
  g.neighbors_in.reserve(T);
  for (std::size_t t = 0; t < T; ++t) g.neighbors_in.push_back(neighbors_from_flows(g.flow_counts[t], n, threshold));
  return g;
}

// Self plus the geographic 8-neighborhood of every cell.
inline FixedGraph build_fixed_graph(const GridSpec& grid) {
  FixedGraph g;
  g.neighbors_in.resize(grid.n_regions());
  const auto rows = static_cast<long>(grid.n_rows), cols = static_cast<long>(grid.n_cols);
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      auto& list = g.neighbors_in[static_cast<std::size_t>(r * cols + c)];
      for (long dr = -1; dr <= 1; ++dr) {
        for (long dc = -1; dc <= 1; ++dc) {
          const long rr = r + dr, cc = c + dc;
          if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
          list.push_back(static_cast<std::uint32_t>(rr * cols + cc));
        }
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Windowing

struct SplitFractions {
  double val = 0.2;         // share of the pre-test range held out for validation
  double test = 31.0 / 184;  // share of all intervals reserved for testing (last month of six)
};

struct IntervalRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool contains(std::size_t t) const { return t >= begin && t < end; }
};

struct SplitRanges {
  IntervalRange train, val, test;
};

inline SplitRanges compute_split_ranges(std::size_t n_intervals, SplitFractions f) {
  if (f.val < 0 || f.val >= 1 || f.test < 0 || f.test >= 1) {
    throw ConfigError("split fractions must lie in [0, 1)");
  }
  const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n_intervals) * f.test));
  const std::size_t pre = n_intervals - n_test;
  const auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(pre) * f.val));
  SplitRanges s;
  s.train = {0, pre - n_val};
  s.val = {pre - n_val, pre};
  s.test = {pre, n_intervals};
  return s;
}

// Divides by the training-split maximum; maps back with `inverse`.
struct Scaler {
  double scale = 1.0;

  double apply(double raw) const { return raw / scale; }
  double inverse(double scaled) const { return scaled * scale; }

  static Scaler fit(const DemandSeries& demand, IntervalRange range) {
    double mx = 0.0;
    for (std::size_t r = 0; r < demand.n_regions; ++r)
      for (std::size_t t = range.begin; t < range.end; ++t) mx = std::max(mx, demand.at(r, t));
    return Scaler{mx > 0.0 ? mx : 1.0};
  }
};

enum class Split { kTrain, kVal, kTest };

inline const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

// Model input for one prediction: the L most recent scaled demand vectors
// (oldest first) with their commuting graphs. Carries no target values.
struct WindowView {
  std::size_t target_interval = 0;
  std::vector<std::span<const double>> inputs;
  std::vector<const NeighborSets*> graphs;
  const NeighborSets* fixed_graph = nullptr;

  std::size_t seq_len() const { return inputs.size(); }
};

struct LabeledWindow {
  WindowView window;
  std::span<const double> target;  // scaled
};

// Everything a forecaster may see while fitting: train and validation
// windows plus raw demand history preceding the test range.
struct TrainingData {
  std::vector<LabeledWindow> train;
  std::vector<LabeledWindow> val;
  DemandSeries history;  // raw, intervals [0, test.begin)
  Scaler scaler;
  std::size_t n_regions = 0;
  std::size_t seq_len = 0;
  std::size_t intervals_per_day = 24;
};

class WindowedDataset {
 public:
  WindowedDataset(DemandSeries demand, DynamicGraphSequence graphs, const GridSpec& grid, std::size_t seq_len,
                  SplitFractions fractions)
      : demand_(std::make_shared<const DemandSeries>(std::move(demand))),
        graphs_(std::make_shared<const DynamicGraphSequence>(std::move(graphs))),
        fixed_(std::make_shared<const FixedGraph>(build_fixed_graph(grid))),
        grid_(grid),
        seq_len_(seq_len),
        fractions_(fractions) {
    if (seq_len == 0) throw ConfigError("sequence length must be >= 1");
    if (demand_->n_regions != grid.n_regions() || demand_->n_intervals != grid.n_intervals) {
      throw DimensionError("demand series does not match grid");
    }
    if (graphs_->n_intervals() != grid.n_intervals || graphs_->n_regions != grid.n_regions()) {
      throw DimensionError("graph sequence does not match grid");
    }
    grid.validate(seq_len);
    ranges_ = compute_split_ranges(grid.n_intervals, fractions);
    scaler_ = Scaler::fit(*demand_, ranges_.train.size() ? ranges_.train : IntervalRange{0, grid.n_intervals});

    const std::size_t n = grid.n_regions(), T = grid.n_intervals;
    auto scaled = std::make_shared<std::vector<double>>(n * T);
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t r = 0; r < n; ++r) (*scaled)[t * n + r] = scaler_.apply(demand_->at(r, t));
    scaled_ = std::move(scaled);

    auto fill = [&](const IntervalRange& range, std::vector<std::size_t>& out) {
      // Inputs [u - L, u) and target u must all lie in the range.
      for (std::size_t u = range.begin + seq_len; u < range.end; ++u) out.push_back(u);
    };
    fill(ranges_.train, targets_[0]);
    fill(ranges_.val, targets_[1]);
    fill(ranges_.test, targets_[2]);
  }

  const DemandSeries& demand() const { return *demand_; }
  const DynamicGraphSequence& graphs() const { return *graphs_; }
  const FixedGraph& fixed_graph() const { return *fixed_; }
  const GridSpec& grid() const { return grid_; }
  const SplitRanges& ranges() const { return ranges_; }
  const Scaler& scaler() const { return scaler_; }
  std::size_t seq_len() const { return seq_len_; }
  std::size_t n_regions() const { return grid_.n_regions(); }
  SplitFractions fractions() const { return fractions_; }

  std::span<const std::size_t> targets(Split s) const { return targets_[static_cast<int>(s)]; }
  std::size_t size(Split s) const { return targets(s).size(); }

  std::span<const double> scaled_row(std::size_t t) const {
    return {scaled_->data() + t * n_regions(), n_regions()};
  }
  std::vector<double> raw_row(std::size_t t) const {
    std::vector<double> v(n_regions());
    for (std::size_t r = 0; r < v.size(); ++r) v[r] = demand_->at(r, t);
    return v;
  }

  WindowView window_for_target(std::size_t target) const {
    WindowView w;
    w.target_interval = target;
    for (std::size_t t = target - seq_len_; t < target; ++t) {
      w.inputs.push_back(scaled_row(t));
      w.graphs.push_back(&graphs_->at(t));
    }
    w.fixed_graph = &fixed_->neighbors_in;
    return w;
  }
  WindowView window(Split s, std::size_t k) const { return window_for_target(targets(s)[k]); }

  TrainingData training_data() const {
    TrainingData d;
    for (std::size_t u : targets(Split::kTrain)) d.train.push_back({window_for_target(u), scaled_row(u)});
    for (std::size_t u : targets(Split::kVal)) d.val.push_back({window_for_target(u), scaled_row(u)});
    const std::size_t n = n_regions(), pre = ranges_.test.begin;
    d.history.n_regions = n;
    d.history.n_intervals = pre;
    d.history.values.resize(n * pre);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t t = 0; t < pre; ++t) d.history.at(r, t) = demand_->at(r, t);
    d.scaler = scaler_;
    d.n_regions = n;
    d.seq_len = seq_len_;
    d.intervals_per_day = grid_.intervals_per_day;
    return d;
  }

 private:
  std::shared_ptr<const DemandSeries> demand_;
  std::shared_ptr<const DynamicGraphSequence> graphs_;
  std::shared_ptr<const FixedGraph> fixed_;
  GridSpec grid_;
  std::size_t seq_len_;
  SplitFractions fractions_;
  SplitRanges ranges_;
  Scaler scaler_;
  // T x N, interval-major. Shared so views stay valid across copies.
  std::shared_ptr<const std::vector<double>> scaled_;
  std::vector<std::size_t> targets_[3];
};

inline WindowedDataset make_windows(DemandSeries demand, DynamicGraphSequence graphs, const GridSpec& grid,
                                    std::size_t seq_len, SplitFractions fractions = {}) {
  return WindowedDataset(std::move(demand), std::move(graphs), grid, seq_len, fractions);
}

}  // namespace stdgat
