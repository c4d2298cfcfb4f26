// Copyright 2026 The stdgat Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Dataset container:
//
//   "STDGATDS" u16 major u16 minor
//   str  config echo
//   u64  n_rows, n_cols, n_intervals, intervals_per_day
//   i64  interval_seconds, start_time
//   i32  start_weekday
//   u32  edge threshold
//   u64  seq_len
//   f64  val fraction, test fraction
//   f64  demand[N * T]                  region-major
//   per interval t: u32 n_edges, then n_edges x (u32 src, u32 dst, u32 count)
//
// All integers and doubles little-endian. Neighbor sets are rebuilt from the
// flow lists and the threshold.

#pragma once

#include <cstdint>
#include <string>

#include "stdgat/data.hpp"
#include "stdgat/io.hpp"

namespace stdgat {

inline constexpr std::string_view kDatasetMagic = "STDGATDS";
inline constexpr std::uint16_t kDatasetMajor = 1;
inline constexpr std::uint16_t kDatasetMinor = 0;

struct DatasetArtifact {
  GridSpec grid;
  DemandSeries demand;
  DynamicGraphSequence graphs;
  std::size_t seq_len = 5;
  SplitFractions fractions;
  std::string config_echo;

  WindowedDataset windows() const { return make_windows(demand, graphs, grid, seq_len, fractions); }
  WindowedDataset windows(std::size_t L) const { return make_windows(demand, graphs, grid, L, fractions); }
};

inline std::string serialize_dataset(const DatasetArtifact& a) {
  io::BinaryWriter w;
  io::write_header(w, kDatasetMagic, kDatasetMajor, kDatasetMinor);
  w.str(a.config_echo);
  w.u64(a.grid.n_rows);
  w.u64(a.grid.n_cols);
  w.u64(a.grid.n_intervals);
  w.u64(a.grid.intervals_per_day);
  w.pod<std::int64_t>(a.grid.interval_seconds);
  w.pod<std::int64_t>(a.grid.start_time);
  w.pod<std::int32_t>(a.grid.start_weekday);
  w.u32(a.graphs.threshold);
  w.u64(a.seq_len);
  w.f64(a.fractions.val);
  w.f64(a.fractions.test);
  if (a.demand.values.size() != a.grid.n_regions() * a.grid.n_intervals) {
    throw DimensionError("demand matrix does not match grid");
  }
  w.f64s(a.demand.values);
  if (a.graphs.flow_counts.size() != a.grid.n_intervals) throw DimensionError("graph sequence does not match grid");
  for (const auto& edges : a.graphs.flow_counts) {
    w.u32(static_cast<std::uint32_t>(edges.size()));
    for (const auto& e : edges) {
      w.u32(e.src);
      w.u32(e.dst);
      w.u32(e.count);
    }
  }
  return w.buffer();
}

inline DatasetArtifact deserialize_dataset(std::string_view bytes) {
  io::BinaryReader r(bytes);
  io::read_header(r, kDatasetMagic, kDatasetMajor);
  DatasetArtifact a;
  a.config_echo = r.str();
  a.grid.n_rows = r.u64();
  a.grid.n_cols = r.u64();
  a.grid.n_intervals = r.u64();
  a.grid.intervals_per_day = r.u64();
  a.grid.interval_seconds = r.pod<std::int64_t>();
  a.grid.start_time = r.pod<std::int64_t>();
  a.grid.start_weekday = r.pod<std::int32_t>();
  const std::uint32_t threshold = r.u32();
  a.seq_len = r.u64();
  a.fractions.val = r.f64();
  a.fractions.test = r.f64();
  const std::size_t n = a.grid.n_regions(), T = a.grid.n_intervals;
  if (n == 0 || (T != 0 && n > r.remaining() / T)) throw FormatError("implausible dataset dimensions");
  a.demand.n_regions = n;
  a.demand.n_intervals = T;
  a.demand.values = r.f64s(n * T);
  a.graphs.n_regions = n;
  a.graphs.threshold = threshold;
  a.graphs.flow_counts.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    const std::uint32_t m = r.u32();
    if (m > r.remaining() / 12) throw FormatError("truncated edge list");
    auto& edges = a.graphs.flow_counts[t];
    edges.reserve(m);
    for (std::uint32_t k = 0; k < m; ++k) {
      FlowEdge e{r.u32(), r.u32(), r.u32()};
      if (e.src >= n || e.dst >= n) throw FormatError("edge endpoint out of range");
      edges.push_back(e);
    }
    a.graphs.neighbors_in.push_back(neighbors_from_flows(edges, n, threshold));
  }
  if (!r.done()) throw FormatError("trailing bytes after dataset payload");
  return a;
}

}  // namespace stdgat
