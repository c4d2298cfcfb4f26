// Copyright 2026 The stdgat Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Run configuration: INI text with sections. Values resolve in order
// defaults < config file < command-line overrides. The resolved config is
// serialized back to INI and embedded in every artifact.

#pragma once

#include <charconv>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <type_traits>
#include <utility>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "stdgat/data.hpp"
#include "stdgat/errors.hpp"
#include "stdgat/evaluation.hpp"
#include "stdgat/model.hpp"
#include "stdgat/synthetic.hpp"
#include "stdgat/training.hpp"

namespace stdgat {

struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t jobs = 1;

  GridSpec grid = [] {
    GridSpec g;
    g.n_rows = 6;
    g.n_cols = 6;
    g.n_intervals = 0;  // 0: synth.days * intervals_per_day
    return g;
  }();

  SyntheticConfig synth;
  std::string archetypes;  // letters B/R/P row-major; empty uses the default layout

  std::uint32_t threshold = 1;
  std::size_t seq_len = 5;
  SplitFractions fractions;
  bool strict = true;

  ModelConfig model;
  TrainConfig train;

  double ridge_lambda = 1e-3;
  double lasso_lambda = 1e-4;
  bool pooled_regression = true;

  std::string sweep_axis = "seq-len";
  std::size_t sweep_min = 1;
  std::size_t sweep_max = 8;

  std::string trips_path;
  std::string dataset_path;
  std::string checkpoint_path;

  std::size_t resolved_intervals() const {
    return grid.n_intervals ? grid.n_intervals : synth.n_days * grid.intervals_per_day;
  }

  GridSpec resolved_grid() const {
    GridSpec g = grid;
    g.n_intervals = resolved_intervals();
    return g;
  }

  SyntheticConfig resolved_synth() const {
    SyntheticConfig s = synth;
    s.seed = seed;
    s.n_rows = grid.n_rows;
    s.n_cols = grid.n_cols;
    s.intervals_per_day = grid.intervals_per_day;
    s.start_weekday = grid.start_weekday;
    s.archetypes = archetypes.empty() ? std::vector<Archetype>{} : parse_archetypes(archetypes);
    return s;
  }

  TrainConfig resolved_train() const {
    TrainConfig t = train;
    t.seed = seed;
    return t;
  }

  ExperimentConfig experiment() const {
    ExperimentConfig e;
    e.model = model;
    e.train = resolved_train();
    e.ridge_lambda = ridge_lambda;
    e.lasso_lambda = lasso_lambda;
    e.pooled_regression = pooled_regression;
    e.jobs = jobs;
    return e;
  }
};

namespace detail {

template <typename T>
std::string format_value(const T& v) {
  if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else if constexpr (std::is_arithmetic_v<T>) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
  } else {
    return std::string(v);
  }
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  if constexpr (std::is_same_v<T, bool>) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw ConfigError(key + ": expected a boolean, got '" + text + "'");
  } else if constexpr (std::is_arithmetic_v<T>) {
    T v{};
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) {
      throw ConfigError(key + ": cannot parse '" + text + "'");
    }
    return v;
  } else {
    return text;
  }
}

// Binds every config key to a field, so reading and writing share one list.
template <typename Visitor>
void visit_fields(RunConfig& c, Visitor&& v) {
  v("run.seed", c.seed);
  v("run.jobs", c.jobs);

  v("grid.rows", c.grid.n_rows);
  v("grid.cols", c.grid.n_cols);
  v("grid.intervals", c.grid.n_intervals);
  v("grid.intervals_per_day", c.grid.intervals_per_day);
  v("grid.interval_seconds", c.grid.interval_seconds);
  v("grid.start_weekday", c.grid.start_weekday);
  v("grid.start_time", c.grid.start_time);

  v("synth.days", c.synth.n_days);
  v("synth.archetypes", c.archetypes);
  v("synth.base_rate", c.synth.base_rate);
  v("synth.commute_rate", c.synth.commute_rate);
  v("synth.leisure_rate", c.synth.leisure_rate);
  v("synth.weekend_commute", c.synth.weekend_commute);
  v("synth.weekday_leisure", c.synth.weekday_leisure);
  v("synth.return_share", c.synth.return_share);
  v("synth.onward_share", c.synth.onward_share);
  v("synth.noise_sigma", c.synth.noise_sigma);

  v("data.threshold", c.threshold);
  v("data.seq_len", c.seq_len);
  v("data.val_fraction", c.fractions.val);
  v("data.test_fraction", c.fractions.test);
  v("data.strict", c.strict);

  v("model.variant", c.model.variant);
  v("model.gat_layers", c.model.gat.n_layers);
  v("model.gat_hidden", c.model.gat.hidden_units);
  v("model.negative_slope", c.model.gat.negative_slope);
  v("model.lstm_hidden", c.model.lstm_hidden);

  v("train.learning_rate", c.train.learning_rate);
  v("train.weight_decay", c.train.weight_decay);
  v("train.epochs", c.train.epochs);
  v("train.batch_size", c.train.batch_size);
  v("train.report_every", c.train.report_every);

  v("baselines.ridge_lambda", c.ridge_lambda);
  v("baselines.lasso_lambda", c.lasso_lambda);
  v("baselines.pooled", c.pooled_regression);

  v("sweep.axis", c.sweep_axis);
  v("sweep.min", c.sweep_min);
  v("sweep.max", c.sweep_max);

  v("paths.trips", c.trips_path);
  v("paths.dataset", c.dataset_path);
  v("paths.checkpoint", c.checkpoint_path);
}

// Optional bounding box keys for raw-coordinate ingest.
inline constexpr std::array<const char*, 4> kBboxKeys = {"grid.lat_min", "grid.lat_max", "grid.lng_min",
                                                         "grid.lng_max"};

}  // namespace detail

// Flat key -> value view of a config, keyed "section.name".
using ConfigValues = std::map<std::string, std::string>;

inline ConfigValues to_values(const RunConfig& cfg) {
  ConfigValues out;
  RunConfig c = cfg;
  detail::visit_fields(c, [&](const char* key, auto& field) {
    using T = std::decay_t<decltype(field)>;
    if constexpr (std::is_same_v<T, Variant>) {
      out[key] = variant_name(field);
    } else {
      out[key] = detail::format_value(field);
    }
  });
  if (c.grid.bbox) {
    const auto& b = *c.grid.bbox;
    const double vals[4] = {b.lat_min, b.lat_max, b.lng_min, b.lng_max};
    for (int i = 0; i < 4; ++i) out[detail::kBboxKeys[i]] = detail::format_value(vals[i]);
  }
  return out;
}

// Applies `values` on top of `base`. Unknown keys are rejected.
inline RunConfig apply_values(RunConfig base, const ConfigValues& values) {
  std::set<std::string> known;
  detail::visit_fields(base, [&](const char* key, auto& field) {
    known.insert(key);
    const auto it = values.find(key);
    if (it == values.end()) return;
    using T = std::decay_t<decltype(field)>;
    if constexpr (std::is_same_v<T, Variant>) {
      field = parse_variant(it->second);
    } else {
      field = detail::parse_value<T>(key, it->second);
    }
  });
  int bbox_keys = 0;
  BoundingBox bb = base.grid.bbox.value_or(BoundingBox{});
  double* slots[4] = {&bb.lat_min, &bb.lat_max, &bb.lng_min, &bb.lng_max};
  for (int i = 0; i < 4; ++i) {
    known.insert(detail::kBboxKeys[i]);
    const auto it = values.find(detail::kBboxKeys[i]);
    if (it != values.end()) {
      *slots[i] = detail::parse_value<double>(it->first, it->second);
      ++bbox_keys;
    }
  }
  if (bbox_keys) {
    if (bbox_keys != 4 && !base.grid.bbox) throw ConfigError("grid bounding box needs all four of lat_min/lat_max/lng_min/lng_max");
    if (!(bb.lat_max > bb.lat_min) || !(bb.lng_max > bb.lng_min)) throw ConfigError("grid bounding box is empty");
    base.grid.bbox = bb;
  }
  for (const auto& [key, _] : values) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  return base;
}

inline ConfigValues parse_ini(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config: " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  ConfigValues out;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config key '" + section + "' is outside a section");
    for (const auto& [key, value] : body) out[section + "." + key] = value.data();
  }
  return out;
}

// Deterministic INI rendering: sections and keys in sorted order.
inline std::string to_ini(const RunConfig& cfg) {
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;
  for (const auto& [key, value] : to_values(cfg)) {
    const auto dot = key.find('.');
    sections[key.substr(0, dot)].emplace_back(key.substr(dot + 1), value);
  }
  std::ostringstream out;
  bool first = true;
  for (const auto& [section, entries] : sections) {
    if (!first) out << '\n';
    first = false;
    out << '[' << section << "]\n";
    for (const auto& [k, v] : entries) out << k << " = " << v << '\n';
  }
  return out.str();
}

inline RunConfig from_ini(const std::string& text, RunConfig base = {}) { return apply_values(std::move(base), parse_ini(text)); }

}  // namespace stdgat
