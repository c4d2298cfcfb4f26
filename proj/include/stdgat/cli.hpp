// Copyright 2026 The stdgat Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Subcommand implementations behind tools/stdgat.cpp. Each command reads and
// writes files only, and writes them atomically.
//
//   synth    trips.csv, synth_meta.json, run.ini
//   prepare  dataset.bin
//   train    checkpoint.bin, train_metrics.tsv
//   eval     metrics.tsv, metrics.jsonl
//   ablate   ablation.tsv, ablation_breakdown.tsv, ablation.jsonl
//   sweep    sweep_<axis>.tsv, sweep_<axis>.jsonl

#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "stdgat/config.hpp"
#include "stdgat/data.hpp"
#include "stdgat/dataset_io.hpp"
#include "stdgat/evaluation.hpp"
#include "stdgat/io.hpp"
#include "stdgat/model.hpp"
#include "stdgat/reports.hpp"
#include "stdgat/synthetic.hpp"
#include "stdgat/training.hpp"

namespace stdgat::cli {

namespace fs = std::filesystem;

inline constexpr const char* kTripsFormatVersion = "1.0";

inline fs::path resolve(const std::string& configured, const fs::path& out_dir, const char* fallback) {
  return configured.empty() ? out_dir / fallback : fs::path(configured);
}

inline std::string commented(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) out += line.empty() ? "#\n" : "# " + line + "\n";
  return out;
}

inline std::string render_trips(const SyntheticCity& city, const RunConfig& cfg) {
  std::ostringstream out;
  out << "# stdgat trips format " << kTripsFormatVersion << "\n" << commented(to_ini(cfg)) << kIndexHeader << '\n';
  for (const auto& t : city.trips) out << t.origin_region << ',' << t.dest_region << ',' << t.start_interval << '\n';
  return out.str();
}

inline fs::path cmd_synth(const RunConfig& cfg, const fs::path& out_dir) {
  if (cfg.synth.n_days == 0) throw UsageError("--days must be >= 1");
  const SyntheticConfig sc = cfg.resolved_synth();
  if (cfg.grid.n_intervals != 0 && cfg.grid.n_intervals != sc.n_days * sc.intervals_per_day) {
    throw ConfigError("grid.intervals must be 0 or days * intervals_per_day for synthetic data");
  }
  const SyntheticCity city = generate_synthetic_city(sc);

  const fs::path trips = resolve(cfg.trips_path, out_dir, "trips.csv");
  io::write_file_atomic(trips, render_trips(city, cfg));

  nlohmann::ordered_json meta;
  meta["format_version"] = kTripsFormatVersion;
  meta["seed"] = cfg.seed;
  meta["n_trips"] = city.trips.size();
  meta["archetypes"] = archetype_letters(city.metadata.archetypes);
  meta["linked_business"] = city.metadata.linked_business;
  meta["daily_choice"] = city.metadata.daily_choice;
  meta["config"] = to_ini(cfg);
  io::write_file_atomic(out_dir / "synth_meta.json", meta.dump(1) + "\n");
  io::write_file_atomic(out_dir / "run.ini", to_ini(cfg));
  spdlog::info("synth: {} trips over {} intervals -> {}", city.trips.size(), city.grid.n_intervals, trips.string());
  return trips;
}

inline DatasetArtifact prepare_dataset(const RunConfig& cfg, std::istream& trips_in) {
  const GridSpec grid = cfg.resolved_grid();
  grid.validate(cfg.seq_len);
  ParseOptions opts;
  opts.strict = cfg.strict;
  const auto trips = parse_trips(trips_in, grid, opts);
  DatasetArtifact a;
  a.grid = grid;
  a.demand = build_demand(trips, grid);
  a.graphs = build_dynamic_graphs(trips, grid, cfg.threshold);
  a.seq_len = cfg.seq_len;
  a.fractions = cfg.fractions;
  a.config_echo = to_ini(cfg);
  // Surfaces split and window errors now rather than at training time.
  (void)a.windows();
  return a;
}

inline fs::path cmd_prepare(const RunConfig& cfg, const fs::path& out_dir) {
  const fs::path trips = resolve(cfg.trips_path, out_dir, "trips.csv");
  std::ifstream in(trips);
  if (!in) throw Error("cannot open trips file " + trips.string());
  DatasetArtifact a;
  try {
    a = prepare_dataset(cfg, in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), trips.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(trips.string() + ": " + e.what());
  }
  std::size_t edges = 0;
  for (std::size_t t = 0; t < a.grid.n_intervals; ++t) edges += a.graphs.edge_count(t);
  const fs::path dataset = resolve(cfg.dataset_path, out_dir, "dataset.bin");
  io::write_file_atomic(dataset, serialize_dataset(a));
  spdlog::info("prepare: {} regions x {} intervals, {} edges at threshold {} -> {}", a.grid.n_regions(),
               a.grid.n_intervals, edges, cfg.threshold, dataset.string());
  return dataset;
}

inline DatasetArtifact load_dataset(const RunConfig& cfg, const fs::path& out_dir) {
  return deserialize_dataset(io::read_file(resolve(cfg.dataset_path, out_dir, "dataset.bin")));
}

inline ModelConfig model_for(const RunConfig& cfg, const WindowedDataset& ds) {
  ModelConfig m = cfg.model;
  m.n_regions = ds.n_regions();
  m.seq_len = ds.seq_len();
  return m;
}

inline fs::path cmd_train(RunConfig cfg, const fs::path& out_dir) {
  const DatasetArtifact artifact = load_dataset(cfg, out_dir);
  cfg.seq_len = artifact.seq_len;
  const WindowedDataset ds = artifact.windows();
  const ModelConfig mc = model_for(cfg, ds);
  const TrainConfig tc = cfg.resolved_train();
  StdgatModel model(mc, tc.seed);
  std::ostringstream log;
  spdlog::info("train: variant={} params={} windows train={} val={}", variant_name(mc.variant),
               model.params().scalar_count(), ds.size(Split::kTrain), ds.size(Split::kVal));
  const TrainResult result = train_model(model, ds.training_data(), tc, to_ini(cfg), &log, [](const EpochStats& s) {
    spdlog::debug("epoch {} train_mse {:.6g} val_mse {:.6g} ({:.0f} ms)", s.epoch, s.train_mse, s.val_mse, s.wall_ms);
  });
  const fs::path ck = resolve(cfg.checkpoint_path, out_dir, "checkpoint.bin");
  io::write_file_atomic(ck, serialize_checkpoint(result.best));
  io::write_file_atomic(out_dir / "train_metrics.tsv", log.str());
  spdlog::info("train: best epoch {} val_mse {:.6g} -> {}", result.best.epoch, result.best.val_loss, ck.string());
  return ck;
}

// Serves forecasts from restored parameters without refitting.
class CheckpointForecaster final : public Forecaster {
 public:
  CheckpointForecaster(StdgatModel model, Scaler scaler) : model_(std::move(model)), scaler_(scaler) {}
  std::string name() const override { return variant_name(model_.config().variant); }
  void fit(const TrainingData&) override {}
  std::vector<double> predict(const WindowView& w) override {
    auto y = model_.predict_scaled(w);
    for (auto& v : y) v = scaler_.inverse(v);
    return y;
  }

 private:
  StdgatModel model_;
  Scaler scaler_;
};

inline fs::path cmd_eval(const RunConfig& cfg, const fs::path& out_dir) {
  const DatasetArtifact artifact = load_dataset(cfg, out_dir);
  const Checkpoint ck = deserialize_checkpoint(io::read_file(resolve(cfg.checkpoint_path, out_dir, "checkpoint.bin")));
  const RunConfig trained = from_ini(ck.config_echo);
  const WindowedDataset ds = artifact.windows(trained.seq_len);
  StdgatModel model(model_for(trained, ds), ck.seed);
  restore(model.params(), ck.params);
  CheckpointForecaster f(std::move(model), ds.scaler());
  const ReportRow row{f.name(), evaluate(f, ds, Split::kTest), describe(model_for(trained, ds), trained.resolved_train())};
  const std::span<const ReportRow> rows(&row, 1);
  io::write_file_atomic(out_dir / "metrics.tsv", breakdown_tsv(rows));
  io::write_file_atomic(out_dir / "metrics.jsonl", rows_jsonl(rows, ck.seed));
  spdlog::info("eval: {} RMSE {:.6g} MAPE {:.6g} MAE {:.6g}", row.name, row.report.overall.rmse,
               row.report.overall.mape, row.report.overall.mae);
  return out_dir / "metrics.tsv";
}

inline fs::path cmd_ablate(const RunConfig& cfg, const fs::path& out_dir) {
  const DatasetArtifact artifact = load_dataset(cfg, out_dir);
  const WindowedDataset ds = artifact.windows();
  const auto rows = run_ablation_suite(ds, cfg.experiment());
  io::write_file_atomic(out_dir / "ablation.tsv", rows_tsv(rows));
  io::write_file_atomic(out_dir / "ablation_breakdown.tsv", breakdown_tsv(rows));
  io::write_file_atomic(out_dir / "ablation.jsonl", rows_jsonl(rows, cfg.seed));
  for (const auto& r : rows) spdlog::info("ablate: {:<14} RMSE {:.6g}", r.name, r.report.overall.rmse);
  return out_dir / "ablation.tsv";
}

inline fs::path cmd_sweep(const RunConfig& cfg, const fs::path& out_dir) {
  const DatasetArtifact artifact = load_dataset(cfg, out_dir);
  const SweepAxis axis = parse_sweep_axis(cfg.sweep_axis);
  const auto rows = run_sweeps(artifact, axis, cfg.sweep_min, cfg.sweep_max, cfg.experiment());
  const std::string stem = std::string("sweep_") + sweep_axis_name(axis);
  io::write_file_atomic(out_dir / (stem + ".tsv"), sweep_tsv(rows));
  io::write_file_atomic(out_dir / (stem + ".jsonl"), sweep_jsonl(rows, cfg.seed));
  for (const auto& r : rows) spdlog::info("sweep: {}={} RMSE {:.6g}", sweep_axis_name(axis), r.value, r.row.report.overall.rmse);
  return out_dir / (stem + ".tsv");
}

}  // namespace stdgat::cli
