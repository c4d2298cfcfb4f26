// Copyright 2026 The stdgat Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// stdgat command-line entry point.
//
//   stdgat [--config run.ini] [--seed N] [--out DIR] <synth|prepare|train|eval|ablate|sweep> [flags]
//
// Log verbosity comes from STDGAT_LOG (trace, debug, info, warn, error, off).
// Exit status: 0 on success, 2 on usage or configuration errors, 1 otherwise.

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "stdgat/cli.hpp"

namespace {

using stdgat::ConfigValues;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("stdgat");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("STDGAT_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

// Registers `--name VALUE` as an override of config key `key`.
void add_override(CLI::App* app, ConfigValues& overrides, const std::string& name, const std::string& key,
          const std::string& help) {
  app->add_option_function<std::string>(name, [&overrides, key](const std::string& v) { overrides[key] = v; }, help);
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Spatio-temporal dynamic graph attention demand forecaster"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> sets;
  ConfigValues overrides;

  app.add_option("--config", config_path, "INI config file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--set", sets, "Config override section.key=value (repeatable)");
  add_override(&app, overrides, "--seed", "run.seed", "Random seed");
  add_override(&app, overrides, "-j,--jobs", "run.jobs", "Parallel training jobs for ablate and sweep");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic city trips file");
  add_override(synth, overrides, "--days", "synth.days", "Days to simulate");
  add_override(synth, overrides, "--rows", "grid.rows", "Grid rows");
  add_override(synth, overrides, "--cols", "grid.cols", "Grid columns");
  add_override(synth, overrides, "--archetypes", "synth.archetypes", "Region letters B/R/P, row-major");
  add_override(synth, overrides, "--trips", "paths.trips", "Trips file to write");

  auto* prepare = app.add_subcommand("prepare", "Build demand, graphs and windows from a trips file");
  add_override(prepare, overrides, "--trips", "paths.trips", "Trips file to read");
  add_override(prepare, overrides, "--dataset", "paths.dataset", "Dataset file to write");
  add_override(prepare, overrides, "--threshold", "data.threshold", "Minimum trips for a commuting edge");
  add_override(prepare, overrides, "--seq-len", "data.seq_len", "Input sequence length L");
  add_override(prepare, overrides, "--intervals", "grid.intervals", "Number of intervals (0: synth.days x intervals_per_day)");
  add_override(prepare, overrides, "--strict", "data.strict", "Require a destination column (true/false)");

  auto* train = app.add_subcommand("train", "Train one model variant");
  add_override(train, overrides, "--dataset", "paths.dataset", "Dataset file");
  add_override(train, overrides, "--checkpoint", "paths.checkpoint", "Checkpoint file to write");
  add_override(train, overrides, "--variant", "model.variant", "full, fixed_graph, spatial_only, temporal_only");
  add_override(train, overrides, "--epochs", "train.epochs", "Training epochs");
  add_override(train, overrides, "--lr", "train.learning_rate", "Learning rate");
  add_override(train, overrides, "--batch-size", "train.batch_size", "Batch size");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  add_override(eval, overrides, "--dataset", "paths.dataset", "Dataset file");
  add_override(eval, overrides, "--checkpoint", "paths.checkpoint", "Checkpoint file");

  auto* ablate = app.add_subcommand("ablate", "Train and compare all variants and baselines");
  add_override(ablate, overrides, "--dataset", "paths.dataset", "Dataset file");
  add_override(ablate, overrides, "--epochs", "train.epochs", "Training epochs");
  add_override(ablate, overrides, "--pooled", "baselines.pooled", "Pooled regression baselines (true) or per-region (false)");

  auto* sweep = app.add_subcommand("sweep", "Retrain the full model over a hyperparameter grid");
  add_override(sweep, overrides, "--dataset", "paths.dataset", "Dataset file");
  add_override(sweep, overrides, "--axis", "sweep.axis", "seq-len or gat-layers");
  add_override(sweep, overrides, "--min", "sweep.min", "First grid value");
  add_override(sweep, overrides, "--max", "sweep.max", "Last grid value");
  add_override(sweep, overrides, "--epochs", "train.epochs", "Training epochs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw stdgat::UsageError("--set expects section.key=value, got '" + s + "'");
      overrides[s.substr(0, eq)] = s.substr(eq + 1);
    }
    stdgat::RunConfig cfg;
    if (!config_path.empty()) cfg = stdgat::from_ini(stdgat::io::read_file(config_path), cfg);
    cfg = stdgat::apply_values(cfg, overrides);

    const std::filesystem::path out(out_dir);
    std::filesystem::create_directories(out);
    namespace cli = stdgat::cli;
    if (synth->parsed()) cli::cmd_synth(cfg, out);
    if (prepare->parsed()) cli::cmd_prepare(cfg, out);
    if (train->parsed()) cli::cmd_train(cfg, out);
    if (eval->parsed()) cli::cmd_eval(cfg, out);
    if (ablate->parsed()) cli::cmd_ablate(cfg, out);
    if (sweep->parsed()) cli::cmd_sweep(cfg, out);
  } catch (const stdgat::UsageError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const stdgat::ConfigError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
