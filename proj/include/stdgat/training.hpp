// Copyright 2026 The stdgat Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// MSE loss, Adam with L2 weight decay, the epoch loop with best-validation
// selection, and the checkpoint container.

#pragma once

#include <algorithm>
#include <chrono>
#include <concepts>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "stdgat/autodiff.hpp"
#include "stdgat/data.hpp"
#include "stdgat/errors.hpp"
#include "stdgat/io.hpp"
#include "stdgat/model.hpp"

namespace stdgat {

// Mean of squared differences over every entry.
inline ad::Var mse_loss(const ad::Var& pred, const ad::Var& target) {
  if (pred.shape() != target.shape()) {
    throw DimensionError("mse_loss: " + ad::shape_str(pred.shape()) + " vs " + ad::shape_str(target.shape()));
  }
  const ad::Var diff = ad::sub(pred, target);
  return ad::scale(ad::sum(ad::mul(diff, diff)), 1.0 / static_cast<double>(pred.value().size()));
}

struct AdamConfig {
  double learning_rate = 1e-3;
  double weight_decay = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::uint64_t step = 0;
  std::vector<ad::Tensor> m;
  std::vector<ad::Tensor> v;

  bool operator==(const AdamState&) const = default;
};

// Bias-corrected Adam; weight decay is added to the gradient before the
// moment update (classic L2 coupling).
inline void adam_step(ad::ParameterSet& params, AdamState& state, const AdamConfig& cfg) {
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.value.shape());
      state.v.emplace_back(p.value.shape());
    }
  }
  if (state.m.size() != params.size()) throw DimensionError("Adam state does not match parameter set");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k];
    auto value = p.value.data();
    auto grad = p.grad.data();
    auto m = state.m[k].data();
    auto v = state.v[k].data();
    if (m.size() != value.size()) throw DimensionError("Adam moment shape differs for " + p.name);
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i] + cfg.weight_decay * value[i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      value[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

struct TrainConfig {
  double learning_rate = 1e-3;
  double weight_decay = 5e-5;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  std::size_t report_every = 1;  // epochs between progress callbacks

  AdamConfig adam() const {
    AdamConfig a;
    a.learning_rate = learning_rate;
    a.weight_decay = weight_decay;
    return a;
  }
  void validate() const {
    if (!(learning_rate >= 0) || !(weight_decay >= 0)) throw ConfigError("learning rate and weight decay must be >= 0");
    if (epochs == 0 || batch_size == 0) throw ConfigError("epochs and batch size must be positive");
  }
};

struct NamedTensor {
  std::string name;
  ad::Tensor value;

  bool operator==(const NamedTensor&) const = default;
};

struct Checkpoint {
  std::string config_echo;
  std::uint64_t seed = 0;
  std::uint32_t epoch = 0;
  double val_loss = 0.0;
  std::vector<NamedTensor> params;
  AdamState adam;

  bool operator==(const Checkpoint&) const = default;
};

inline std::vector<NamedTensor> snapshot(const ad::ParameterSet& params) {
  std::vector<NamedTensor> out;
  for (const auto& p : params) out.push_back({p.name, p.value});
  return out;
}

// Copies checkpointed values into `params`, matching by name and shape.
inline void restore(ad::ParameterSet& params, const std::vector<NamedTensor>& saved) {
  if (saved.size() != params.size()) {
    throw DimensionError("checkpoint has " + std::to_string(saved.size()) + " parameters, model has " +
                         std::to_string(params.size()));
  }
  for (const auto& s : saved) {
    auto& p = params.at(s.name);
    if (p.value.shape() != s.value.shape()) {
      throw DimensionError("parameter " + s.name + ": checkpoint shape " + ad::shape_str(s.value.shape()) +
                           " vs model " + ad::shape_str(p.value.shape()));
    }
    p.value = s.value;
  }
}

// Checkpoint container:
//   "STDGATCK" u16 major u16 minor
//   str config echo, u64 seed, u32 epoch, f64 val_loss
//   u32 n_params; per parameter: str name, u32 rank, u64 dims[rank], f64 values
//   u64 adam step; u32 n_moments; per moment pair: f64 m[numel], f64 v[numel]
inline constexpr std::string_view kCheckpointMagic = "STDGATCK";
inline constexpr std::uint16_t kCheckpointMajor = 1;
inline constexpr std::uint16_t kCheckpointMinor = 0;

inline std::string serialize_checkpoint(const Checkpoint& ck) {
  io::BinaryWriter w;
  io::write_header(w, kCheckpointMagic, kCheckpointMajor, kCheckpointMinor);
  w.str(ck.config_echo);
  w.u64(ck.seed);
  w.u32(ck.epoch);
  w.f64(ck.val_loss);
  w.u32(static_cast<std::uint32_t>(ck.params.size()));
  for (const auto& p : ck.params) {
    w.str(p.name);
    w.u32(static_cast<std::uint32_t>(p.value.rank()));
    for (auto d : p.value.shape()) w.u64(d);
    w.f64s(p.value.storage());
  }
  w.u64(ck.adam.step);
  w.u32(static_cast<std::uint32_t>(ck.adam.m.size()));
  for (std::size_t k = 0; k < ck.adam.m.size(); ++k) {
    w.f64s(ck.adam.m[k].storage());
    w.f64s(ck.adam.v[k].storage());
  }
  return w.buffer();
}

inline Checkpoint deserialize_checkpoint(std::string_view bytes) {
  io::BinaryReader r(bytes);
  io::read_header(r, kCheckpointMagic, kCheckpointMajor);
  Checkpoint ck;
  ck.config_echo = r.str();
  ck.seed = r.u64();
  ck.epoch = r.u32();
  ck.val_loss = r.f64();
  const std::uint32_t n = r.u32();
  for (std::uint32_t k = 0; k < n; ++k) {
    NamedTensor t;
    t.name = r.str();
    const std::uint32_t rank = r.u32();
    if (rank > 2) throw FormatError("parameter " + t.name + " has unsupported rank");
    ad::Shape shape;
    for (std::uint32_t d = 0; d < rank; ++d) shape.push_back(r.u64());
    const std::size_t count = ad::numel(shape);
    t.value = ad::Tensor(shape, r.f64s(count));
    ck.params.push_back(std::move(t));
  }
  ck.adam.step = r.u64();
  const std::uint32_t moments = r.u32();
  if (moments != 0 && moments != n) throw FormatError("Adam moments do not match parameter table");
  for (std::uint32_t k = 0; k < moments; ++k) {
    const auto& shape = ck.params[k].value.shape();
    ck.adam.m.emplace_back(shape, r.f64s(ad::numel(shape)));
    ck.adam.v.emplace_back(shape, r.f64s(ad::numel(shape)));
  }
  if (!r.done()) throw FormatError("trailing bytes after checkpoint payload");
  return ck;
}

struct EpochStats {
  std::size_t epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
  double wall_ms = 0.0;
};

struct TrainResult {
  Checkpoint best;
  std::vector<EpochStats> history;
};

// A trainable forecaster: owns a ParameterSet and maps a window to a 1 x N
// scaled forecast on a tape.
template <typename M>
concept LearnedModel = requires(M m, ad::Tape& tape, const WindowView& w) {
  { m.params() } -> std::same_as<ad::ParameterSet&>;
  { m.forward(tape, w) } -> std::same_as<ad::Var>;
};

template <LearnedModel M>
double mean_squared_error(M& model, std::span<const LabeledWindow> windows) {
  if (windows.empty()) return 0.0;
  double sse = 0.0;
  std::size_t count = 0;
  for (const auto& lw : windows) {
    ad::Tape tape;
    const ad::Tensor& y = model.forward(tape, lw.window).value();
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double d = y[i] - lw.target[i];
      sse += d * d;
    }
    count += y.size();
  }
  return sse / static_cast<double>(count);
}

inline void write_metrics_header(std::ostream& out) { out << "epoch\ttrain_mse\tval_mse\twall_ms\n"; }

inline void write_metrics_line(std::ostream& out, const EpochStats& s) {
  std::ostringstream line;
  line.precision(17);
  line << s.epoch << '\t' << s.train_mse << '\t' << s.val_mse << '\t';
  line.precision(6);
  line << std::fixed << s.wall_ms << '\n';
  out << line.str();
}

// Epoch loop over seeded-shuffled training windows. After every epoch the
// validation MSE is computed; the best epoch's parameters are restored into
// `model` and returned as a checkpoint.
template <LearnedModel M>
TrainResult train_model(M& model, const TrainingData& data, const TrainConfig& cfg, std::string config_echo = {},
                        std::ostream* metrics_log = nullptr,
                        const std::function<void(const EpochStats&)>& on_report = {}) {
  cfg.validate();
  if (data.train.empty()) throw UsageError("training split has no windows");
  if (data.val.empty()) throw UsageError("validation split has no windows");

  ad::ParameterSet& params = model.params();
  const AdamConfig adam_cfg = cfg.adam();
  AdamState adam;
  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9E3779B97F4A7C15ull);
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  result.best.config_echo = std::move(config_echo);
  result.best.seed = cfg.seed;
  double best_val = INFINITY;
  if (metrics_log) write_metrics_header(*metrics_log);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double sse = 0.0;
    std::size_t entries = 0;
    for (std::size_t begin = 0, batch = 0; begin < order.size(); begin += cfg.batch_size, ++batch) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      ad::Tape tape;
      params.zero_grad();
      std::vector<ad::Var> preds;
      std::vector<double> targets;
      for (std::size_t k = begin; k < end; ++k) {
        const LabeledWindow& lw = data.train[order[k]];
        preds.push_back(model.forward(tape, lw.window));
        targets.insert(targets.end(), lw.target.begin(), lw.target.end());
      }
      const ad::Var P = ad::concat_rows(preds);
      const ad::Var Y = tape.constant(ad::Tensor(P.shape(), std::move(targets)));
      const ad::Var loss = mse_loss(P, Y);
      const double lv = loss.value().item();
      if (!std::isfinite(lv)) {
        throw TrainingError("non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batch));
      }
      tape.backward(loss);
      adam_step(params, adam, adam_cfg);
      sse += lv * static_cast<double>(P.value().size());
      entries += P.value().size();
    }

    EpochStats s;
    s.epoch = epoch;
    s.train_mse = sse / static_cast<double>(entries);
    s.val_mse = mean_squared_error(model, data.val);
    s.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    if (!std::isfinite(s.val_mse)) {
      throw TrainingError("non-finite validation loss at epoch " + std::to_string(epoch));
    }
    result.history.push_back(s);
    if (metrics_log) write_metrics_line(*metrics_log, s);
    if (on_report && (epoch % std::max<std::size_t>(1, cfg.report_every) == 0 || epoch == cfg.epochs)) on_report(s);

    if (s.val_mse < best_val) {
      best_val = s.val_mse;
      result.best.epoch = static_cast<std::uint32_t>(epoch);
      result.best.val_loss = s.val_mse;
      result.best.params = snapshot(params);
      result.best.adam = adam;
    }
  }
  restore(params, result.best.params);
  return result;
}

// Builds the configured variant, seeds its initialization from `cfg.seed`
// and trains it on the dataset's train/validation windows.
inline TrainResult train(const WindowedDataset& dataset, const ModelConfig& model_cfg, const TrainConfig& cfg,
                         std::string config_echo = {}, std::ostream* metrics_log = nullptr) {
  StdgatModel model(model_cfg, cfg.seed);
  return train_model(model, dataset.training_data(), cfg, std::move(config_echo), metrics_log);
}

}  // namespace stdgat
