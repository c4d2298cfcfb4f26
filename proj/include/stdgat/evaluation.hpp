// Copyright 2026 The stdgat Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Metrics, baseline forecasters, day-of-week breakdowns, ablation and sweep
// orchestration.

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "stdgat/autodiff.hpp"
#include "stdgat/data.hpp"
#include "stdgat/dataset_io.hpp"
#include "stdgat/errors.hpp"
#include "stdgat/model.hpp"
#include "stdgat/training.hpp"

namespace stdgat {

// ---------------------------------------------------------------------------
// Metrics

struct MetricReport {
  double rmse = 0.0;
  double mape = 0.0;
  double mae = 0.0;
  std::size_t n_samples = 0;        // scalar entries z
  std::size_t n_excluded_mape = 0;  // entries with zero target
};

// Streams (prediction, target) pairs. MAPE averages only over nonzero targets.
class MetricAccumulator {
 public:
  void add(std::span<const double> pred, std::span<const double> target) {
    if (pred.size() != target.size()) {
      throw DimensionError("metrics: prediction length " + std::to_string(pred.size()) + " vs target " +
                           std::to_string(target.size()));
    }
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double err = target[i] - pred[i];
      sse_ += err * err;
      sae_ += std::abs(err);
      if (target[i] != 0.0) {
        sape_ += std::abs(err) / std::abs(target[i]);
        ++mape_count_;
      } else {
        ++excluded_;
      }
    }
    count_ += pred.size();
  }

  std::size_t count() const { return count_; }

  MetricReport report() const {
    if (count_ == 0) throw UsageError("metrics over an empty sample set");
    MetricReport r;
    const auto z = static_cast<double>(count_);
    r.rmse = std::sqrt(sse_ / z);
    r.mae = sae_ / z;
    r.mape = mape_count_ ? sape_ / static_cast<double>(mape_count_) : 0.0;
    r.n_samples = count_;
    r.n_excluded_mape = excluded_;
    if (r.rmse + 1e-12 * std::max(1.0, r.rmse) < r.mae) {
      throw Error("metric identity violated: RMSE < MAE");
    }
    return r;
  }

 private:
  double sse_ = 0.0, sae_ = 0.0, sape_ = 0.0;
  std::size_t count_ = 0, mape_count_ = 0, excluded_ = 0;
};

inline MetricReport compute_metrics(std::span<const std::vector<double>> preds,
                                    std::span<const std::vector<double>> targets) {
  if (preds.size() != targets.size()) throw DimensionError("metrics: unequal sample counts");
  if (preds.empty()) throw UsageError("metrics over an empty sample set");
  MetricAccumulator acc;
  for (std::size_t k = 0; k < preds.size(); ++k) acc.add(preds[k], targets[k]);
  return acc.report();
}

inline constexpr std::array<const char*, 7> kWeekdayNames = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};

struct EvaluationReport {
  MetricReport overall;
  // Present only for days that occur in the evaluated range.
  std::array<std::optional<MetricReport>, 7> by_day;
  std::optional<MetricReport> weekdays;
  std::optional<MetricReport> weekends;
};

inline int day_of_week(std::size_t interval, const GridSpec& grid) {
  return static_cast<int>((static_cast<std::size_t>(grid.start_weekday) + interval / grid.intervals_per_day) % 7);
}

// ---------------------------------------------------------------------------
// Forecasters

class Forecaster {
 public:
  virtual ~Forecaster() = default;
  virtual std::string name() const = 0;
  // Sees train/validation windows and pre-test history only.
  virtual void fit(const TrainingData& data) = 0;
  // Raw-space forecast for the interval following the window.
  virtual std::vector<double> predict(const WindowView& window) = 0;
};

inline EvaluationReport evaluate(Forecaster& f, const WindowedDataset& ds, Split split = Split::kTest) {
  MetricAccumulator all, wd, we;
  std::array<MetricAccumulator, 7> days;
  for (std::size_t k = 0; k < ds.size(split); ++k) {
    const WindowView w = ds.window(split, k);
    const auto pred = f.predict(w);
    const auto target = ds.raw_row(w.target_interval);
    all.add(pred, target);
    const int dow = day_of_week(w.target_interval, ds.grid());
    days[dow].add(pred, target);
    (dow >= 5 ? we : wd).add(pred, target);
  }
  EvaluationReport r;
  r.overall = all.report();
  for (int d = 0; d < 7; ++d) {
    if (days[d].count()) r.by_day[d] = days[d].report();
  }
  if (wd.count()) r.weekdays = wd.report();
  if (we.count()) r.weekends = we.report();
  return r;
}

// Per-region mean of history intervals sharing the target's time-of-day slot.
inline std::vector<double> historical_average(const DemandSeries& history, std::size_t intervals_per_day,
                                              std::size_t target_interval) {
  const std::size_t slot = target_interval % intervals_per_day;
  std::vector<double> out(history.n_regions, 0.0);
  std::size_t matches = 0;
  for (std::size_t t = slot; t < history.n_intervals; t += intervals_per_day) {
    for (std::size_t r = 0; r < history.n_regions; ++r) out[r] += history.at(r, t);
    ++matches;
  }
  if (matches == 0) throw UsageError("no history interval shares time-of-day slot " + std::to_string(slot));
  for (auto& v : out) v /= static_cast<double>(matches);
  return out;
}

class HistoricalAverage final : public Forecaster {
 public:
  std::string name() const override { return "HA"; }
  void fit(const TrainingData& data) override {
    ipd_ = data.intervals_per_day;
    means_.clear();
    for (std::size_t s = 0; s < ipd_; ++s) {
      if (s < data.history.n_intervals) {
        means_.push_back(historical_average(data.history, ipd_, s));
      } else {
        means_.emplace_back();
      }
    }
  }
  std::vector<double> predict(const WindowView& w) override {
    if (ipd_ == 0) throw UsageError("HA used before fit");
    const auto& m = means_[w.target_interval % ipd_];
    if (m.empty()) throw UsageError("no history for time-of-day slot " + std::to_string(w.target_interval % ipd_));
    return m;
  }

 private:
  std::size_t ipd_ = 0;
  std::vector<std::vector<double>> means_;
};

// ---------------------------------------------------------------------------
// Linear regression on lag features

struct LinearSolution {
  Eigen::VectorXd coef;
  double intercept = 0.0;
  std::size_t iterations = 0;
  double duality_gap = 0.0;
};

namespace detail {

inline void center(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Eigen::MatrixXd& Xc, Eigen::VectorXd& yc,
                   Eigen::RowVectorXd& x_mean, double& y_mean) {
  x_mean = X.colwise().mean();
  y_mean = y.mean();
  Xc = X.rowwise() - x_mean;
  yc = y.array() - y_mean;
}

}  // namespace detail

// Minimizes (1/2n)||y - b - Xw||^2 + (lambda/2)||w||^2 in closed form.
inline LinearSolution fit_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda) {
  if (lambda < 0) throw ConfigError("ridge lambda must be >= 0");
  if (X.rows() != y.size() || X.rows() == 0) throw DimensionError("ridge: design and target sizes differ");
  Eigen::MatrixXd Xc;
  Eigen::VectorXd yc;
  Eigen::RowVectorXd x_mean;
  double y_mean = 0;
  detail::center(X, y, Xc, yc, x_mean, y_mean);
  const double n = static_cast<double>(X.rows());
  Eigen::MatrixXd A = Xc.transpose() * Xc / n;
  A.diagonal().array() += lambda;
  const Eigen::VectorXd rhs = Xc.transpose() * yc / n;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-12);
  if (qr.rank() < A.cols()) {
    throw SolverError("ridge normal equations are singular (rank " + std::to_string(qr.rank()) + " of " +
                      std::to_string(A.cols()) + "); use lambda > 0");
  }
  LinearSolution s;
  s.coef = A.llt().solve(rhs);
  s.intercept = y_mean - (x_mean * s.coef)(0);
  return s;
}

// Minimizes (1/2n)||y - b - Xw||^2 + lambda ||w||_1 by cyclic coordinate
// descent, stopping once the duality gap is <= tol.
inline LinearSolution fit_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                                double tol = 1e-6, std::size_t max_sweeps = 100000) {
  if (lambda < 0) throw ConfigError("lasso lambda must be >= 0");
  if (X.rows() != y.size() || X.rows() == 0) throw DimensionError("lasso: design and target sizes differ");
  Eigen::MatrixXd Xc;
  Eigen::VectorXd yc;
  Eigen::RowVectorXd x_mean;
  double y_mean = 0;
  detail::center(X, y, Xc, yc, x_mean, y_mean);
  const double n = static_cast<double>(X.rows());
  const Eigen::Index p = X.cols();
  const Eigen::VectorXd col_sq = Xc.colwise().squaredNorm();

  Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd resid = yc;
  auto gap = [&]() {
    const double l1 = lambda * n;
    const Eigen::VectorXd xtr = Xc.transpose() * resid;
    const double dual_norm = xtr.cwiseAbs().maxCoeff();
    const double r2 = resid.squaredNorm();
    double constant = 1.0, g = 0.0;
    if (dual_norm > l1) {
      constant = l1 / dual_norm;
      g = 0.5 * (r2 + r2 * constant * constant);
    } else {
      g = r2;
    }
    g += l1 * w.cwiseAbs().sum() - constant * resid.dot(yc);
    return g / n;
  };

  LinearSolution s;
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (col_sq(j) == 0.0) continue;
      const double old = w(j);
      const double rho = Xc.col(j).dot(resid) + col_sq(j) * old;
      const double thr = lambda * n;
      const double next = rho > thr ? (rho - thr) / col_sq(j) : rho < -thr ? (rho + thr) / col_sq(j) : 0.0;
      if (next != old) {
        resid -= Xc.col(j) * (next - old);
        w(j) = next;
      }
    }
    s.iterations = sweep + 1;
    s.duality_gap = gap();
    if (s.duality_gap <= tol) break;
  }
  s.coef = w;
  s.intercept = y_mean - (x_mean * w)(0);
  return s;
}

enum class Penalty { kRidge, kLasso };

struct LinearConfig {
  Penalty penalty = Penalty::kRidge;
  double lambda = 1e-3;
  // Pooled: one model over all regions with region one-hot features.
  bool pooled = true;
  bool region_identity = true;
  double tol = 1e-6;
};

// Lag features are the same L-window the deep model sees, in scaled space.
class LinearForecaster final : public Forecaster {
 public:
  explicit LinearForecaster(LinearConfig cfg) : cfg_(cfg) {}

  std::string name() const override { return cfg_.penalty == Penalty::kRidge ? "ridge" : "lasso"; }

  void fit(const TrainingData& data) override {
    n_ = data.n_regions;
    L_ = data.seq_len;
    scaler_ = data.scaler;
    const std::size_t m = data.train.size();
    if (m == 0) throw UsageError("linear baseline needs training windows");
    models_.clear();
    if (cfg_.pooled) {
      const std::size_t p = L_ + (cfg_.region_identity ? n_ : 0);
      Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m * n_), static_cast<Eigen::Index>(p));
      Eigen::VectorXd y(static_cast<Eigen::Index>(m * n_));
      for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t r = 0; r < n_; ++r) {
          const auto row = static_cast<Eigen::Index>(k * n_ + r);
          fill_row(data.train[k].window, r, X.row(row));
          y(row) = data.train[k].target[r];
        }
      }
      models_.push_back(solve(X, y));
    } else {
      for (std::size_t r = 0; r < n_; ++r) {
        Eigen::MatrixXd X(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(L_));
        Eigen::VectorXd y(static_cast<Eigen::Index>(m));
        for (std::size_t k = 0; k < m; ++k) {
          for (std::size_t l = 0; l < L_; ++l) X(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = data.train[k].window.inputs[l][r];
          y(static_cast<Eigen::Index>(k)) = data.train[k].target[r];
        }
        models_.push_back(solve(X, y));
      }
    }
  }

  std::vector<double> predict(const WindowView& w) override {
    if (models_.empty()) throw UsageError("linear baseline used before fit");
    std::vector<double> out(n_);
    const std::size_t p = cfg_.pooled ? L_ + (cfg_.region_identity ? n_ : 0) : L_;
    Eigen::RowVectorXd x(static_cast<Eigen::Index>(p));
    for (std::size_t r = 0; r < n_; ++r) {
      const LinearSolution& s = cfg_.pooled ? models_[0] : models_[r];
      if (cfg_.pooled) {
        x.setZero();
        fill_row(w, r, x);
      } else {
        for (std::size_t l = 0; l < L_; ++l) x(static_cast<Eigen::Index>(l)) = w.inputs[l][r];
      }
      out[r] = scaler_.inverse(s.intercept + x.dot(s.coef));
    }
    return out;
  }

  const std::vector<LinearSolution>& models() const { return models_; }

 private:
  template <typename Row>
  void fill_row(const WindowView& w, std::size_t r, Row&& row) const {
    for (std::size_t l = 0; l < L_; ++l) row(static_cast<Eigen::Index>(l)) = w.inputs[l][r];
    if (cfg_.region_identity) row(static_cast<Eigen::Index>(L_ + r)) = 1.0;
  }

  LinearSolution solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) const {
    return cfg_.penalty == Penalty::kRidge ? fit_ridge(X, y, cfg_.lambda) : fit_lasso(X, y, cfg_.lambda, cfg_.tol);
  }

  LinearConfig cfg_;
  std::size_t n_ = 0, L_ = 0;
  Scaler scaler_;
  std::vector<LinearSolution> models_;
};

// ---------------------------------------------------------------------------
// MLP on the flattened window

struct MlpConfig {
  std::vector<std::size_t> hidden = {128, 128, 64, 64};
  bool zero_output_layer = false;
};

class MlpModel {
 public:
  MlpModel(std::size_t n_regions, std::size_t seq_len, MlpConfig cfg, std::uint64_t seed)
      : n_(n_regions), L_(seq_len) {
    std::mt19937_64 rng(seed);
    std::size_t in = n_regions * seq_len;
    std::vector<std::size_t> widths = cfg.hidden;
    widths.push_back(n_regions);
    for (std::size_t l = 0; l < widths.size(); ++l) {
      const bool last = l + 1 == widths.size();
      const std::string prefix = "mlp." + std::to_string(l) + ".";
      ad::Tensor W = last && cfg.zero_output_layer ? ad::Tensor(ad::Shape{widths[l], in}) : glorot_uniform(widths[l], in, rng);
      params_.add(prefix + "W", std::move(W));
      params_.add(prefix + "b", ad::Tensor(ad::Shape{1, widths[l]}));
      in = widths[l];
    }
  }

  ad::ParameterSet& params() { return params_; }

  // ReLU hidden layers, linear output (1 x N).
  ad::Var forward(ad::Tape& tape, const WindowView& w) {
    if (w.seq_len() != L_) throw DimensionError("MLP window length differs from configuration");
    std::vector<double> x;
    x.reserve(n_ * L_);
    for (const auto& row : w.inputs) {
      if (row.size() != n_) throw DimensionError("MLP window width differs from configuration");
      x.insert(x.end(), row.begin(), row.end());
    }
    ad::Var h = tape.constant(ad::Tensor::row(std::move(x)));
    const std::size_t layers = params_.size() / 2;
    for (std::size_t l = 0; l < layers; ++l) {
      h = ad::add(ad::matmul_nt(h, tape.param(params_[2 * l])), tape.param(params_[2 * l + 1]));
      if (l + 1 < layers) h = ad::relu(h);
    }
    return h;
  }

 private:
  std::size_t n_, L_;
  ad::ParameterSet params_;
};

// Adapts any trainable model to the Forecaster interface.
template <LearnedModel M>
class LearnedForecaster final : public Forecaster {
 public:
  LearnedForecaster(std::string name, M model, TrainConfig cfg, std::string config_echo = {})
      : name_(std::move(name)), model_(std::move(model)), cfg_(cfg), echo_(std::move(config_echo)) {}

  std::string name() const override { return name_; }
  void fit(const TrainingData& data) override {
    scaler_ = data.scaler;
    result_ = train_model(model_, data, cfg_, echo_);
  }
  std::vector<double> predict(const WindowView& w) override {
    ad::Tape tape;
    auto y = model_.forward(tape, w).value().storage();
    for (auto& v : y) v = scaler_.inverse(v);
    return y;
  }

  M& model() { return model_; }
  const TrainResult& result() const { return result_; }

 private:
  std::string name_;
  M model_;
  TrainConfig cfg_;
  std::string echo_;
  Scaler scaler_;
  TrainResult result_;
};

// ---------------------------------------------------------------------------
// Orchestration

// Runs fn(0..n-1) on up to `jobs` threads. Results are stored by index, so
// output order does not depend on scheduling.
inline void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t j = 0; j < jobs; ++j) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline std::size_t default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

struct ExperimentConfig {
  ModelConfig model;  // n_regions and seq_len are overwritten from the dataset
  TrainConfig train;
  double ridge_lambda = 1e-3;
  double lasso_lambda = 1e-4;
  bool pooled_regression = true;
  MlpConfig mlp;
  std::size_t jobs = 1;
};

struct ReportRow {
  std::string name;
  EvaluationReport report;
  std::string config;  // compact key=value echo
};

inline std::string describe(const ModelConfig& m, const TrainConfig& t) {
  return "variant=" + std::string(variant_name(m.variant)) + ";L=" + std::to_string(m.seq_len) +
         ";gat_layers=" + std::to_string(m.gat.n_layers) + ";gat_hidden=" + std::to_string(m.gat.hidden_units) +
         ";lstm_hidden=" + std::to_string(m.lstm_hidden) + ";epochs=" + std::to_string(t.epochs) +
         ";batch=" + std::to_string(t.batch_size) + ";seed=" + std::to_string(t.seed);
}

inline std::unique_ptr<Forecaster> make_variant_forecaster(Variant v, const WindowedDataset& ds,
                                                           const ExperimentConfig& cfg, std::string* echo = nullptr) {
  ModelConfig m = cfg.model;
  m.n_regions = ds.n_regions();
  m.seq_len = ds.seq_len();
  m.variant = v;
  if (echo) *echo = describe(m, cfg.train);
  return std::make_unique<LearnedForecaster<StdgatModel>>(variant_name(v), StdgatModel(m, cfg.train.seed), cfg.train,
                                                          describe(m, cfg.train));
}

// Trains and evaluates the four model variants and the four baselines on
// identical data and seeds. Rows: full, fixed_graph, spatial_only,
// temporal_only, HA, ridge, lasso, MLP.
inline std::vector<ReportRow> run_ablation_suite(const WindowedDataset& ds, const ExperimentConfig& cfg) {
  const TrainingData data = ds.training_data();
  std::vector<ReportRow> rows(8);
  parallel_for(rows.size(), cfg.jobs, [&](std::size_t i) {
    std::unique_ptr<Forecaster> f;
    std::string echo;
    if (i < 4) {
      f = make_variant_forecaster(static_cast<Variant>(i), ds, cfg, &echo);
    } else if (i == 4) {
      f = std::make_unique<HistoricalAverage>();
      echo = "slots=" + std::to_string(ds.grid().intervals_per_day);
    } else if (i == 5 || i == 6) {
      LinearConfig lc;
      lc.penalty = i == 5 ? Penalty::kRidge : Penalty::kLasso;
      lc.lambda = i == 5 ? cfg.ridge_lambda : cfg.lasso_lambda;
      lc.pooled = cfg.pooled_regression;
      f = std::make_unique<LinearForecaster>(lc);
      echo = "L=" + std::to_string(ds.seq_len()) + ";lambda=" + std::to_string(lc.lambda) +
             ";pooled=" + (lc.pooled ? "1" : "0");
    } else {
      echo = "L=" + std::to_string(ds.seq_len()) + ";hidden=128,128,64,64;epochs=" + std::to_string(cfg.train.epochs) +
             ";seed=" + std::to_string(cfg.train.seed);
      f = std::make_unique<LearnedForecaster<MlpModel>>(
          "MLP", MlpModel(ds.n_regions(), ds.seq_len(), cfg.mlp, cfg.train.seed), cfg.train, echo);
    }
    f->fit(data);
    rows[i] = {f->name(), evaluate(*f, ds), echo};
  });
  return rows;
}

enum class SweepAxis { kSequenceLength, kGatLayers };

inline const char* sweep_axis_name(SweepAxis a) {
  return a == SweepAxis::kSequenceLength ? "seq-len" : "gat-layers";
}

inline SweepAxis parse_sweep_axis(const std::string& s) {
  if (s == "seq-len" || s == "sequence_length" || s == "L") return SweepAxis::kSequenceLength;
  if (s == "gat-layers" || s == "gat_layers" || s == "layers") return SweepAxis::kGatLayers;
  throw ConfigError("unknown sweep axis '" + s + "' (seq-len, gat-layers)");
}

struct SweepRow {
  SweepAxis axis;
  std::size_t value = 0;
  ReportRow row;
};

// Retrains the full model at every grid point in [lo, hi] with a fixed seed.
inline std::vector<SweepRow> run_sweeps(const DatasetArtifact& artifact, SweepAxis axis, std::size_t lo,
                                        std::size_t hi, const ExperimentConfig& cfg) {
  if (lo > hi) throw ConfigError("sweep range is empty");
  if (axis == SweepAxis::kSequenceLength && lo == 0) throw ConfigError("sequence length must be >= 1");
  std::vector<SweepRow> rows(hi - lo + 1);
  parallel_for(rows.size(), cfg.jobs, [&](std::size_t i) {
    const std::size_t value = lo + i;
    ExperimentConfig point = cfg;
    std::size_t L = artifact.seq_len;
    if (axis == SweepAxis::kSequenceLength) {
      L = value;
    } else {
      point.model.gat.n_layers = value;
    }
    const WindowedDataset ds = artifact.windows(L);
    std::string echo;
    auto f = make_variant_forecaster(Variant::kFull, ds, point, &echo);
    f->fit(ds.training_data());
    rows[i] = {axis, value, {f->name(), evaluate(*f, ds), echo}};
  });
  return rows;
}

}  // namespace stdgat
