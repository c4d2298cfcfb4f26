// Copyright 2026 The stdgat Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Spatial-temporal dynamic graph attention network.
//
//   interval t:  X^t (N x 1) --GAT block over G^t--> N x d --flatten--> theta^t
//   window:      S = [theta^{t-L+1}; ...; theta^t]  (L x N*d)
//   temporal:    LSTM over the rows of S, oldest first; beta = h_L
//   head:        ReLU(W_FC beta + b_FC)             (N)
//
// The GAT block weights are shared by every interval of the window; each
// layer inside the block uses the same interval graph.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "stdgat/autodiff.hpp"
#include "stdgat/data.hpp"
#include "stdgat/errors.hpp"

namespace stdgat {

enum class Variant { kFull, kFixedGraph, kSpatialOnly, kTemporalOnly };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kFixedGraph: return "fixed_graph";
    case Variant::kSpatialOnly: return "spatial_only";
    case Variant::kTemporalOnly: return "temporal_only";
  }
  return "?";
}

inline Variant parse_variant(const std::string& s) {
  if (s == "full") return Variant::kFull;
  if (s == "fixed_graph" || s == "fixed") return Variant::kFixedGraph;
  if (s == "spatial_only" || s == "spatial") return Variant::kSpatialOnly;
  if (s == "temporal_only" || s == "temporal") return Variant::kTemporalOnly;
  throw ConfigError("unknown variant '" + s + "' (full, fixed_graph, spatial_only, temporal_only)");
}

struct GatBlockConfig {
  std::size_t n_layers = 3;
  std::size_t hidden_units = 32;
  double negative_slope = 0.2;

  // Per-node feature width leaving the block; 0 layers pass demand through.
  std::size_t output_width() const { return n_layers == 0 ? 1 : hidden_units; }
};

struct ModelConfig {
  std::size_t n_regions = 121;
  std::size_t seq_len = 5;
  GatBlockConfig gat;
  std::size_t lstm_hidden = 512;
  Variant variant = Variant::kFull;

  std::size_t spatial_width() const { return n_regions * gat.output_width(); }
  std::size_t lstm_input() const {
    return variant == Variant::kTemporalOnly ? n_regions : spatial_width();
  }
  bool uses_gat() const { return variant != Variant::kTemporalOnly; }
  bool uses_lstm() const { return variant != Variant::kSpatialOnly; }
};

struct GatLayerParams {
  ad::Parameter* W;  // d_out x d_in
  ad::Parameter* a;  // 2*d_out x 1; first half scores the receiving node, second the neighbor
};

struct LstmParams {
  // Gate order: input, forget, cell, output.
  std::array<ad::Parameter*, 4> W_x;  // k x input
  std::array<ad::Parameter*, 4> W_h;  // k x k
  std::array<ad::Parameter*, 4> b_x;  // 1 x k
  std::array<ad::Parameter*, 4> b_h;  // 1 x k

  std::size_t hidden() const { return W_h[0]->value.rows(); }
  std::size_t input() const { return W_x[0]->value.cols(); }
};

struct PredictionParams {
  ad::Parameter* W;  // N x k
  ad::Parameter* b;  // 1 x N
};

struct GatLayerOutput {
  ad::Var features;   // N x d_out
  ad::Var attention;  // N x N, row i holds alpha_ij
};

// One graph attention layer:
//   e_ij = LeakyReLU(a^T [W h_i || W h_j]),  alpha_i. = softmax over j in N_i,
//   h'_i = LeakyReLU(sum_j alpha_ij W h_j).
inline GatLayerOutput gat_layer_forward(ad::Tape& tape, const ad::Var& H, const NeighborSets& neighbors,
                                        const GatLayerParams& p, double negative_slope = 0.2) {
  const ad::Tensor& hv = H.value();
  const std::size_t n = hv.rows();
  const std::size_t d_in = hv.cols();
  const std::size_t d_out = p.W->value.rows();
  if (hv.rank() != 2 || p.W->value.cols() != d_in) {
    throw DimensionError("gat layer: features " + ad::shape_str(hv.shape()) + " vs W " +
                         ad::shape_str(p.W->value.shape()));
  }
  if (p.a->value.shape() != ad::Shape{2 * d_out, 1}) {
    throw DimensionError("gat layer: attention vector must be " + std::to_string(2 * d_out) + " x 1");
  }
  if (neighbors.size() != n) throw DimensionError("gat layer: graph size differs from feature rows");

  const ad::Var W = tape.param(*p.W);
  const ad::Var a = tape.param(*p.a);
  const ad::Var Z = ad::matmul_nt(H, W);  // row i = W h_i
  const ad::Var s_self = ad::matmul(Z, ad::slice_rows(a, 0, d_out));
  const ad::Var s_nbr = ad::matmul(Z, ad::slice_rows(a, d_out, 2 * d_out));
  const ad::Var ones_row = tape.constant(ad::Tensor(ad::Shape{1, n}, 1.0));
  const ad::Var ones_col = tape.constant(ad::Tensor(ad::Shape{n, 1}, 1.0));
  const ad::Var scores = ad::add(ad::matmul(s_self, ones_row), ad::matmul(ones_col, ad::transpose(s_nbr)));
  const auto mask = neighbor_mask(neighbors);
  const ad::Var alpha = ad::masked_softmax(ad::leaky_relu(scores, negative_slope), mask);
  const ad::Var out = ad::leaky_relu(ad::matmul(alpha, Z), negative_slope);
  return {out, alpha};
}

// Applies every layer with the same interval graph. Zero layers is identity.
inline ad::Var gat_block_forward(ad::Tape& tape, const ad::Var& X, const NeighborSets& graph,
                                 const GatBlockConfig& config, std::span<const GatLayerParams> layers) {
  if (layers.size() != config.n_layers) {
    throw DimensionError("gat block: expected " + std::to_string(config.n_layers) + " layers, got " +
                         std::to_string(layers.size()));
  }
  ad::Var h = X;
  for (const auto& layer : layers) h = gat_layer_forward(tape, h, graph, layer, config.negative_slope).features;
  return h;
}

// Rows of the result are the flattened block outputs, oldest interval first.
inline ad::Var spatial_forward(ad::Tape& tape, std::span<const std::span<const double>> inputs,
                               std::span<const NeighborSets* const> graphs, const GatBlockConfig& config,
                               std::span<const GatLayerParams> layers) {
  if (inputs.empty()) throw UsageError("spatial module needs at least one interval");
  if (inputs.size() != graphs.size()) throw DimensionError("spatial module: inputs and graphs differ in length");
  std::vector<ad::Var> rows;
  rows.reserve(inputs.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const std::size_t n = inputs[t].size();
    const ad::Var X = tape.constant(ad::Tensor(ad::Shape{n, 1}, std::vector<double>(inputs[t].begin(), inputs[t].end())));
    rows.push_back(ad::flatten(gat_block_forward(tape, X, *graphs[t], config, layers)));
  }
  return ad::concat_rows(rows);
}

// Standard LSTM over the rows of S with h_0 = c_0 = 0; returns h_L (1 x k).
inline ad::Var lstm_forward(ad::Tape& tape, const ad::Var& S, const LstmParams& p) {
  const ad::Tensor& sv = S.value();
  if (sv.rank() != 2 || sv.cols() != p.input()) {
    throw DimensionError("lstm: input " + ad::shape_str(sv.shape()) + " vs expected width " +
                         std::to_string(p.input()));
  }
  const std::size_t steps = sv.rows();
  std::array<ad::Var, 4> xproj;
  std::array<ad::Var, 4> bias;
  std::array<ad::Var, 4> Wh;
  for (int q = 0; q < 4; ++q) {
    xproj[q] = ad::matmul_nt(S, tape.param(*p.W_x[q]));
    bias[q] = ad::add(tape.param(*p.b_x[q]), tape.param(*p.b_h[q]));
    Wh[q] = tape.param(*p.W_h[q]);
  }
  ad::Var h{}, c{};
  for (std::size_t t = 0; t < steps; ++t) {
    std::array<ad::Var, 4> pre;
    for (int q = 0; q < 4; ++q) {
      pre[q] = ad::add(ad::slice_rows(xproj[q], t, t + 1), bias[q]);
      if (t > 0) pre[q] = ad::add(pre[q], ad::matmul_nt(h, Wh[q]));
    }
    const ad::Var i = ad::sigmoid(pre[0]);
    const ad::Var f = ad::sigmoid(pre[1]);
    const ad::Var g = ad::tanh(pre[2]);
    const ad::Var o = ad::sigmoid(pre[3]);
    c = t == 0 ? ad::mul(i, g) : ad::add(ad::mul(f, c), ad::mul(i, g));
    h = ad::mul(o, ad::tanh(c));
  }
  return h;
}

// ReLU(W beta^T + b) as a 1 x N row.
inline ad::Var predict(ad::Tape& tape, const ad::Var& beta, const PredictionParams& p) {
  const ad::Tensor& bv = beta.value();
  if (bv.rank() != 2 || bv.rows() != 1 || bv.cols() != p.W->value.cols()) {
    throw DimensionError("prediction layer: input " + ad::shape_str(bv.shape()) + " vs W " +
                         ad::shape_str(p.W->value.shape()));
  }
  return ad::relu(ad::add(ad::matmul_nt(beta, tape.param(*p.W)), tape.param(*p.b)));
}

// Uniform(-limit, limit) with limit = sqrt(6 / (fan_in + fan_out)).
inline ad::Tensor glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> u(-limit, limit);
  ad::Tensor t(ad::Shape{rows, cols});
  for (auto& v : t.data()) v = u(rng);
  return t;
}

class StdgatModel {
 public:
  StdgatModel(ModelConfig config, std::uint64_t seed) : config_(config) {
    if (config_.n_regions == 0) throw ConfigError("model needs at least one region");
    if (config_.seq_len == 0) throw ConfigError("sequence length must be >= 1");
    if (config_.gat.n_layers > 0 && config_.gat.hidden_units == 0) throw ConfigError("GAT hidden units must be >= 1");
    if (config_.uses_lstm() && config_.lstm_hidden == 0) throw ConfigError("LSTM hidden size must be >= 1");

    std::mt19937_64 rng(seed);
    if (config_.uses_gat()) {
      std::size_t d_in = 1;
      for (std::size_t l = 0; l < config_.gat.n_layers; ++l) {
        const std::size_t d_out = config_.gat.hidden_units;
        const std::string prefix = "gat." + std::to_string(l) + ".";
        gat_idx_.push_back({add(prefix + "W", glorot_uniform(d_out, d_in, rng)),
                            add(prefix + "a", glorot_uniform(2 * d_out, 1, rng))});
        d_in = d_out;
      }
    }
    std::size_t head_in = config_.spatial_width();
    if (config_.uses_lstm()) {
      const std::size_t k = config_.lstm_hidden, in = config_.lstm_input();
      static constexpr const char* kGate[4] = {"i", "f", "g", "o"};
      for (int q = 0; q < 4; ++q) lstm_idx_.W_x[q] = add(std::string("lstm.W_i") + kGate[q], glorot_uniform(k, in, rng));
      for (int q = 0; q < 4; ++q) lstm_idx_.W_h[q] = add(std::string("lstm.W_h") + kGate[q], glorot_uniform(k, k, rng));
      for (int q = 0; q < 4; ++q) {
        ad::Tensor b(ad::Shape{1, k});
        if (q == 1) b.fill(1.0);  // forget gate starts open
        lstm_idx_.b_x[q] = add(std::string("lstm.b_i") + kGate[q], std::move(b));
      }
      for (int q = 0; q < 4; ++q) lstm_idx_.b_h[q] = add(std::string("lstm.b_h") + kGate[q], ad::Tensor(ad::Shape{1, k}));
      head_in = k;
    }
    pred_idx_ = {add("pred.W", glorot_uniform(config_.n_regions, head_in, rng)),
                 add("pred.b", ad::Tensor(ad::Shape{1, config_.n_regions}))};
  }

  const ModelConfig& config() const { return config_; }
  ad::ParameterSet& params() { return params_; }
  const ad::ParameterSet& params() const { return params_; }

  std::vector<GatLayerParams> gat_params() {
    std::vector<GatLayerParams> out;
    for (const auto& [w, a] : gat_idx_) out.push_back({&params_[w], &params_[a]});
    return out;
  }
  LstmParams lstm_params() {
    if (!config_.uses_lstm()) throw UsageError("variant has no temporal module");
    LstmParams p{};
    for (int q = 0; q < 4; ++q) {
      p.W_x[q] = &params_[lstm_idx_.W_x[q]];
      p.W_h[q] = &params_[lstm_idx_.W_h[q]];
      p.b_x[q] = &params_[lstm_idx_.b_x[q]];
      p.b_h[q] = &params_[lstm_idx_.b_h[q]];
    }
    return p;
  }
  PredictionParams prediction_params() { return {&params_[pred_idx_.first], &params_[pred_idx_.second]}; }

  // Scaled-demand forecast for the interval after the window, as 1 x N.
  ad::Var forward(ad::Tape& tape, const WindowView& w) {
    if (w.seq_len() != config_.seq_len) {
      throw DimensionError("window length " + std::to_string(w.seq_len()) + " vs model L=" +
                           std::to_string(config_.seq_len));
    }
    for (const auto& row : w.inputs) {
      if (row.size() != config_.n_regions) throw DimensionError("window width differs from model region count");
    }
    const auto pred = prediction_params();
    if (config_.variant == Variant::kTemporalOnly) {
      std::vector<ad::Var> rows;
      for (const auto& row : w.inputs) rows.push_back(tape.constant(ad::Tensor::row({row.begin(), row.end()})));
      return predict(tape, lstm_forward(tape, ad::concat_rows(rows), lstm_params()), pred);
    }

    std::vector<const NeighborSets*> graphs = w.graphs;
    if (config_.variant == Variant::kFixedGraph) {
      if (w.fixed_graph == nullptr) throw UsageError("fixed-graph variant needs the geographic graph");
      std::fill(graphs.begin(), graphs.end(), w.fixed_graph);
    }
    const auto gat = gat_params();
    if (config_.variant == Variant::kSpatialOnly) {
      const ad::Var S = spatial_forward(tape, std::span(w.inputs).last(1), std::span(graphs).last(1), config_.gat, gat);
      return predict(tape, S, pred);
    }
    const ad::Var S = spatial_forward(tape, w.inputs, graphs, config_.gat, gat);
    return predict(tape, lstm_forward(tape, S, lstm_params()), pred);
  }

  std::vector<double> predict_scaled(const WindowView& w) {
    ad::Tape tape;
    const ad::Var y = forward(tape, w);
    return y.value().storage();
  }

 private:
  std::size_t add(std::string name, ad::Tensor value) {
    params_.add(std::move(name), std::move(value));
    return params_.size() - 1;
  }

  struct LstmIndex {
    std::array<std::size_t, 4> W_x{}, W_h{}, b_x{}, b_h{};
  };

  ModelConfig config_;
  ad::ParameterSet params_;
  std::vector<std::pair<std::size_t, std::size_t>> gat_idx_;
  LstmIndex lstm_idx_;
  std::pair<std::size_t, std::size_t> pred_idx_{};
};

}  // namespace stdgat
