// Copyright 2026 The stdgat Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Acceptance checks 1-9. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <tuple>

#include "oracles.hpp"
#include "stdgat/evaluation.hpp"
#include "stdgat/synthetic.hpp"
#include "stdgat/training.hpp"
#include "test_util.hpp"
#ifdef STDGAT_CLI_PATH
#include "cli_runner.hpp"
#endif

namespace stdgat {
namespace {

using ad::Shape;
using ad::Tape;
using ad::Tensor;
using testing::random_graph;
using testing::random_tensor;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

oracle::Mat to_mat(const Tensor& t) {
  oracle::Mat m(t.rows(), oracle::Vec(t.cols()));
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) m[r][c] = t(r, c);
  return m;
}

oracle::Vec to_vec(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

struct GatLayers {
  ad::ParameterSet ps;
  std::vector<GatLayerParams> layers;
  GatLayers(std::size_t n_layers, std::size_t d_in, std::size_t d_out, std::mt19937_64& rng) {
    for (std::size_t l = 0; l < n_layers; ++l) {
      auto& W = ps.add("W" + std::to_string(l), random_tensor(Shape{d_out, l ? d_out : d_in}, rng));
      auto& a = ps.add("a" + std::to_string(l), random_tensor(Shape{2 * d_out, 1}, rng));
      layers.push_back({&W, &a});
    }
  }
};

Outcome gradient_check() {
  std::mt19937_64 rng(101);
  ModelConfig c;
  c.n_regions = 4;
  c.seq_len = 2;
  c.gat.n_layers = 2;
  c.gat.hidden_units = 4;
  c.lstm_hidden = 8;
  StdgatModel model(c, 11);
  std::vector<std::vector<double>> rows = {{0.2, 0.9, 0.4, 0.6}, {0.7, 0.1, 0.8, 0.3}};
  NeighborSets g0 = {{0, 1}, {1, 3}, {0, 2}, {2, 3}}, g1 = {{0, 2, 3}, {0, 1}, {2}, {1, 3}};
  WindowView w;
  for (const auto& r : rows) w.inputs.push_back(r);
  w.graphs = {&g0, &g1};
  const Tensor target = random_tensor(Shape{1, 4}, rng, 0.2, 1.0);
  const auto res = testing::check_gradients(
      model.params(), [&](Tape& t) { return mse_loss(model.forward(t, w), t.constant(target)); }, 1e-5, 1e-4, 1e-7);
  return {res.failures == 0 && res.checked > 0,
          std::to_string(res.checked) + " scalars, " + std::to_string(res.failures) + " failures, max abs diff " +
              fmt("%.1e", res.worst_abs) + ", worst rel above floor " + fmt("%.1e", res.worst_rel)};
}

Outcome attention_invariants() {
  std::mt19937_64 rng(102);
  double worst_sum = 0, worst_off = 0, worst_uniform = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 12;
    GatLayers f(1, 3, 4, rng);
    const auto graph = random_graph(n, 0.1 + 0.08 * (trial % 10), rng);
    Tape tape;
    const Tensor a = gat_layer_forward(tape, tape.constant(random_tensor(Shape{n, 3}, rng, -3, 3)), graph,
                                       f.layers[0]).attention.value();
    Tensor same(Shape{n, 3});
    for (std::size_t i = 0; i < n; ++i) same(i, 0) = 0.5, same(i, 1) = -1.0, same(i, 2) = 2.0;
    const Tensor u = gat_layer_forward(tape, tape.constant(same), graph, f.layers[0]).attention.value();
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < n; ++j) {
        s += a(i, j);
        const bool nb = std::binary_search(graph[i].begin(), graph[i].end(), j);
        if (!nb) worst_off = std::max({worst_off, std::abs(a(i, j)), std::abs(u(i, j))});
        if (nb) worst_uniform = std::max(worst_uniform, std::abs(u(i, j) - 1.0 / static_cast<double>(graph[i].size())));
      }
      worst_sum = std::max(worst_sum, std::abs(s - 1.0));
    }
  }
  return {worst_sum <= 1e-9 && worst_off == 0.0 && worst_uniform <= 1e-12,
          "max |sum-1| " + fmt("%.1e", worst_sum) + ", max off-neighbor " + fmt("%.1e", worst_off) +
              ", max uniform dev " + fmt("%.1e", worst_uniform)};
}

Outcome permutation_equivariance() {
  std::mt19937_64 rng(103);
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 11;
    GatLayers f(3, 1, 4, rng);
    GatBlockConfig cfg;
    cfg.n_layers = 3;
    cfg.hidden_units = 4;
    const auto graph = random_graph(n, 0.3, rng);
    const Tensor X = random_tensor(Shape{n, 1}, rng, 0, 2);
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), rng);
    NeighborSets pg(n);
    Tensor PX(Shape{n, 1});
    for (std::size_t i = 0; i < n; ++i) {
      PX(perm[i], 0) = X(i, 0);
      for (auto j : graph[i]) pg[perm[i]].push_back(perm[j]);
      std::sort(pg[perm[i]].begin(), pg[perm[i]].end());
    }
    Tape tape;
    const Tensor Y = gat_block_forward(tape, tape.constant(X), graph, cfg, f.layers).value();
    const Tensor PY = gat_block_forward(tape, tape.constant(PX), pg, cfg, f.layers).value();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t o = 0; o < 4; ++o) worst = std::max(worst, std::abs(PY(perm[i], o) - Y(i, o)));
  }
  return {worst <= 1e-9, "max elementwise deviation " + fmt("%.1e", worst)};
}

Outcome layer_oracles() {
  std::mt19937_64 rng(104);
  double gat = 0, lstm = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + trial % 8, d_in = 1 + trial % 4, d_out = 2 + trial % 5;
    GatLayers f(1, d_in, d_out, rng);
    const auto graph = random_graph(n, 0.4, rng);
    const Tensor H = random_tensor(Shape{n, d_in}, rng, -2, 2);
    Tape tape;
    const auto out = gat_layer_forward(tape, tape.constant(H), graph, f.layers[0], 0.2);
    const auto ref =
        oracle::gat_layer(to_mat(H), to_mat(f.layers[0].W->value), to_vec(f.layers[0].a->value), graph, 0.2);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t o = 0; o < d_out; ++o) gat = std::max(gat, std::abs(out.features.value()(i, o) - ref.features[i][o]));
      for (std::size_t j = 0; j < n; ++j) gat = std::max(gat, std::abs(out.attention.value()(i, j) - ref.attention[i][j]));
    }

    const std::size_t steps = 1 + trial % 5, in = 1 + trial % 6, k = 1 + trial % 7;
    ad::ParameterSet ps;
    LstmParams p{};
    oracle::LstmWeights w;
    const char* g = "ifgo";
    for (int q = 0; q < 4; ++q) {
      p.W_x[q] = &ps.add(std::string("Wx") + g[q], random_tensor(Shape{k, in}, rng));
      p.W_h[q] = &ps.add(std::string("Wh") + g[q], random_tensor(Shape{k, k}, rng));
      p.b_x[q] = &ps.add(std::string("bx") + g[q], random_tensor(Shape{1, k}, rng));
      p.b_h[q] = &ps.add(std::string("bh") + g[q], random_tensor(Shape{1, k}, rng));
      w.Wx[q] = to_mat(p.W_x[q]->value);
      w.Wh[q] = to_mat(p.W_h[q]->value);
      w.bx[q] = to_vec(p.b_x[q]->value);
      w.bh[q] = to_vec(p.b_h[q]->value);
    }
    const Tensor S = random_tensor(Shape{steps, in}, rng, -2, 2);
    const Tensor h = lstm_forward(tape, tape.constant(S), p).value();
    const auto href = oracle::lstm(to_mat(S), w);
    for (std::size_t u = 0; u < k; ++u) lstm = std::max(lstm, std::abs(h[u] - href[u]));
  }
  return {gat <= 1e-12 && lstm <= 1e-12, "GAT max dev " + fmt("%.1e", gat) + ", LSTM max dev " + fmt("%.1e", lstm)};
}

Outcome graph_semantics() {
  GridSpec grid;
  grid.n_rows = 1;
  grid.n_cols = 3;
  grid.n_intervals = 3;
  const std::uint32_t A = 0, B = 1, C = 2;
  const std::vector<TripRecord> trips = {{C, B, 1}, {C, B, 1}, {A, B, 1}, {B, A, 2}};
  const auto g = build_dynamic_graphs(trips, grid);
  auto edge = [&](std::uint32_t s, std::uint32_t d, std::size_t t) {
    const auto& nb = g.at(t)[d];
    return std::binary_search(nb.begin(), nb.end(), s);
  };
  bool self = true;
  for (std::size_t t = 0; t < 3; ++t)
    for (std::uint32_t i = 0; i < 3; ++i) self &= edge(i, i, t);
  const bool ok = edge(C, B, 1) && !edge(B, C, 1) && !edge(C, B, 0) && !edge(C, B, 2) && self;
  return {ok, std::string("C->B at t: ") + (edge(C, B, 1) ? "present" : "absent") +
                  ", B->C at t: " + (edge(B, C, 1) ? "present" : "absent") + ", self-loops " + (self ? "everywhere" : "missing")};
}

Outcome overfit() {
  GridSpec grid;
  grid.n_rows = 1;
  grid.n_cols = 3;
  grid.n_intervals = 12;
  grid.intervals_per_day = 4;
  DemandSeries d;
  d.n_regions = 3;
  d.n_intervals = 12;
  d.values.resize(36);
  std::vector<TripRecord> trips;
  for (std::uint32_t t = 0; t < 12; ++t) {
    d.at(0, t) = 1 + t % 4;
    d.at(1, t) = 6 - t % 3;
    d.at(2, t) = (t * 7) % 5;
    trips.push_back({t % 3, (t + 1) % 3, t});
  }
  const auto ds = make_windows(d, build_dynamic_graphs(trips, grid), grid, 2, SplitFractions{0.0, 0.0});
  auto data = ds.training_data();
  data.val = data.train;
  ModelConfig c;
  c.n_regions = 3;
  c.seq_len = 2;
  c.gat.n_layers = 2;
  c.gat.hidden_units = 4;
  c.lstm_hidden = 16;
  TrainConfig t;
  t.epochs = 500;
  t.batch_size = 10;
  t.learning_rate = 1e-2;
  t.weight_decay = 0;
  t.seed = 5;
  auto run = [&] {
    StdgatModel m(c, t.seed);
    const auto res = train_model(m, data, t);
    std::size_t reached = 0;
    for (const auto& s : res.history) {
      if (s.train_mse < 1e-3) {
        reached = s.epoch;
        break;
      }
    }
    return std::make_tuple(res.history.back().train_mse, reached, serialize_checkpoint(res.best));
  };
  const auto [mse, epoch, bytes] = run();
  const auto [mse2, epoch2, bytes2] = run();
  const bool deterministic = bytes == bytes2 && mse == mse2;
  return {data.train.size() == 10 && epoch > 0 && deterministic,
          std::to_string(data.train.size()) + " windows, final train MSE " + fmt("%.2e", mse) +
              (epoch ? ", below 1e-3 at epoch " + std::to_string(epoch) : ", never below 1e-3") +
              (deterministic ? ", rerun identical" : ", rerun differs")};
}

Outcome desk_experiment() {
  constexpr int kSeeds = 5;
  const char* names[4] = {"full", "fixed_graph", "temporal_only", "HA"};
  std::vector<std::array<double, 4>> rmse(kSeeds);
  parallel_for(kSeeds, default_jobs(), [&](std::size_t s) {
    SyntheticConfig sc;
    sc.seed = 1000 + s;
    sc.n_rows = 6;
    sc.n_cols = 6;
    sc.n_days = 90;
    const auto city = generate_synthetic_city(sc);
    const auto ds = make_windows(build_demand(city.trips, city.grid), build_dynamic_graphs(city.trips, city.grid, 3),
                                 city.grid, 5);
    ExperimentConfig cfg;
    cfg.model.gat.n_layers = 2;
    cfg.model.gat.hidden_units = 8;
    cfg.model.lstm_hidden = 32;
    cfg.train.epochs = 30;
    cfg.train.seed = s;
    const auto data = ds.training_data();
    const Variant vs[3] = {Variant::kFull, Variant::kFixedGraph, Variant::kTemporalOnly};
    for (int i = 0; i < 3; ++i) {
      auto f = make_variant_forecaster(vs[i], ds, cfg);
      f->fit(data);
      rmse[s][i] = evaluate(*f, ds).overall.rmse;
    }
    HistoricalAverage ha;
    ha.fit(data);
    rmse[s][3] = evaluate(ha, ds).overall.rmse;
  });
  double mean[4] = {}, lo[4], hi[4];
  std::fill(lo, lo + 4, INFINITY);
  std::fill(hi, hi + 4, -INFINITY);
  for (int s = 0; s < kSeeds; ++s) {
    std::printf("  seed %d:", s);
    for (int i = 0; i < 4; ++i) {
      std::printf(" %s %.4f", names[i], rmse[s][i]);
      mean[i] += rmse[s][i] / kSeeds;
      lo[i] = std::min(lo[i], rmse[s][i]);
      hi[i] = std::max(hi[i], rmse[s][i]);
    }
    std::printf("\n");
  }
  std::string detail = "mean RMSE";
  for (int i = 0; i < 4; ++i) {
    detail += std::string(" ") + names[i] + " " + fmt("%.4f", mean[i]) + "±" + fmt("%.4f", (hi[i] - lo[i]) / 2);
  }
  const bool beats_ha = mean[0] < mean[3];
  const bool ordering = mean[0] <= mean[1] && mean[0] <= mean[2];
  detail += beats_ha ? "; full < HA" : "; full >= HA";
  detail += ordering ? "; full <= fixed, temporal" : "; variant ordering violated";
  return {beats_ha && ordering, detail};
}

Outcome metric_identities() {
  using Rows = std::vector<std::vector<double>>;
  auto m = [](const Rows& p, const Rows& t) { return compute_metrics(p, t); };
  bool ok = true;
  const auto a = m({{1, 2, 3}}, {{1, 2, 3}});
  ok &= a.rmse == 0 && a.mape == 0 && a.mae == 0;
  const auto b = m({{3}}, {{4}});
  ok &= std::abs(b.rmse - 1) < 1e-15 && std::abs(b.mape - 0.25) < 1e-15 && std::abs(b.mae - 1) < 1e-15;
  const auto c = m({{0, 2}}, {{0, 1}});
  ok &= std::abs(c.mape - 1.0) < 1e-15 && c.n_excluded_mape == 1;
  std::mt19937_64 rng(108);
  std::uniform_real_distribution<double> u(0, 5);
  std::uniform_int_distribution<int> z(0, 3);
  std::size_t reports = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Rows p(4, std::vector<double>(6)), t(4, std::vector<double>(6));
    std::size_t zeros = 0;
    for (auto k = 0; k < 4; ++k) {
      for (auto r = 0; r < 6; ++r) {
        p[k][r] = u(rng);
        t[k][r] = z(rng) == 0 ? 0.0 : u(rng);
        zeros += t[k][r] == 0;
      }
    }
    const auto rep = m(p, t);
    ok &= rep.rmse >= rep.mae && rep.n_excluded_mape == zeros;
    ++reports;
  }
  return {ok, "worked examples exact, RMSE >= MAE and zero-exclusion count on " + std::to_string(reports) +
                  " random reports"};
}

Outcome reproducibility() {
#ifdef STDGAT_CLI_PATH
  const char* ini =
      "[run]\nseed = 21\n[grid]\nrows = 3\ncols = 3\n[synth]\ndays = 14\n[data]\nseq_len = 3\n"
      "[model]\ngat_layers = 2\ngat_hidden = 4\nlstm_hidden = 8\n[train]\nepochs = 3\nbatch_size = 16\n";
  testing::CliRunner a("acceptance_a"), b("acceptance_b");
  for (auto* r : {&a, &b}) {
    r->write("run.ini", ini);
    const std::string base = "--config '" + r->path("run.ini").string() + "' --out '" + r->dir().string() + "' ";
    for (const char* cmd : {"synth", "prepare", "train", "eval"}) {
      if (const int rc = r->run(base + cmd); rc != 0) {
        return {false, std::string(cmd) + " exited with " + std::to_string(rc)};
      }
    }
  }
  std::string detail;
  bool ok = true;
  for (const char* f : {"trips.csv", "dataset.bin", "checkpoint.bin", "metrics.tsv", "metrics.jsonl"}) {
    const bool same = a.read(f) == b.read(f);
    ok &= same;
    detail += std::string(detail.empty() ? "" : ", ") + f + (same ? " identical" : " DIFFERS");
  }
  return {ok, detail};
#else
  return {false, "built without the command-line tool"};
#endif
}

}  // namespace
}  // namespace stdgat

int main() {
  using namespace stdgat;
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"gradient correctness", gradient_check},
      {"attention invariants", attention_invariants},
      {"permutation equivariance", permutation_equivariance},
      {"layer oracles", layer_oracles},
      {"dynamic-graph direction", graph_semantics},
      {"overfit smoke test", overfit},
      {"desk-scale directional experiment", desk_experiment},
      {"metric identities", metric_identities},
      {"end-to-end reproducibility", reproducibility},
  };
  int failed = 0;
  int k = 0;
  for (const auto& c : criteria) {
    ++k;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", k, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
