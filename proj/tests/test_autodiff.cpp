// Copyright 2026 The stdgat Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "stdgat/autodiff.hpp"
#include "test_util.hpp"

namespace stdgat {
namespace {

using ad::Shape;
using ad::Tape;
using ad::Tensor;
using ad::Var;
using testing::check_gradients;
using testing::random_tensor;

TEST(Tensor, ShapeMismatchThrows) {
  EXPECT_THROW(Tensor(Shape{2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
  EXPECT_THROW(Tensor::matrix({{1, 2}, {3}}), DimensionError);
}

TEST(Matmul, IdentityAndZero) {
  Tape tape;
  Var I = tape.constant(Tensor::matrix({{1, 0}, {0, 1}}));
  Var B = tape.constant(Tensor::matrix({{1, 2}, {3, 4}}));
  EXPECT_EQ(ad::matmul(I, B).value(), Tensor::matrix({{1, 2}, {3, 4}}));
  Var r = tape.constant(Tensor::matrix({{1, 0}}));
  Var c = tape.constant(Tensor::matrix({{0}, {5}}));
  EXPECT_EQ(ad::matmul(r, c).value(), Tensor::matrix({{0}}));
  EXPECT_THROW(ad::matmul(B, r), DimensionError);
}

TEST(Matmul, GradientMatchesFiniteDifference) {
  std::mt19937_64 rng(1);
  ad::ParameterSet ps;
  auto& A = ps.add("A", random_tensor(Shape{3, 3}, rng));
  const Tensor B = random_tensor(Shape{3, 3}, rng);
  auto res = check_gradients(ps, [&](Tape& t) { return ad::sum(ad::matmul(t.param(A), t.constant(B))); }, 1e-5, 1e-6);
  EXPECT_EQ(res.failures, 0u) << res.worst_name << " rel " << res.worst_rel;
}

TEST(Elementwise, Definitions) {
  Tape tape;
  EXPECT_DOUBLE_EQ(ad::leaky_relu(tape.constant(Tensor::scalar(-1)), 0.2).value().item(), -0.2);
  EXPECT_DOUBLE_EQ(ad::leaky_relu(tape.constant(Tensor::scalar(3)), 0.2).value().item(), 3.0);
  EXPECT_DOUBLE_EQ(ad::sigmoid(tape.constant(Tensor::scalar(0))).value().item(), 0.5);
  EXPECT_DOUBLE_EQ(ad::tanh(tape.constant(Tensor::scalar(0))).value().item(), 0.0);
  EXPECT_DOUBLE_EQ(ad::relu(tape.constant(Tensor::scalar(-2))).value().item(), 0.0);
}

TEST(Elementwise, LeakyReluDerivativeAtZeroUsesPositiveBranch) {
  ad::ParameterSet ps;
  auto& x = ps.add("x", Tensor::scalar(0.0));
  Tape tape;
  tape.backward(ad::leaky_relu(tape.param(x), 0.2));
  EXPECT_DOUBLE_EQ(x.grad.item(), 1.0);
}

TEST(Concat, ValuesAndRoutedGradients) {
  ad::ParameterSet ps;
  auto& a = ps.add("a", Tensor::row({1, 2}));
  auto& b = ps.add("b", Tensor::row({3}));
  Tape tape;
  Var c = ad::concat(tape.param(a), tape.param(b));
  EXPECT_EQ(c.value(), Tensor::row({1, 2, 3}));
  Var w = tape.constant(Tensor::row({10, 20, 30}));
  tape.backward(ad::sum(ad::mul(c, w)));
  EXPECT_EQ(a.grad, Tensor::row({10, 20}));
  EXPECT_EQ(b.grad, Tensor::row({30}));
}

TEST(MaskedSoftmax, UniformForEqualScores) {
  Tape tape;
  const std::vector<std::uint8_t> mask = {1, 1, 1};
  Var s = ad::masked_softmax(tape.constant(Tensor::row({2.5, 2.5, 2.5})), mask);
  for (double v : s.value().data()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(MaskedSoftmax, MaskedEntryIsExactlyZeroWithoutOverflow) {
  Tape tape;
  const std::vector<std::uint8_t> mask = {1, 0};
  Var s = ad::masked_softmax(tape.constant(Tensor::row({0, 1000})), mask);
  EXPECT_EQ(s.value()[0], 1.0);
  EXPECT_EQ(s.value()[1], 0.0);
}

TEST(MaskedSoftmax, ClosedForm) {
  Tape tape;
  const std::vector<std::uint8_t> mask = {1, 1};
  Var s = ad::masked_softmax(tape.constant(Tensor::row({0, std::log(3.0)})), mask);
  EXPECT_NEAR(s.value()[0], 0.25, 1e-15);
  EXPECT_NEAR(s.value()[1], 0.75, 1e-15);
}

TEST(MaskedSoftmax, FullyMaskedRowIsRejected) {
  Tape tape;
  const std::vector<std::uint8_t> mask = {0, 0};
  EXPECT_THROW(ad::masked_softmax(tape.constant(Tensor::row({1, 2})), mask), UsageError);
}

TEST(Backward, SumAndSquare) {
  ad::ParameterSet ps;
  auto& x = ps.add("x", Tensor::row({1, 2, 3}));
  auto& y = ps.add("y", Tensor::scalar(3));
  {
    Tape tape;
    tape.backward(ad::sum(tape.param(x)));
  }
  EXPECT_EQ(x.grad, Tensor::row({1, 1, 1}));
  {
    Tape tape;
    Var v = tape.param(y);
    tape.backward(ad::mul(v, v));
  }
  EXPECT_DOUBLE_EQ(y.grad.item(), 6.0);
}

TEST(Backward, NonScalarLossIsUsageError) {
  Tape tape;
  Var v = tape.constant(Tensor::row({1, 2}));
  EXPECT_THROW(tape.backward(v), UsageError);
}

TEST(Backward, GradientsAccumulateAcrossCalls) {
  ad::ParameterSet ps;
  auto& x = ps.add("x", Tensor::row({1, 2}));
  for (int k = 0; k < 2; ++k) {
    Tape tape;
    tape.backward(ad::sum(tape.param(x)));
  }
  EXPECT_EQ(x.grad, Tensor::row({2, 2}));
  ps.zero_grad();
  EXPECT_EQ(x.grad, Tensor::row({0, 0}));
}

TEST(Backward, ReusedVariableSumsContributions) {
  ad::ParameterSet ps;
  auto& x = ps.add("x", Tensor::scalar(2));
  Tape tape;
  Var v = tape.param(x);
  // f = x*x + 3x  ->  f' = 2x + 3 = 7
  tape.backward(ad::add(ad::mul(v, v), ad::scale(v, 3)));
  EXPECT_DOUBLE_EQ(x.grad.item(), 7.0);
}

TEST(ParameterSet, DuplicateNamesRejected) {
  ad::ParameterSet ps;
  ps.add("w", Tensor::scalar(1));
  EXPECT_THROW(ps.add("w", Tensor::scalar(2)), UsageError);
  EXPECT_EQ(ps.scalar_count(), 1u);
}

// Every differentiable op composed once, checked against central differences.
TEST(GradCheck, EveryOperation) {
  std::mt19937_64 rng(7);
  ad::ParameterSet ps;
  auto& A = ps.add("A", random_tensor(Shape{3, 4}, rng));
  auto& B = ps.add("B", random_tensor(Shape{4, 2}, rng));
  auto& C = ps.add("C", random_tensor(Shape{5, 4}, rng));
  auto& D = ps.add("D", random_tensor(Shape{3, 2}, rng));
  auto& s = ps.add("s", random_tensor(Shape{3, 3}, rng, -3, 3));
  const std::vector<std::uint8_t> mask = {1, 0, 1, 1, 1, 0, 0, 1, 1};

  auto loss = [&](Tape& t) {
    Var a = t.param(A), b = t.param(B), c = t.param(C), d = t.param(D);
    Var ab = ad::matmul(a, b);                          // 3x2
    Var act = ad::matmul_nt(a, c);                      // 3x5
    Var x = ad::add(ab, ad::sub(d, ad::mul(d, d)));     // 3x2
    Var y = ad::concat(ad::tanh(x), ad::sigmoid(act));  // 3x7
    Var z = ad::leaky_relu(ad::scale(y, 1.7), 0.2);
    Var zt = ad::transpose(z);                          // 7x3
    Var r = ad::reshape(zt, Shape{3, 7});
    Var rows = ad::concat_rows({ad::slice_rows(r, 0, 1), ad::slice_rows(r, 2, 3)});
    Var att = ad::masked_softmax(t.param(s), mask);
    Var mixed = ad::matmul(att, ad::relu(ad::add(x, t.constant(Tensor(Shape{3, 2}, 0.3)))));
    Var fl = ad::flatten(mixed);
    return ad::add(ad::sum(ad::mul(rows, rows)), ad::sum(ad::mul(fl, fl)));
  };
  auto res = check_gradients(ps, loss);
  EXPECT_EQ(res.failures, 0u) << res.worst_name << " rel " << res.worst_rel;
  EXPECT_EQ(res.checked, ps.scalar_count());
}

TEST(GradCheck, Linearity) {
  // grad of (2f + 3g) = 2 grad f + 3 grad g
  std::mt19937_64 rng(3);
  ad::ParameterSet ps;
  auto& W = ps.add("W", random_tensor(Shape{2, 3}, rng));
  const Tensor x = random_tensor(Shape{3, 1}, rng);
  auto f = [&](Tape& t) { return ad::sum(ad::tanh(ad::matmul(t.param(W), t.constant(x)))); };
  auto g = [&](Tape& t) { return ad::sum(ad::sigmoid(ad::matmul(t.param(W), t.constant(x)))); };
  auto grad_of = [&](auto fn) {
    ps.zero_grad();
    Tape t;
    t.backward(fn(t));
    return W.grad;
  };
  const Tensor gf = grad_of(f), gg = grad_of(g);
  const Tensor gc = grad_of([&](Tape& t) { return ad::add(ad::scale(f(t), 2), ad::scale(g(t), 3)); });
  for (std::size_t i = 0; i < gc.size(); ++i) EXPECT_NEAR(gc[i], 2 * gf[i] + 3 * gg[i], 1e-14);
}

TEST(Tape, ForwardIsDeterministic) {
  std::mt19937_64 rng(11);
  const Tensor a = random_tensor(Shape{8, 8}, rng), b = random_tensor(Shape{8, 8}, rng);
  Tape t1, t2;
  EXPECT_EQ(ad::matmul(t1.constant(a), t1.constant(b)).value(), ad::matmul(t2.constant(a), t2.constant(b)).value());
}

}  // namespace
}  // namespace stdgat
