// Copyright 2026 The stdgat Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Dense reverse-mode differentiation over double-precision tensors.
//
// A Tape records every operation executed during one forward pass. Values
// are held by the tape; Var is a cheap handle (tape pointer + node id).
// Parameters live outside the tape so they survive across passes; binding a
// Parameter to a tape creates a leaf whose gradient is accumulated into
// Parameter::grad when Tape::backward runs.
//
// Tensors are rank 0, 1 or 2. Matrix operations require rank 2; a row
// vector is a 1 x n matrix.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "stdgat/errors.hpp"

namespace stdgat::ad {

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

inline std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

class Tensor {
 public:
  Tensor() : shape_{}, data_(1, 0.0) {}
  explicit Tensor(Shape shape, double fill = 0.0)
      : shape_(std::move(shape)), data_(numel(shape_), fill) {}
  Tensor(Shape shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != numel(shape_)) {
      throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                           " does not match shape " + shape_str(shape_));
    }
  }

  static Tensor scalar(double v) { return Tensor(Shape{}, std::vector<double>{v}); }
  static Tensor vector(std::vector<double> v) {
    const std::size_t n = v.size();
    return Tensor(Shape{n}, std::move(v));
  }
  static Tensor row(std::vector<double> v) {
    const std::size_t n = v.size();
    return Tensor(Shape{1, n}, std::move(v));
  }
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
      if (row.size() != c) throw DimensionError("ragged matrix literal");
      data.insert(data.end(), row.begin(), row.end());
    }
    return Tensor(Shape{r, c}, std::move(data));
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t rows() const { return rank() == 2 ? shape_[0] : 1; }
  std::size_t cols() const {
    if (rank() == 0) return 1;
    return shape_.back();
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::vector<double>& storage() noexcept { return data_; }
  const std::vector<double>& storage() const noexcept { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  double item() const {
    if (data_.size() != 1) throw DimensionError("item() on non-scalar " + shape_str(shape_));
    return data_[0];
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// A learnable tensor plus its gradient accumulator.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}
  void zero_grad() { grad.fill(0.0); }
};

// Ordered, named collection of parameters. References returned by add()
// stay valid as more parameters are added.
class ParameterSet {
 public:
  Parameter& add(std::string name, Tensor value) {
    for (const auto& p : params_) {
      if (p.name == name) throw UsageError("duplicate parameter name " + name);
    }
    params_.emplace_back(std::move(name), std::move(value));
    return params_.back();
  }

  std::size_t size() const noexcept { return params_.size(); }
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  Parameter& at(const std::string& name) {
    for (auto& p : params_) {
      if (p.name == name) return p;
    }
    throw UsageError("no parameter named " + name);
  }
  const Parameter& at(const std::string& name) const {
    return const_cast<ParameterSet*>(this)->at(name);
  }

  void zero_grad() {
    for (auto& p : params_) p.zero_grad();
  }
  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
  }

 private:
  std::deque<Parameter> params_;
};

class Tape;

struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value) {
    Node n;
    n.value = std::move(value);
    return push(std::move(n));
  }

  // Leaf bound to a parameter; repeated binds within one tape share a node.
  Var param(Parameter& p) {
    if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) {
      return Var{this, it->second};
    }
    Node n;
    n.ref = &p.value;
    n.param = &p;
    n.requires_grad = true;
    Var v = push(std::move(n));
    param_nodes_.emplace(&p, v.id);
    return v;
  }

  // Records an op output. `inputs` decide whether the node needs a gradient.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
    Node n;
    n.value = std::move(value);
    for (const Var& in : inputs) {
      if (nodes_[in.id].requires_grad) n.requires_grad = true;
    }
    if (n.requires_grad) n.backward = std::move(fn);
    return push(std::move(n));
  }
  Var record(Tensor value, const std::vector<Var>& inputs, BackwardFn fn) {
    Node n;
    n.value = std::move(value);
    for (const Var& in : inputs) {
      if (nodes_[in.id].requires_grad) n.requires_grad = true;
    }
    if (n.requires_grad) n.backward = std::move(fn);
    return push(std::move(n));
  }

  const Tensor& value(std::size_t id) const {
    const Node& n = nodes_[id];
    return n.ref ? *n.ref : n.value;
  }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  // Gradient of node `id`, materialized as zeros on first access.
  Tensor& grad(std::size_t id) {
    Node& n = nodes_[id];
    if (!n.has_grad) {
      n.grad = Tensor(value(id).shape());
      n.has_grad = true;
    }
    return n.grad;
  }

  std::size_t size() const noexcept { return nodes_.size(); }

  // Propagates d(loss)/d(node) to every node in reverse execution order and
  // adds parameter gradients into Parameter::grad.
  void backward(Var loss) {
    if (loss.tape != this) throw UsageError("loss belongs to another tape");
    if (value(loss.id).size() != 1) {
      throw UsageError("backward requires a scalar loss, got " +
                       shape_str(value(loss.id).shape()));
    }
    for (auto& n : nodes_) {
      n.has_grad = false;
      n.grad = Tensor();
    }
    grad(loss.id)[0] = 1.0;
    for (std::size_t id = loss.id + 1; id-- > 0;) {
      Node& n = nodes_[id];
      if (!n.has_grad || !n.requires_grad) continue;
      if (n.param != nullptr) {
        auto dst = n.param->grad.data();
        auto src = n.grad.data();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
      } else if (n.backward) {
        n.backward(*this, id);
      }
    }
  }

 private:
  struct Node {
    Tensor value;
    const Tensor* ref = nullptr;
    Parameter* param = nullptr;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Var push(Node n) {
    nodes_.push_back(std::move(n));
    return Var{this, nodes_.size() - 1};
  }

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
};

inline const Tensor& Var::value() const { return tape->value(id); }

namespace detail {

inline void require_same_tape(const Var& a, const Var& b) {
  if (a.tape != b.tape) throw UsageError("operands recorded on different tapes");
}

inline void require_matrix(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + " expects a matrix, got " + shape_str(t.shape()));
  }
}

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
  }
}

// out(m x n) += a(m x k) * b(k x n)
inline void gemm_nn(const double* a, const double* b, double* out, std::size_t m,
                    std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = out + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
}

// out(m x n) += a(m x k) * b(n x k)^T
inline void gemm_nt(const double* a, const double* b, double* out, std::size_t m,
                    std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = b + j * k;
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
      out[i * n + j] += s;
    }
  }
}

// out(k x n) += a(m x k)^T * b(m x n)
inline void gemm_tn(const double* a, const double* b, double* out, std::size_t m,
                    std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      double* orow = out + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
}

template <typename Fwd, typename Deriv>
Var unary(const Var& x, Fwd fwd, Deriv deriv) {
  const Tensor& in = x.value();
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = fwd(in[i]);
  const std::size_t xid = x.id;
  return x.tape->record(std::move(out), {x}, [xid, deriv](Tape& t, std::size_t self) {
    if (!t.requires_grad(xid)) return;
    const Tensor& g = t.grad(self);
    const Tensor& xin = t.value(xid);
    const Tensor& y = t.value(self);
    Tensor& gx = t.grad(xid);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * deriv(xin[i], y[i]);
  });
}

}  // namespace detail

// a(m x k) * b(k x n). Backward: dA = dC B^T, dB = A^T dC.
inline Var matmul(const Var& a, const Var& b) {
  detail::require_same_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  detail::require_matrix(av, "matmul");
  detail::require_matrix(bv, "matmul");
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  if (bv.rows() != k) {
    throw DimensionError("matmul: inner dimensions differ " + shape_str(av.shape()) + " x " +
                         shape_str(bv.shape()));
  }
  Tensor out(Shape{m, n});
  detail::gemm_nn(av.data().data(), bv.data().data(), out.data().data(), m, k, n);
  const std::size_t aid = a.id, bid = b.id;
  return a.tape->record(std::move(out), {a, b}, [aid, bid, m, k, n](Tape& t, std::size_t self) {
    const double* g = t.grad(self).data().data();
    if (t.requires_grad(aid)) {
      detail::gemm_nt(g, t.value(bid).data().data(), t.grad(aid).data().data(), m, n, k);
    }
    if (t.requires_grad(bid)) {
      detail::gemm_tn(t.value(aid).data().data(), g, t.grad(bid).data().data(), m, k, n);
    }
  });
}

// a(m x k) * b(n x k)^T, without materializing the transpose.
inline Var matmul_nt(const Var& a, const Var& b) {
  detail::require_same_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  detail::require_matrix(av, "matmul_nt");
  detail::require_matrix(bv, "matmul_nt");
  const std::size_t m = av.rows(), k = av.cols(), n = bv.rows();
  if (bv.cols() != k) {
    throw DimensionError("matmul_nt: inner dimensions differ " + shape_str(av.shape()) +
                         " x " + shape_str(bv.shape()) + "^T");
  }
  Tensor out(Shape{m, n});
  detail::gemm_nt(av.data().data(), bv.data().data(), out.data().data(), m, k, n);
  const std::size_t aid = a.id, bid = b.id;
  return a.tape->record(std::move(out), {a, b}, [aid, bid, m, k, n](Tape& t, std::size_t self) {
    const double* g = t.grad(self).data().data();
    if (t.requires_grad(aid)) {
      detail::gemm_nn(g, t.value(bid).data().data(), t.grad(aid).data().data(), m, n, k);
    }
    if (t.requires_grad(bid)) {
      detail::gemm_tn(g, t.value(aid).data().data(), t.grad(bid).data().data(), m, n, k);
    }
  });
}

inline Var add(const Var& a, const Var& b) {
  detail::require_same_tape(a, b);
  detail::require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const std::size_t aid = a.id, bid = b.id;
  return a.tape->record(std::move(out), {a, b}, [aid, bid](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    for (std::size_t in : {aid, bid}) {
      if (!t.requires_grad(in)) continue;
      Tensor& gi = t.grad(in);
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
    }
  });
}

inline Var sub(const Var& a, const Var& b) {
  detail::require_same_tape(a, b);
  detail::require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  const std::size_t aid = a.id, bid = b.id;
  return a.tape->record(std::move(out), {a, b}, [aid, bid](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (t.requires_grad(aid)) {
      Tensor& ga = t.grad(aid);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (t.requires_grad(bid)) {
      Tensor& gb = t.grad(bid);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

// Hadamard product.
inline Var mul(const Var& a, const Var& b) {
  detail::require_same_tape(a, b);
  detail::require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const std::size_t aid = a.id, bid = b.id;
  return a.tape->record(std::move(out), {a, b}, [aid, bid](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (t.requires_grad(aid)) {
      Tensor& ga = t.grad(aid);
      const Tensor& bv2 = t.value(bid);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv2[i];
    }
    if (t.requires_grad(bid)) {
      Tensor& gb = t.grad(bid);
      const Tensor& av2 = t.value(aid);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av2[i];
    }
  });
}

inline Var scale(const Var& x, double c) {
  return detail::unary(
      x, [c](double v) { return c * v; }, [c](double, double) { return c; });
}

// Negative inputs are multiplied by `slope`; the derivative at 0 is 1.
inline Var leaky_relu(const Var& x, double slope = 0.2) {
  return detail::unary(
      x, [slope](double v) { return v >= 0.0 ? v : slope * v; },
      [slope](double v, double) { return v >= 0.0 ? 1.0 : slope; });
}

inline Var relu(const Var& x) { return leaky_relu(x, 0.0); }

inline Var tanh(const Var& x) {
  return detail::unary(
      x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

inline double sigmoid_value(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

inline Var sigmoid(const Var& x) {
  return detail::unary(
      x, [](double v) { return sigmoid_value(v); },
      [](double, double y) { return y * (1.0 - y); });
}

// Concatenation along the last axis. Matrices must agree on row count.
inline Var concat(const Var& a, const Var& b) {
  detail::require_same_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != bv.rank() || av.rank() == 0 || av.rows() != bv.rows()) {
    throw DimensionError("concat: incompatible shapes " + shape_str(av.shape()) + " and " +
                         shape_str(bv.shape()));
  }
  const std::size_t rows = av.rows(), ca = av.cols(), cb = bv.cols();
  Shape shape = av.shape();
  shape.back() = ca + cb;
  Tensor out(shape);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(av.data().data() + r * ca, ca, out.data().data() + r * (ca + cb));
    std::copy_n(bv.data().data() + r * cb, cb, out.data().data() + r * (ca + cb) + ca);
  }
  const std::size_t aid = a.id, bid = b.id;
  return a.tape->record(std::move(out), {a, b}, [aid, bid, rows, ca, cb](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (t.requires_grad(aid)) {
      Tensor& ga = t.grad(aid);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < ca; ++c) ga[r * ca + c] += g[r * (ca + cb) + c];
    }
    if (t.requires_grad(bid)) {
      Tensor& gb = t.grad(bid);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cb; ++c) gb[r * cb + c] += g[r * (ca + cb) + ca + c];
    }
  });
}

// Stacks row vectors (1 x n matrices or length-n vectors) or matrices with a
// common column count along the first axis.
inline Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw UsageError("concat_rows: no inputs");
  Tape* tape = parts.front().tape;
  const std::size_t cols = parts.front().value().cols();
  std::size_t rows = 0;
  std::vector<std::size_t> offsets;
  for (const Var& p : parts) {
    if (p.tape != tape) throw UsageError("operands recorded on different tapes");
    const Tensor& v = p.value();
    if (v.rank() == 0 || v.cols() != cols) {
      throw DimensionError("concat_rows: column count mismatch at " + shape_str(v.shape()));
    }
    offsets.push_back(rows * cols);
    rows += v.rows();
  }
  Tensor out(Shape{rows, cols});
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const Tensor& v = parts[i].value();
    std::copy(v.data().begin(), v.data().end(), out.data().begin() + offsets[i]);
  }
  std::vector<std::size_t> ids;
  for (const Var& p : parts) ids.push_back(p.id);
  return tape->record(std::move(out), parts, [ids, offsets](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (!t.requires_grad(ids[i])) continue;
      Tensor& gi = t.grad(ids[i]);
      for (std::size_t j = 0; j < gi.size(); ++j) gi[j] += g[offsets[i] + j];
    }
  });
}

inline Var transpose(const Var& x) {
  const Tensor& in = x.value();
  detail::require_matrix(in, "transpose");
  const std::size_t r = in.rows(), c = in.cols();
  Tensor out(Shape{c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out(j, i) = in(i, j);
  const std::size_t xid = x.id;
  return x.tape->record(std::move(out), {x}, [xid, r, c](Tape& t, std::size_t self) {
    if (!t.requires_grad(xid)) return;
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad(xid);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) gx[i * c + j] += g[j * r + i];
  });
}

inline Var reshape(const Var& x, Shape shape) {
  const Tensor& in = x.value();
  if (numel(shape) != in.size()) {
    throw DimensionError("reshape: " + shape_str(in.shape()) + " -> " + shape_str(shape));
  }
  Tensor out(std::move(shape), in.storage());
  const std::size_t xid = x.id;
  return x.tape->record(std::move(out), {x}, [xid](Tape& t, std::size_t self) {
    if (!t.requires_grad(xid)) return;
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad(xid);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

// Row-major flattening to a 1 x n row vector.
inline Var flatten(const Var& x) { return reshape(x, Shape{1, x.value().size()}); }

inline Var sum(const Var& x) {
  const Tensor& in = x.value();
  double s = 0.0;
  for (double v : in.data()) s += v;
  const std::size_t xid = x.id;
  return x.tape->record(Tensor::scalar(s), {x}, [xid](Tape& t, std::size_t self) {
    if (!t.requires_grad(xid)) return;
    const double g = t.grad(self)[0];
    Tensor& gx = t.grad(xid);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
  });
}

// Rows [begin, end) of a matrix, or elements [begin, end) of a vector.
inline Var slice_rows(const Var& x, std::size_t begin, std::size_t end) {
  const Tensor& in = x.value();
  if (in.rank() == 0 || begin > end) throw DimensionError("slice_rows: bad range");
  const std::size_t stride = in.rank() == 2 ? in.cols() : 1;
  const std::size_t extent = in.rank() == 2 ? in.rows() : in.size();
  if (end > extent) {
    throw DimensionError("slice_rows: range end " + std::to_string(end) + " exceeds " +
                         std::to_string(extent));
  }
  Shape shape = in.shape();
  shape[0] = end - begin;
  std::vector<double> data(in.data().begin() + begin * stride, in.data().begin() + end * stride);
  Tensor out(std::move(shape), std::move(data));
  const std::size_t xid = x.id;
  const std::size_t offset = begin * stride;
  return x.tape->record(std::move(out), {x}, [xid, offset](Tape& t, std::size_t self) {
    if (!t.requires_grad(xid)) return;
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad(xid);
    for (std::size_t i = 0; i < g.size(); ++i) gx[offset + i] += g[i];
  });
}

// Row-wise softmax restricted to entries whose mask byte is nonzero. Masked
// entries are exactly 0. `mask` has one byte per element of `scores`; every
// row needs at least one unmasked entry.
inline Var masked_softmax(const Var& scores, std::span<const std::uint8_t> mask) {
  const Tensor& in = scores.value();
  if (in.rank() == 0) throw DimensionError("masked_softmax: scalar input");
  if (mask.size() != in.size()) {
    throw DimensionError("masked_softmax: mask length " + std::to_string(mask.size()) +
                         " vs " + std::to_string(in.size()) + " scores");
  }
  const std::size_t rows = in.rows(), cols = in.cols();
  Tensor out(in.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* s = in.data().data() + r * cols;
    const std::uint8_t* m = mask.data() + r * cols;
    double mx = -INFINITY;
    for (std::size_t c = 0; c < cols; ++c)
      if (m[c]) mx = std::max(mx, s[c]);
    if (mx == -INFINITY) {
      throw UsageError("masked_softmax: row " + std::to_string(r) + " is fully masked");
    }
    double z = 0.0;
    double* o = out.data().data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) {
      o[c] = m[c] ? std::exp(s[c] - mx) : 0.0;
      z += o[c];
    }
    for (std::size_t c = 0; c < cols; ++c) o[c] /= z;
  }
  const std::size_t xid = scores.id;
  return scores.tape->record(std::move(out), {scores}, [xid, rows, cols](Tape& t, std::size_t self) {
    if (!t.requires_grad(xid)) return;
    const Tensor& g = t.grad(self);
    const Tensor& y = t.value(self);
    Tensor& gx = t.grad(xid);
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += g[r * cols + c] * y[r * cols + c];
      for (std::size_t c = 0; c < cols; ++c) {
        const std::size_t i = r * cols + c;
        gx[i] += y[i] * (g[i] - dot);
      }
    }
  });
}

}  // namespace stdgat::ad
