// Copyright 2026 The Lipsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lipsynth/graph.hpp"

#include <Eigen/Core>
#include <cmath>
#include <cstring>

namespace lipsynth {

const Tensor& Var::value() const { return graph_->node(id_).value; }
bool Var::requires_grad() const { return graph_->node(id_).requires_grad; }

Var Graph::constant(Tensor value) {
  nodes_.push_back(Node{nullptr, {}, std::move(value), false});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Graph::leaf(Tensor value) {
  nodes_.push_back(Node{nullptr, {}, std::move(value), true});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Graph::add_op(std::shared_ptr<const Op> op, const std::vector<Var>& inputs, Tensor value) {
  bool rg = false;
  std::vector<int> ids;
  ids.reserve(inputs.size());
  for (const Var& v : inputs) {
    check(v.valid() && v.graph() == this, ErrorCategory::kInternal,
          std::string("op input from wrong graph in ") + op->name());
    rg = rg || v.requires_grad();
    ids.push_back(v.id());
  }
  nodes_.push_back(Node{std::move(op), std::move(ids), std::move(value), rg});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

std::vector<Var> Graph::gradients(Var output, const std::vector<Var>& wrt) {
  check(output.valid() && output.graph() == this, ErrorCategory::kInternal,
        "gradients: invalid output var");
  check(output.value().numel() == 1, ErrorCategory::kInternal,
        "gradients: output must be scalar, got " + shape_str(output.shape()));
  const int out_id = output.id();
  std::vector<Var> grad(static_cast<size_t>(out_id) + 1);
  grad[static_cast<size_t>(out_id)] = constant(Tensor::full(output.value().shape(), 1.0));

  for (int id = out_id; id >= 0; --id) {
    Var g = grad[static_cast<size_t>(id)];
    if (!g.valid()) continue;
    // Copy metadata before vjp() appends nodes (vector may reallocate).
    std::shared_ptr<const Op> op = nodes_[static_cast<size_t>(id)].op;
    std::vector<int> input_ids = nodes_[static_cast<size_t>(id)].inputs;
    if (!op || !nodes_[static_cast<size_t>(id)].requires_grad) continue;

    std::vector<Var> inputs;
    inputs.reserve(input_ids.size());
    for (int i : input_ids) inputs.emplace_back(this, i);
    std::vector<Var> vjps = op->vjp(*this, inputs, Var(this, id), g);
    check(vjps.size() == input_ids.size(), ErrorCategory::kInternal,
          std::string("vjp arity mismatch in ") + op->name());
    for (size_t s = 0; s < input_ids.size(); ++s) {
      int in_id = input_ids[s];
      if (!nodes_[static_cast<size_t>(in_id)].requires_grad) continue;
      if (!vjps[s].valid()) continue;
      check(vjps[s].shape() == nodes_[static_cast<size_t>(in_id)].value.shape(),
            ErrorCategory::kInternal, std::string("vjp shape mismatch in ") + op->name());
      Var& slot = grad[static_cast<size_t>(in_id)];
      slot = slot.valid() ? ops::add(slot, vjps[s]) : vjps[s];
    }
  }

  std::vector<Var> out;
  out.reserve(wrt.size());
  for (const Var& w : wrt) {
    check(w.valid() && w.graph() == this, ErrorCategory::kInternal, "gradients: invalid wrt var");
    Var g = w.id() <= out_id ? grad[static_cast<size_t>(w.id())] : Var();
    out.push_back(g.valid() ? g : constant(Tensor::zeros(w.value().shape())));
  }
  return out;
}

namespace ops {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_same_shape(const Var& a, const Var& b, const char* who) {
  check(a.value().same_shape(b.value()), ErrorCategory::kShape,
        std::string(who) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
            shape_str(b.shape()));
}

template <typename F>
Tensor ew_unary(const Tensor& a, F f) {
  Tensor out(a.shape());
  const double* x = a.data();
  double* y = out.data();
  const int64_t n = a.numel();
  for (int64_t i = 0; i < n; ++i) y[i] = f(x[i]);
  return out;
}

template <typename F>
Tensor ew_binary(const Tensor& a, const Tensor& b, F f) {
  Tensor out(a.shape());
  const double* x = a.data();
  const double* y = b.data();
  double* z = out.data();
  const int64_t n = a.numel();
  for (int64_t i = 0; i < n; ++i) z[i] = f(x[i], y[i]);
  return out;
}

// ---- elementwise ops ---------------------------------------------------

struct AddOp : Op {
  const char* name() const override { return "add"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>&, Var, Var g) const override {
    return {g, g};
  }
};

struct SubOp : Op {
  const char* name() const override { return "sub"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>&, Var, Var g) const override {
    return {g, neg(g)};
  }
};

struct MulOp : Op {
  const char* name() const override { return "mul"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>& in, Var, Var g) const override {
    return {mul(g, in[1]), mul(g, in[0])};
  }
};

struct DivOp : Op {
  const char* name() const override { return "div"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>& in, Var out, Var g) const override {
    // d(a/b)/da = 1/b, d(a/b)/db = -a/b^2 = -out/b
    return {div(g, in[1]), neg(mul(g, div(out, in[1])))};
  }
};

struct NegOp : Op {
  const char* name() const override { return "neg"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>&, Var, Var g) const override {
    return {neg(g)};
  }
};

struct ScaleOp : Op {
  explicit ScaleOp(double c) : c_(c) {}
  const char* name() const override { return "scale"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>&, Var, Var g) const override {
    return {scale(g, c_)};
  }
  double c_;
};

struct AddScalarOp : Op {
  explicit AddScalarOp(double c) : c_(c) {}
  const char* name() const override { return "add_scalar"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>&, Var, Var g) const override {
    return {g};
  }
  double c_;
};

struct AbsOp : Op {
  const char* name() const override { return "abs"; }
  std::vector<Var> vjp(Graph& g_, const std::vector<Var>& in, Var, Var g) const override {
    Tensor sign = ew_unary(in[0].value(), [](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); });
    return {mul(g, g_.constant(std::move(sign)))};
  }
};

struct SqrtOp : Op {
  const char* name() const override { return "sqrt"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>&, Var out, Var g) const override {
    return {div(g, scale(out, 2.0))};
  }
};

struct LogOp : Op {
  const char* name() const override { return "log"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>& in, Var, Var g) const override {
    return {div(g, in[0])};
  }
};

struct TanhOp : Op {
  const char* name() const override { return "tanh"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>&, Var out, Var g) const override {
    return {mul(g, add_scalar(neg(square(out)), 1.0))};
  }
};

struct SigmoidOp : Op {
  const char* name() const override { return "sigmoid"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>&, Var out, Var g) const override {
    return {mul(g, mul(out, add_scalar(neg(out), 1.0)))};
  }
};

struct ReluOp : Op {
  const char* name() const override { return "relu"; }
  std::vector<Var> vjp(Graph& g_, const std::vector<Var>& in, Var, Var g) const override {
    Tensor mask = ew_unary(in[0].value(), [](double v) { return v > 0 ? 1.0 : 0.0; });
    return {mul(g, g_.constant(std::move(mask)))};
  }
};

struct LeakyReluOp : Op {
  explicit LeakyReluOp(double slope) : slope_(slope) {}
  const char* name() const override { return "leaky_relu"; }
  std::vector<Var> vjp(Graph& g_, const std::vector<Var>& in, Var, Var g) const override {
    double s = slope_;
    Tensor mask = ew_unary(in[0].value(), [s](double v) { return v > 0 ? 1.0 : s; });
    return {mul(g, g_.constant(std::move(mask)))};
  }
  double slope_;
};

struct ClampMinOp : Op {
  explicit ClampMinOp(double floor) : floor_(floor) {}
  const char* name() const override { return "clamp_min"; }
  std::vector<Var> vjp(Graph& g_, const std::vector<Var>& in, Var, Var g) const override {
    double f = floor_;
    Tensor mask = ew_unary(in[0].value(), [f](double v) { return v > f ? 1.0 : 0.0; });
    return {mul(g, g_.constant(std::move(mask)))};
  }
  double floor_;
};

struct SquareOp : Op {
  const char* name() const override { return "square"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>& in, Var, Var g) const override {
    return {mul(g, scale(in[0], 2.0))};
  }
};

// ---- shape ops ----------------------------------------------------------

struct ReshapeOp : Op {
  const char* name() const override { return "reshape"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>& in, Var, Var g) const override {
    return {reshape(g, in[0].shape())};
  }
};

struct Transpose2dOp : Op {
  const char* name() const override { return "transpose2d"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>&, Var, Var g) const override {
    return {transpose2d(g)};
  }
};

struct Transpose01Op : Op {
  const char* name() const override { return "transpose01"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>&, Var, Var g) const override {
    return {transpose01(g)};
  }
};

struct SliceLastOp : Op {
  SliceLastOp(int64_t start, int64_t len) : start_(start), len_(len) {}
  const char* name() const override { return "slice_last"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>& in, Var, Var g) const override {
    return {embed_last(g, start_, in[0].shape().back())};
  }
  int64_t start_, len_;
};

struct EmbedLastOp : Op {
  EmbedLastOp(int64_t start, int64_t total) : start_(start), total_(total) {}
  const char* name() const override { return "embed_last"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>& in, Var, Var g) const override {
    return {slice_last(g, start_, in[0].shape().back())};
  }
  int64_t start_, total_;
};

struct Select0Op : Op {
  explicit Select0Op(int64_t index) : index_(index) {}
  const char* name() const override { return "select0"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>& in, Var, Var g) const override {
    return {embed0(g, index_, in[0].shape()[0])};
  }
  int64_t index_;
};

struct Embed0Op : Op {
  Embed0Op(int64_t index, int64_t dim0) : index_(index), dim0_(dim0) {}
  const char* name() const override { return "embed0"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>&, Var, Var g) const override {
    return {select0(g, index_)};
  }
  int64_t index_, dim0_;
};

struct Stack0Op : Op {
  const char* name() const override { return "stack0"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>& in, Var, Var g) const override {
    std::vector<Var> out;
    out.reserve(in.size());
    for (size_t i = 0; i < in.size(); ++i) out.push_back(select0(g, static_cast<int64_t>(i)));
    return out;
  }
};

struct GatherLastOp : Op {
  explicit GatherLastOp(std::shared_ptr<const std::vector<int64_t>> idx) : idx_(std::move(idx)) {}
  const char* name() const override { return "gather_last"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>& in, Var, Var g) const override {
    return {scatter_add_last(g, idx_, in[0].shape().back())};
  }
  std::shared_ptr<const std::vector<int64_t>> idx_;
};

struct ScatterAddLastOp : Op {
  ScatterAddLastOp(std::shared_ptr<const std::vector<int64_t>> idx, int64_t total)
      : idx_(std::move(idx)), total_(total) {}
  const char* name() const override { return "scatter_add_last"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>&, Var, Var g) const override {
    return {gather_last(g, idx_)};
  }
  std::shared_ptr<const std::vector<int64_t>> idx_;
  int64_t total_;
};

// Index map for reflection padding (no edge repeat, numpy 'reflect' style).
int64_t reflect_index(int64_t j, int64_t len) {
  if (len == 1) return 0;
  int64_t period = 2 * (len - 1);
  int64_t m = j % period;
  if (m < 0) m += period;
  return m < len ? m : period - m;
}

struct ReflectPadLastOp : Op {
  ReflectPadLastOp(int64_t left, int64_t right) : left_(left), right_(right) {}
  const char* name() const override { return "reflect_pad_last"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>&, Var, Var g) const override {
    return {reflect_pad_adjoint_last(g, left_, right_)};
  }
  int64_t left_, right_;
};

struct ReflectPadAdjointLastOp : Op {
  ReflectPadAdjointLastOp(int64_t left, int64_t right) : left_(left), right_(right) {}
  const char* name() const override { return "reflect_pad_adjoint_last"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>&, Var, Var g) const override {
    return {reflect_pad_last(g, left_, right_)};
  }
  int64_t left_, right_;
};

// ---- reductions / broadcast ---------------------------------------------

Shape all_ones_shape(const Shape& s) { return Shape(s.size(), 1); }

struct ReduceSumAllOp : Op {
  const char* name() const override { return "reduce_sum_all"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>& in, Var, Var g) const override {
    return {broadcast_from(reshape(g, all_ones_shape(in[0].shape())), in[0].shape())};
  }
};

struct ReduceMeanAllOp : Op {
  const char* name() const override { return "reduce_mean_all"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>& in, Var, Var g) const override {
    double inv = 1.0 / static_cast<double>(in[0].value().numel());
    return {scale(broadcast_from(reshape(g, all_ones_shape(in[0].shape())), in[0].shape()), inv)};
  }
};

struct ReduceSumKeepdimOp : Op {
  explicit ReduceSumKeepdimOp(std::vector<int> axes) : axes_(std::move(axes)) {}
  const char* name() const override { return "reduce_sum_keepdim"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>& in, Var, Var g) const override {
    return {broadcast_from(g, in[0].shape())};
  }
  std::vector<int> axes_;
};

struct ReduceMeanKeepdimOp : Op {
  ReduceMeanKeepdimOp(std::vector<int> axes, double inv_count)
      : axes_(std::move(axes)), inv_count_(inv_count) {}
  const char* name() const override { return "reduce_mean_keepdim"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>& in, Var, Var g) const override {
    return {scale(broadcast_from(g, in[0].shape()), inv_count_)};
  }
  std::vector<int> axes_;
  double inv_count_;
};

struct BroadcastFromOp : Op {
  const char* name() const override { return "broadcast_from"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>& in, Var out, Var g) const override {
    const Shape& small = in[0].shape();
    const Shape& big = out.shape();
    std::vector<int> axes(small.size(), 0);
    for (size_t i = 0; i < small.size(); ++i) {
      if (small[i] == 1 && big[i] > 1) axes[i] = 1;
    }
    return {reduce_sum_keepdim(g, axes)};
  }
};

struct MatmulOp : Op {
  const char* name() const override { return "matmul"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>& in, Var, Var g) const override {
    return {matmul(g, transpose2d(in[1])), matmul(transpose2d(in[0]), g)};
  }
};

// Iterates a dense multi-index over `big`, mapping to an index into `small`
// where dimensions of size 1 are pinned. Used by broadcast/reduce kernels.
struct BroadcastIter {
  explicit BroadcastIter(const Shape& big, const Shape& small) {
    int r = static_cast<int>(big.size());
    strides_small.assign(static_cast<size_t>(r), 0);
    dims = big;
    int64_t s = 1;
    for (int i = r - 1; i >= 0; --i) {
      strides_small[static_cast<size_t>(i)] = (small[static_cast<size_t>(i)] == 1) ? 0 : s;
      s *= small[static_cast<size_t>(i)];
    }
  }
  Shape dims;
  std::vector<int64_t> strides_small;
};

}  // namespace

// ---- builders -----------------------------------------------------------

Var add(Var a, Var b) {
  check_same_shape(a, b, "add");
  return a.graph()->add_op(std::make_shared<AddOp>(), {a, b},
                           ew_binary(a.value(), b.value(), [](double x, double y) { return x + y; }));
}

Var sub(Var a, Var b) {
  check_same_shape(a, b, "sub");
  return a.graph()->add_op(std::make_shared<SubOp>(), {a, b},
                           ew_binary(a.value(), b.value(), [](double x, double y) { return x - y; }));
}

Var mul(Var a, Var b) {
  check_same_shape(a, b, "mul");
  return a.graph()->add_op(std::make_shared<MulOp>(), {a, b},
                           ew_binary(a.value(), b.value(), [](double x, double y) { return x * y; }));
}

Var div(Var a, Var b) {
  check_same_shape(a, b, "div");
  return a.graph()->add_op(std::make_shared<DivOp>(), {a, b},
                           ew_binary(a.value(), b.value(), [](double x, double y) { return x / y; }));
}

Var neg(Var a) {
  return a.graph()->add_op(std::make_shared<NegOp>(), {a},
                           ew_unary(a.value(), [](double x) { return -x; }));
}

Var scale(Var a, double c) {
  return a.graph()->add_op(std::make_shared<ScaleOp>(c), {a},
                           ew_unary(a.value(), [c](double x) { return c * x; }));
}

Var add_scalar(Var a, double c) {
  return a.graph()->add_op(std::make_shared<AddScalarOp>(c), {a},
                           ew_unary(a.value(), [c](double x) { return x + c; }));
}

Var abs(Var a) {
  return a.graph()->add_op(std::make_shared<AbsOp>(), {a},
                           ew_unary(a.value(), [](double x) { return std::abs(x); }));
}

Var sqrt(Var a) {
  return a.graph()->add_op(std::make_shared<SqrtOp>(), {a},
                           ew_unary(a.value(), [](double x) { return std::sqrt(x); }));
}

Var log(Var a) {
  return a.graph()->add_op(std::make_shared<LogOp>(), {a},
                           ew_unary(a.value(), [](double x) { return std::log(x); }));
}

Var tanh(Var a) {
  return a.graph()->add_op(std::make_shared<TanhOp>(), {a},
                           ew_unary(a.value(), [](double x) { return std::tanh(x); }));
}

Var sigmoid(Var a) {
  return a.graph()->add_op(std::make_shared<SigmoidOp>(), {a},
                           ew_unary(a.value(), [](double x) { return 1.0 / (1.0 + std::exp(-x)); }));
}

Var relu(Var a) {
  return a.graph()->add_op(std::make_shared<ReluOp>(), {a},
                           ew_unary(a.value(), [](double x) { return x > 0 ? x : 0.0; }));
}

Var leaky_relu(Var a, double slope) {
  return a.graph()->add_op(std::make_shared<LeakyReluOp>(slope), {a},
                           ew_unary(a.value(), [slope](double x) { return x > 0 ? x : slope * x; }));
}

Var clamp_min(Var a, double floor) {
  return a.graph()->add_op(std::make_shared<ClampMinOp>(floor), {a},
                           ew_unary(a.value(), [floor](double x) { return x > floor ? x : floor; }));
}

Var square(Var a) {
  return a.graph()->add_op(std::make_shared<SquareOp>(), {a},
                           ew_unary(a.value(), [](double x) { return x * x; }));
}

Var reshape(Var a, Shape shape) {
  return a.graph()->add_op(std::make_shared<ReshapeOp>(), {a}, a.value().reshaped(std::move(shape)));
}

Var transpose2d(Var a) {
  const Tensor& x = a.value();
  check(x.rank() == 2, ErrorCategory::kShape, "transpose2d: rank must be 2");
  const int64_t m = x.dim(0), n = x.dim(1);
  Tensor y({n, m});
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j) y[j * m + i] = x[i * n + j];
  return a.graph()->add_op(std::make_shared<Transpose2dOp>(), {a}, std::move(y));
}

Var transpose01(Var a) {
  const Tensor& x = a.value();
  check(x.rank() >= 2, ErrorCategory::kShape, "transpose01: rank must be >= 2");
  Shape s = x.shape();
  const int64_t d0 = s[0], d1 = s[1];
  int64_t rest = 1;
  for (size_t i = 2; i < s.size(); ++i) rest *= s[i];
  Shape out_shape = s;
  std::swap(out_shape[0], out_shape[1]);
  Tensor y(out_shape);
  for (int64_t i = 0; i < d0; ++i)
    for (int64_t j = 0; j < d1; ++j)
      std::memcpy(y.data() + (j * d0 + i) * rest, x.data() + (i * d1 + j) * rest,
                  static_cast<size_t>(rest) * sizeof(double));
  return a.graph()->add_op(std::make_shared<Transpose01Op>(), {a}, std::move(y));
}

Var slice_last(Var a, int64_t start, int64_t len) {
  const Tensor& x = a.value();
  check(x.rank() >= 1, ErrorCategory::kShape, "slice_last: rank must be >= 1");
  const int64_t last = x.shape().back();
  check(start >= 0 && len >= 0 && start + len <= last, ErrorCategory::kShape,
        "slice_last: out of range");
  Shape out_shape = x.shape();
  out_shape.back() = len;
  const int64_t outer = x.numel() / last;
  Tensor y(out_shape);
  for (int64_t o = 0; o < outer; ++o)
    std::memcpy(y.data() + o * len, x.data() + o * last + start,
                static_cast<size_t>(len) * sizeof(double));
  return a.graph()->add_op(std::make_shared<SliceLastOp>(start, len), {a}, std::move(y));
}

Var embed_last(Var a, int64_t start, int64_t total) {
  const Tensor& x = a.value();
  const int64_t len = x.shape().back();
  check(start >= 0 && start + len <= total, ErrorCategory::kShape, "embed_last: out of range");
  Shape out_shape = x.shape();
  out_shape.back() = total;
  const int64_t outer = x.numel() / len;
  Tensor y(out_shape);
  for (int64_t o = 0; o < outer; ++o)
    std::memcpy(y.data() + o * total + start, x.data() + o * len,
                static_cast<size_t>(len) * sizeof(double));
  return a.graph()->add_op(std::make_shared<EmbedLastOp>(start, total), {a}, std::move(y));
}

Var select0(Var a, int64_t index) {
  const Tensor& x = a.value();
  check(x.rank() >= 1 && index >= 0 && index < x.dim(0), ErrorCategory::kShape,
        "select0: index out of range");
  Shape out_shape(x.shape().begin() + 1, x.shape().end());
  const int64_t block = x.numel() / x.dim(0);
  Tensor y(out_shape.empty() ? Shape{1} : out_shape);
  std::memcpy(y.data(), x.data() + index * block, static_cast<size_t>(block) * sizeof(double));
  return a.graph()->add_op(std::make_shared<Select0Op>(index), {a}, std::move(y));
}

Var embed0(Var a, int64_t index, int64_t dim0) {
  const Tensor& x = a.value();
  check(index >= 0 && index < dim0, ErrorCategory::kShape, "embed0: index out of range");
  Shape out_shape;
  out_shape.push_back(dim0);
  for (int64_t d : x.shape()) out_shape.push_back(d);
  Tensor y(out_shape);
  std::memcpy(y.data() + index * x.numel(), x.data(),
              static_cast<size_t>(x.numel()) * sizeof(double));
  return a.graph()->add_op(std::make_shared<Embed0Op>(index, dim0), {a}, std::move(y));
}

Var stack0(const std::vector<Var>& xs) {
  check(!xs.empty(), ErrorCategory::kShape, "stack0: empty input list");
  const Shape& s = xs[0].shape();
  Shape out_shape;
  out_shape.push_back(static_cast<int64_t>(xs.size()));
  for (int64_t d : s) out_shape.push_back(d);
  Tensor y(out_shape);
  const int64_t block = xs[0].value().numel();
  for (size_t i = 0; i < xs.size(); ++i) {
    check(xs[i].shape() == s, ErrorCategory::kShape, "stack0: inconsistent shapes");
    std::memcpy(y.data() + static_cast<int64_t>(i) * block, xs[i].value().data(),
                static_cast<size_t>(block) * sizeof(double));
  }
  return xs[0].graph()->add_op(std::make_shared<Stack0Op>(), xs, std::move(y));
}

Var gather_last(Var a, std::shared_ptr<const std::vector<int64_t>> indices) {
  const Tensor& x = a.value();
  const int64_t last = x.shape().back();
  const int64_t outer = x.numel() / last;
  const int64_t m = static_cast<int64_t>(indices->size());
  for (int64_t idx : *indices)
    check(idx >= 0 && idx < last, ErrorCategory::kShape, "gather_last: index out of range");
  Shape out_shape = x.shape();
  out_shape.back() = m;
  Tensor y(out_shape);
  for (int64_t o = 0; o < outer; ++o) {
    const double* src = x.data() + o * last;
    double* dst = y.data() + o * m;
    for (int64_t i = 0; i < m; ++i) dst[i] = src[(*indices)[static_cast<size_t>(i)]];
  }
  return a.graph()->add_op(std::make_shared<GatherLastOp>(indices), {a}, std::move(y));
}

Var scatter_add_last(Var a, std::shared_ptr<const std::vector<int64_t>> indices, int64_t total) {
  const Tensor& x = a.value();
  const int64_t m = x.shape().back();
  check(m == static_cast<int64_t>(indices->size()), ErrorCategory::kShape,
        "scatter_add_last: index count mismatch");
  const int64_t outer = x.numel() / m;
  Shape out_shape = x.shape();
  out_shape.back() = total;
  Tensor y(out_shape);
  for (int64_t o = 0; o < outer; ++o) {
    const double* src = x.data() + o * m;
    double* dst = y.data() + o * total;
    for (int64_t i = 0; i < m; ++i) dst[(*indices)[static_cast<size_t>(i)]] += src[i];
  }
  return a.graph()->add_op(std::make_shared<ScatterAddLastOp>(indices, total), {a}, std::move(y));
}

Var reflect_pad_last(Var a, int64_t left, int64_t right) {
  const Tensor& x = a.value();
  const int64_t last = x.shape().back();
  check(last >= 1, ErrorCategory::kShape, "reflect_pad_last: empty last dim");
  const int64_t outer = x.numel() / last;
  Shape out_shape = x.shape();
  out_shape.back() = last + left + right;
  Tensor y(out_shape);
  for (int64_t o = 0; o < outer; ++o) {
    const double* src = x.data() + o * last;
    double* dst = y.data() + o * (last + left + right);
    for (int64_t j = 0; j < last + left + right; ++j) dst[j] = src[reflect_index(j - left, last)];
  }
  return a.graph()->add_op(std::make_shared<ReflectPadLastOp>(left, right), {a}, std::move(y));
}

Var reflect_pad_adjoint_last(Var a, int64_t left, int64_t right) {
  const Tensor& x = a.value();
  const int64_t padded = x.shape().back();
  const int64_t last = padded - left - right;
  check(last >= 1, ErrorCategory::kShape, "reflect_pad_adjoint_last: bad dims");
  const int64_t outer = x.numel() / padded;
  Shape out_shape = x.shape();
  out_shape.back() = last;
  Tensor y(out_shape);
  for (int64_t o = 0; o < outer; ++o) {
    const double* src = x.data() + o * padded;
    double* dst = y.data() + o * last;
    for (int64_t j = 0; j < padded; ++j) dst[reflect_index(j - left, last)] += src[j];
  }
  return a.graph()->add_op(std::make_shared<ReflectPadAdjointLastOp>(left, right), {a},
                           std::move(y));
}

Var reduce_sum_all(Var a) {
  return a.graph()->add_op(std::make_shared<ReduceSumAllOp>(), {a},
                           Tensor::scalar(a.value().sum()));
}

Var reduce_mean_all(Var a) {
  check(a.value().numel() > 0, ErrorCategory::kShape, "reduce_mean_all: empty tensor");
  return a.graph()->add_op(std::make_shared<ReduceMeanAllOp>(), {a},
                           Tensor::scalar(a.value().sum() / static_cast<double>(a.value().numel())));
}

namespace {

Tensor reduce_keepdim_eval(const Tensor& x, const std::vector<int>& axes, bool mean) {
  check(axes.size() == x.shape().size(), ErrorCategory::kShape,
        "reduce_keepdim: axes mask rank mismatch");
  Shape out_shape = x.shape();
  int64_t count = 1;
  for (size_t i = 0; i < axes.size(); ++i) {
    if (axes[i]) {
      count *= out_shape[i];
      out_shape[i] = 1;
    }
  }
  Tensor y(out_shape);
  BroadcastIter it(x.shape(), out_shape);
  const int r = static_cast<int>(x.shape().size());
  std::vector<int64_t> idx(static_cast<size_t>(r), 0);
  const int64_t n = x.numel();
  int64_t small_index = 0;
  for (int64_t flat = 0; flat < n; ++flat) {
    y[small_index] += x[flat];
    // increment multi-index
    for (int d = r - 1; d >= 0; --d) {
      idx[static_cast<size_t>(d)]++;
      small_index += it.strides_small[static_cast<size_t>(d)];
      if (idx[static_cast<size_t>(d)] < it.dims[static_cast<size_t>(d)]) break;
      small_index -= it.strides_small[static_cast<size_t>(d)] * it.dims[static_cast<size_t>(d)];
      idx[static_cast<size_t>(d)] = 0;
    }
  }
  if (mean) y.scale_(1.0 / static_cast<double>(count));
  return y;
}

}  // namespace

Var reduce_sum_keepdim(Var a, std::vector<int> axes) {
  Tensor y = reduce_keepdim_eval(a.value(), axes, false);
  return a.graph()->add_op(std::make_shared<ReduceSumKeepdimOp>(std::move(axes)), {a},
                           std::move(y));
}

Var reduce_mean_keepdim(Var a, std::vector<int> axes) {
  int64_t count = 1;
  for (size_t i = 0; i < axes.size(); ++i)
    if (axes[i]) count *= a.shape()[i];
  Tensor y = reduce_keepdim_eval(a.value(), axes, true);
  return a.graph()->add_op(
      std::make_shared<ReduceMeanKeepdimOp>(std::move(axes), 1.0 / static_cast<double>(count)),
      {a}, std::move(y));
}

Var broadcast_from(Var a, Shape big) {
  const Tensor& x = a.value();
  check(big.size() == x.shape().size(), ErrorCategory::kShape, "broadcast_from: rank mismatch");
  for (size_t i = 0; i < big.size(); ++i)
    check(x.shape()[i] == big[i] || x.shape()[i] == 1, ErrorCategory::kShape,
          "broadcast_from: incompatible shapes " + shape_str(x.shape()) + " -> " + shape_str(big));
  Tensor y(big);
  BroadcastIter it(big, x.shape());
  const int r = static_cast<int>(big.size());
  std::vector<int64_t> idx(static_cast<size_t>(r), 0);
  const int64_t n = y.numel();
  int64_t small_index = 0;
  for (int64_t flat = 0; flat < n; ++flat) {
    y[flat] = x[small_index];
    for (int d = r - 1; d >= 0; --d) {
      idx[static_cast<size_t>(d)]++;
      small_index += it.strides_small[static_cast<size_t>(d)];
      if (idx[static_cast<size_t>(d)] < it.dims[static_cast<size_t>(d)]) break;
      small_index -= it.strides_small[static_cast<size_t>(d)] * it.dims[static_cast<size_t>(d)];
      idx[static_cast<size_t>(d)] = 0;
    }
  }
  return a.graph()->add_op(std::make_shared<BroadcastFromOp>(), {a}, std::move(y));
}

Var matmul(Var a, Var b) {
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  check(x.rank() == 2 && y.rank() == 2 && x.dim(1) == y.dim(0), ErrorCategory::kShape,
        "matmul: incompatible shapes " + shape_str(x.shape()) + " x " + shape_str(y.shape()));
  const int64_t m = x.dim(0), k = x.dim(1), n = y.dim(1);
  Tensor z({m, n});
  if (n == 1 || m == 1) {
    // Explicit sequential accumulation: the result for any row is then
    // bit-identical whether it is computed alone or inside a batch (the
    // critic's batch-independence contract).
    for (int64_t i = 0; i < m; ++i) {
      for (int64_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int64_t l = 0; l < k; ++l) acc += x[i * k + l] * y[l * n + j];
        z[i * n + j] = acc;
      }
    }
  } else {
    Eigen::Map<const RowMat> xm(x.data(), m, k);
    Eigen::Map<const RowMat> ym(y.data(), k, n);
    Eigen::Map<RowMat> zm(z.data(), m, n);
    zm.noalias() = xm * ym;
  }
  return a.graph()->add_op(std::make_shared<MatmulOp>(), {a, b}, std::move(z));
}

}  // namespace ops

}  // namespace lipsynth
