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

#ifndef LIPSYNTH_GRAPH_H_
#define LIPSYNTH_GRAPH_H_

#include <array>
#include <memory>
#include <vector>

#include "lipsynth/tensor.hpp"

namespace lipsynth {

class Graph;
class Op;

// Handle to a node on a Graph. Values are computed eagerly when the node
// is created; the node list doubles as the reverse-mode tape.
class Var {
 public:
  Var() = default;
  Var(Graph* graph, int id) : graph_(graph), id_(id) {}

  bool valid() const { return graph_ != nullptr; }
  Graph* graph() const { return graph_; }
  int id() const { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

 private:
  Graph* graph_ = nullptr;
  int id_ = -1;
};

class Op {
 public:
  virtual ~Op() = default;
  virtual const char* name() const = 0;
  // Builds the vector-Jacobian product for each input slot, given the
  // gradient w.r.t. the output. Gradient nodes are appended to the graph,
  // so results can be differentiated again (needed by the gradient
  // penalty). Slots whose input does not require grad may return an
  // invalid Var.
  virtual std::vector<Var> vjp(Graph& g, const std::vector<Var>& inputs, Var output,
                               Var grad_out) const = 0;
};

struct Node {
  std::shared_ptr<const Op> op;  // null for leaves and constants
  std::vector<int> inputs;
  Tensor value;
  bool requires_grad = false;
};

// Eager compute tape. One Graph per training/inference pass; nodes are
// append-only and freed with the Graph.
class Graph {
 public:
  Var constant(Tensor value);
  Var leaf(Tensor value);  // differentiable input (parameter or probe point)
  Var add_op(std::shared_ptr<const Op> op, const std::vector<Var>& inputs, Tensor value);

  const Node& node(int id) const { return nodes_[static_cast<size_t>(id)]; }
  size_t size() const { return nodes_.size(); }

  // Reverse-mode differentiation of a scalar output. Returns one Var per
  // entry of `wrt`, in order; entries with no path to the output come back
  // as zero tensors. Gradient nodes live on this same graph.
  std::vector<Var> gradients(Var output, const std::vector<Var>& wrt);

 private:
  std::vector<Node> nodes_;
};

namespace ops {

// Elementwise (strict shape match unless noted).
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var neg(Var a);
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
Var abs(Var a);
Var sqrt(Var a);
Var log(Var a);
Var tanh(Var a);
Var sigmoid(Var a);
Var relu(Var a);
Var leaky_relu(Var a, double slope);
Var clamp_min(Var a, double floor);
Var square(Var a);

// Shape manipulation.
Var reshape(Var a, Shape shape);
Var transpose2d(Var a);                       // (m, n) -> (n, m)
Var transpose01(Var a);                       // (a, b, rest...) -> (b, a, rest...)
Var slice_last(Var a, int64_t start, int64_t len);
Var embed_last(Var a, int64_t start, int64_t total);  // zero-pad inverse of slice_last
Var select0(Var a, int64_t index);            // drops axis 0
Var embed0(Var a, int64_t index, int64_t dim0);
Var stack0(const std::vector<Var>& xs);
Var gather_last(Var a, std::shared_ptr<const std::vector<int64_t>> indices);
Var scatter_add_last(Var a, std::shared_ptr<const std::vector<int64_t>> indices, int64_t total);
Var reflect_pad_last(Var a, int64_t left, int64_t right);
Var reflect_pad_adjoint_last(Var a, int64_t left, int64_t right);

// Reductions and broadcast. `axes` is a 0/1 mask per dimension.
Var reduce_sum_all(Var a);
Var reduce_mean_all(Var a);
Var reduce_sum_keepdim(Var a, std::vector<int> axes);
Var reduce_mean_keepdim(Var a, std::vector<int> axes);
Var broadcast_from(Var a, Shape big);

// Linear algebra.
Var matmul(Var a, Var b);  // (m, k) x (k, n)

// 1-D convolution family over (batch, channels, length). The three ops are
// mutually adjoint, which is what makes the gradient penalty twice
// differentiable without special cases.
Var conv1d(Var x, Var w, int stride, int pad);
Var conv1d_dx(Var g, Var w, int stride, int pad, int64_t out_len);  // also transposed conv
Var conv1d_dw(Var x, Var g, int stride, int pad, int64_t kernel);

// 3-D convolution over (batch, channels, t, h, w); first-order only.
Var conv3d(Var x, Var w, std::array<int, 3> stride, std::array<int, 3> pad);
Var conv3d_dx(Var g, Var w, std::array<int, 3> stride, std::array<int, 3> pad,
              std::array<int64_t, 3> in_dims);
Var conv3d_dw(Var x, Var g, std::array<int, 3> stride, std::array<int, 3> pad,
              std::array<int64_t, 3> kernel);

}  // namespace ops

}  // namespace lipsynth

#endif  // LIPSYNTH_GRAPH_H_
