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

#ifndef LIPSYNTH_NN_H_
#define LIPSYNTH_NN_H_

#include <array>
#include <unordered_map>
#include <vector>

#include "lipsynth/graph.hpp"
#include "lipsynth/rng.hpp"
#include "lipsynth/tensor.hpp"

namespace lipsynth {

// Binds module parameters (plain Tensors owned by layers) to graph nodes
// for the duration of one forward/backward pass. With trainable=false the
// parameters enter the graph as constants, which turns the whole pass into
// a plain function evaluation.
class Binding {
 public:
  Binding(Graph& g, bool trainable) : graph_(&g), trainable_(trainable) {}

  Graph& graph() { return *graph_; }
  bool trainable() const { return trainable_; }

  Var operator()(const Tensor& t);
  std::vector<Var> vars_for(const std::vector<Tensor*>& params);

 private:
  Graph* graph_;
  bool trainable_;
  std::unordered_map<const Tensor*, Var> bound_;
};

// y = x + b broadcast along `axis` of x.
Var add_axis_bias(Binding& bind, Var x, const Tensor& b, int axis);

struct LinearLayer {
  Tensor w;  // (in, out)
  Tensor b;  // (out)

  void init(int64_t in, int64_t out, Rng& rng);
  Var forward(Binding& bind, Var x) const;  // x: (batch, in)
  void collect(std::vector<Tensor*>& out);
};

struct Conv1dLayer {
  Tensor w;  // (out, in, k)
  Tensor b;  // (out)
  int stride = 1;
  int pad = 0;

  void init(int64_t in_ch, int64_t out_ch, int64_t kernel, int stride_, int pad_, Rng& rng);
  Var forward(Binding& bind, Var x) const;  // x: (batch, in, len)
  void collect(std::vector<Tensor*>& out);
};

// Transposed 1-D convolution with exact length multiplication: the kernel
// and padding are chosen so out_len == in_len * stride.
struct ConvTranspose1dLayer {
  Tensor w;  // (in, out, k); the input plays the gradient role of conv1d
  Tensor b;  // (out)
  int stride = 1;
  int pad = 0;
  int64_t kernel = 1;

  void init(int64_t in_ch, int64_t out_ch, int stride_, Rng& rng);
  Var forward(Binding& bind, Var x) const;  // x: (batch, in, len)
  void collect(std::vector<Tensor*>& out);
};

struct Conv3dLayer {
  Tensor w;  // (out, in, kt, kh, kw)
  Tensor b;  // (out)
  std::array<int, 3> stride{1, 1, 1};
  std::array<int, 3> pad{0, 0, 0};

  void init(int64_t in_ch, int64_t out_ch, std::array<int64_t, 3> kernel,
            std::array<int, 3> stride_, std::array<int, 3> pad_, Rng& rng);
  Var forward(Binding& bind, Var x) const;  // x: (batch, in, t, h, w)
  void collect(std::vector<Tensor*>& out);
};

// Per-channel batch normalization (channel axis 1). Running statistics are
// plain buffers updated as a side effect of training-mode forwards; they are
// not differentiated.
struct BatchNormLayer {
  Tensor gamma, beta;              // (C)
  Tensor running_mean, running_var;  // (C)
  double momentum = 0.1;
  double eps = 1e-5;

  void init(int64_t channels);
  Var forward(Binding& bind, Var x, bool training);
  void collect(std::vector<Tensor*>& out);
  void collect_buffers(std::vector<Tensor*>& out);
};

struct GruLayer {
  Tensor w_ih;  // (in, 3h) gate order: r, z, n
  Tensor w_hh;  // (h, 3h)
  Tensor b_ih, b_hh;  // (3h)
  int64_t hidden = 0;

  void init(int64_t in, int64_t hidden_, Rng& rng);
  Var step(Binding& bind, Var x, Var h) const;  // x: (B, in), h: (B, h)
  void collect(std::vector<Tensor*>& out);
};

class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  AdamOptimizer(double lr, double beta1, double beta2, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads);

  int64_t t() const { return t_; }
  std::vector<Tensor>& moment1() { return m_; }
  std::vector<Tensor>& moment2() { return v_; }
  void restore(int64_t t, std::vector<Tensor> m, std::vector<Tensor> v);

 private:
  double lr_ = 1e-4, beta1_ = 0.5, beta2_ = 0.9, eps_ = 1e-8;
  int64_t t_ = 0;
  std::vector<Tensor> m_, v_;
};

}  // namespace lipsynth

#endif  // LIPSYNTH_NN_H_
