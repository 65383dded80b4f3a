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

#include "lipsynth/nn.hpp"

#include <cmath>

namespace lipsynth {

namespace {

// Uniform fan-in initialization: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Tensor fan_in_uniform(Shape shape, int64_t fan_in, Rng& rng) {
  double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
  return Tensor::uniform(std::move(shape), -limit, limit, rng);
}

Shape keepdim_shape_for_channel(const Shape& x, int64_t channels) {
  Shape s(x.size(), 1);
  check(x.size() >= 2 && x[1] == channels, ErrorCategory::kShape,
        "channel axis mismatch: " + shape_str(x));
  s[1] = channels;
  return s;
}

}  // namespace

Var Binding::operator()(const Tensor& t) {
  auto it = bound_.find(&t);
  if (it != bound_.end()) return it->second;
  Var v = trainable_ ? graph_->leaf(t) : graph_->constant(t);
  bound_.emplace(&t, v);
  return v;
}

std::vector<Var> Binding::vars_for(const std::vector<Tensor*>& params) {
  std::vector<Var> out;
  out.reserve(params.size());
  for (Tensor* p : params) out.push_back((*this)(*p));
  return out;
}

Var add_axis_bias(Binding& bind, Var x, const Tensor& b, int axis) {
  Shape small(x.shape().size(), 1);
  small[static_cast<size_t>(axis)] = b.numel();
  Var bb = ops::reshape(bind(b), small);
  return ops::add(x, ops::broadcast_from(bb, x.shape()));
}

// ---- LinearLayer ----------------------------------------------------------

void LinearLayer::init(int64_t in, int64_t out, Rng& rng) {
  w = fan_in_uniform({in, out}, in, rng);
  b = fan_in_uniform({out}, in, rng);
}

Var LinearLayer::forward(Binding& bind, Var x) const {
  return add_axis_bias(bind, ops::matmul(x, bind(w)), b, 1);
}

void LinearLayer::collect(std::vector<Tensor*>& out) {
  out.push_back(&w);
  out.push_back(&b);
}

// ---- Conv1dLayer -----------------------------------------------------------

void Conv1dLayer::init(int64_t in_ch, int64_t out_ch, int64_t kernel, int stride_, int pad_,
                       Rng& rng) {
  stride = stride_;
  pad = pad_;
  int64_t fan_in = in_ch * kernel;
  w = fan_in_uniform({out_ch, in_ch, kernel}, fan_in, rng);
  b = fan_in_uniform({out_ch}, fan_in, rng);
}

Var Conv1dLayer::forward(Binding& bind, Var x) const {
  return add_axis_bias(bind, ops::conv1d(x, bind(w), stride, pad), b, 1);
}

void Conv1dLayer::collect(std::vector<Tensor*>& out) {
  out.push_back(&w);
  out.push_back(&b);
}

// ---- ConvTranspose1dLayer ---------------------------------------------------

void ConvTranspose1dLayer::init(int64_t in_ch, int64_t out_ch, int stride_, Rng& rng) {
  stride = stride_;
  // kernel - 2*pad == stride gives out_len == in_len * stride exactly.
  if (stride_ % 2 == 0) {
    kernel = 2 * stride_;
    pad = stride_ / 2;
  } else {
    kernel = 2 * stride_ - 1;
    pad = (stride_ - 1) / 2;
  }
  int64_t fan_in = in_ch * kernel;
  w = fan_in_uniform({in_ch, out_ch, kernel}, fan_in, rng);
  b = fan_in_uniform({out_ch}, fan_in, rng);
}

Var ConvTranspose1dLayer::forward(Binding& bind, Var x) const {
  const int64_t out_len = x.shape()[2] * stride;
  return add_axis_bias(bind, ops::conv1d_dx(x, bind(w), stride, pad, out_len), b, 1);
}

void ConvTranspose1dLayer::collect(std::vector<Tensor*>& out) {
  out.push_back(&w);
  out.push_back(&b);
}

// ---- Conv3dLayer -------------------------------------------------------------

void Conv3dLayer::init(int64_t in_ch, int64_t out_ch, std::array<int64_t, 3> kernel,
                       std::array<int, 3> stride_, std::array<int, 3> pad_, Rng& rng) {
  stride = stride_;
  pad = pad_;
  int64_t fan_in = in_ch * kernel[0] * kernel[1] * kernel[2];
  w = fan_in_uniform({out_ch, in_ch, kernel[0], kernel[1], kernel[2]}, fan_in, rng);
  b = fan_in_uniform({out_ch}, fan_in, rng);
}

Var Conv3dLayer::forward(Binding& bind, Var x) const {
  return add_axis_bias(bind, ops::conv3d(x, bind(w), stride, pad), b, 1);
}

void Conv3dLayer::collect(std::vector<Tensor*>& out) {
  out.push_back(&w);
  out.push_back(&b);
}

// ---- BatchNormLayer ------------------------------------------------------------

void BatchNormLayer::init(int64_t channels) {
  gamma = Tensor::full({channels}, 1.0);
  beta = Tensor::zeros({channels});
  running_mean = Tensor::zeros({channels});
  running_var = Tensor::full({channels}, 1.0);
}

Var BatchNormLayer::forward(Binding& bind, Var x, bool training) {
  // Copy: node storage may reallocate as ops are added.
  const Shape xs = x.shape();
  const int64_t channels = gamma.numel();
  Shape keep = keepdim_shape_for_channel(xs, channels);
  std::vector<int> axes(xs.size(), 1);
  axes[1] = 0;

  Var y;
  if (training) {
    Var mu = ops::reduce_mean_keepdim(x, axes);
    Var xc = ops::sub(x, ops::broadcast_from(mu, xs));
    Var var = ops::reduce_mean_keepdim(ops::square(xc), axes);
    Var denom = ops::sqrt(ops::add_scalar(var, eps));
    Var xn = ops::div(xc, ops::broadcast_from(denom, xs));
    y = ops::add(ops::mul(xn, ops::broadcast_from(ops::reshape(bind(gamma), keep), xs)),
                 ops::broadcast_from(ops::reshape(bind(beta), keep), xs));
    // Side effect: update running statistics from the batch values.
    const Tensor& mu_v = mu.value();
    const Tensor& var_v = var.value();
    for (int64_t c = 0; c < channels; ++c) {
      running_mean[c] = (1.0 - momentum) * running_mean[c] + momentum * mu_v[c];
      running_var[c] = (1.0 - momentum) * running_var[c] + momentum * var_v[c];
    }
  } else {
    Graph& g = bind.graph();
    Var mu = g.constant(running_mean.reshaped(keep));
    Tensor denom_t = running_var.reshaped(keep);
    for (int64_t i = 0; i < denom_t.numel(); ++i) denom_t[i] = std::sqrt(denom_t[i] + eps);
    Var denom = g.constant(std::move(denom_t));
    Var xn = ops::div(ops::sub(x, ops::broadcast_from(mu, xs)),
                      ops::broadcast_from(denom, xs));
    y = ops::add(ops::mul(xn, ops::broadcast_from(ops::reshape(bind(gamma), keep), xs)),
                 ops::broadcast_from(ops::reshape(bind(beta), keep), xs));
  }
  return y;
}

void BatchNormLayer::collect(std::vector<Tensor*>& out) {
  out.push_back(&gamma);
  out.push_back(&beta);
}

void BatchNormLayer::collect_buffers(std::vector<Tensor*>& out) {
  out.push_back(&running_mean);
  out.push_back(&running_var);
}

// ---- GruLayer ---------------------------------------------------------------

void GruLayer::init(int64_t in, int64_t hidden_, Rng& rng) {
  hidden = hidden_;
  w_ih = fan_in_uniform({in, 3 * hidden}, in, rng);
  w_hh = fan_in_uniform({hidden, 3 * hidden}, hidden, rng);
  b_ih = fan_in_uniform({3 * hidden}, in, rng);
  b_hh = fan_in_uniform({3 * hidden}, hidden, rng);
}

Var GruLayer::step(Binding& bind, Var x, Var h) const {
  Var gi = add_axis_bias(bind, ops::matmul(x, bind(w_ih)), b_ih, 1);
  Var gh = add_axis_bias(bind, ops::matmul(h, bind(w_hh)), b_hh, 1);
  Var r = ops::sigmoid(ops::add(ops::slice_last(gi, 0, hidden), ops::slice_last(gh, 0, hidden)));
  Var z = ops::sigmoid(
      ops::add(ops::slice_last(gi, hidden, hidden), ops::slice_last(gh, hidden, hidden)));
  Var n = ops::tanh(ops::add(ops::slice_last(gi, 2 * hidden, hidden),
                             ops::mul(r, ops::slice_last(gh, 2 * hidden, hidden))));
  Var one_minus_z = ops::add_scalar(ops::neg(z), 1.0);
  return ops::add(ops::mul(one_minus_z, n), ops::mul(z, h));
}

void GruLayer::collect(std::vector<Tensor*>& out) {
  out.push_back(&w_ih);
  out.push_back(&w_hh);
  out.push_back(&b_ih);
  out.push_back(&b_hh);
}

// ---- AdamOptimizer -------------------------------------------------------------

void AdamOptimizer::step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads) {
  check(params.size() == grads.size(), ErrorCategory::kInternal, "adam: param/grad count mismatch");
  if (m_.empty()) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (Tensor* p : params) {
      m_.push_back(Tensor::zeros(p->shape()));
      v_.push_back(Tensor::zeros(p->shape()));
    }
  }
  check(m_.size() == params.size(), ErrorCategory::kInternal, "adam: state size mismatch");
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = grads[i];
    check(p.same_shape(g), ErrorCategory::kInternal, "adam: grad shape mismatch");
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    const int64_t n = p.numel();
    for (int64_t j = 0; j < n; ++j) {
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

void AdamOptimizer::restore(int64_t t, std::vector<Tensor> m, std::vector<Tensor> v) {
  t_ = t;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace lipsynth
