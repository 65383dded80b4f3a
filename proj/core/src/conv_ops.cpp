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

#include <Eigen/Core>
#include <array>

#include "lipsynth/graph.hpp"

namespace lipsynth {
namespace ops {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

int64_t conv_out_len(int64_t in, int64_t kernel, int stride, int pad) {
  check(in + 2 * pad >= kernel, ErrorCategory::kShape, "conv: input shorter than kernel");
  return (in + 2 * pad - kernel) / stride + 1;
}

// cols(j, c*K + k) = x[c, j*s + k - p], zero outside. x is one sample (C, L).
void im2col_1d(const double* x, int64_t C, int64_t L, int64_t K, int stride, int pad,
               int64_t rows, RowMat& cols) {
  cols.setZero(rows, C * K);
  for (int64_t j = 0; j < rows; ++j) {
    const int64_t base = j * stride - pad;
    for (int64_t c = 0; c < C; ++c) {
      const double* xc = x + c * L;
      double* row = cols.data() + j * C * K + c * K;
      for (int64_t k = 0; k < K; ++k) {
        const int64_t i = base + k;
        if (i >= 0 && i < L) row[k] = xc[i];
      }
    }
  }
}

struct Conv1dOp : Op {
  Conv1dOp(int stride, int pad) : stride_(stride), pad_(pad) {}
  const char* name() const override { return "conv1d"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>& in, Var, Var g) const override {
    Var gx, gw;
    if (in[0].requires_grad()) gx = conv1d_dx(g, in[1], stride_, pad_, in[0].shape()[2]);
    if (in[1].requires_grad()) gw = conv1d_dw(in[0], g, stride_, pad_, in[1].shape()[2]);
    return {gx, gw};
  }
  int stride_, pad_;
};

struct Conv1dDxOp : Op {
  Conv1dDxOp(int stride, int pad, int64_t out_len)
      : stride_(stride), pad_(pad), out_len_(out_len) {}
  const char* name() const override { return "conv1d_dx"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>& in, Var, Var u) const override {
    // dx = A(g, w) is bilinear; the adjoints stay inside the conv family.
    Var gg, gw;
    if (in[0].requires_grad()) {
      gg = conv1d(u, in[1], stride_, pad_);
      check(gg.shape() == in[0].shape(), ErrorCategory::kInternal,
            "conv1d_dx vjp: inconsistent geometry");
    }
    if (in[1].requires_grad()) gw = conv1d_dw(u, in[0], stride_, pad_, in[1].shape()[2]);
    return {gg, gw};
  }
  int stride_, pad_;
  int64_t out_len_;
};

struct Conv1dDwOp : Op {
  Conv1dDwOp(int stride, int pad, int64_t kernel)
      : stride_(stride), pad_(pad), kernel_(kernel) {}
  const char* name() const override { return "conv1d_dw"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>& in, Var, Var v) const override {
    Var gx, gg;
    if (in[0].requires_grad()) gx = conv1d_dx(in[1], v, stride_, pad_, in[0].shape()[2]);
    if (in[1].requires_grad()) {
      gg = conv1d(in[0], v, stride_, pad_);
      check(gg.shape() == in[1].shape(), ErrorCategory::kInternal,
            "conv1d_dw vjp: inconsistent geometry");
    }
    return {gx, gg};
  }
  int stride_, pad_;
  int64_t kernel_;
};

}  // namespace

Var conv1d(Var x, Var w, int stride, int pad) {
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  check(xv.rank() == 3 && wv.rank() == 3, ErrorCategory::kShape, "conv1d: expects 3-D tensors");
  const int64_t B = xv.dim(0), C = xv.dim(1), L = xv.dim(2);
  const int64_t O = wv.dim(0), K = wv.dim(2);
  check(wv.dim(1) == C, ErrorCategory::kShape,
        "conv1d: channel mismatch " + shape_str(xv.shape()) + " vs " + shape_str(wv.shape()));
  const int64_t Lout = conv_out_len(L, K, stride, pad);
  Tensor y({B, O, Lout});
  Eigen::Map<const RowMat> wm(wv.data(), O, C * K);
  RowMat cols;
  RowMat prod;
  for (int64_t b = 0; b < B; ++b) {
    im2col_1d(xv.data() + b * C * L, C, L, K, stride, pad, Lout, cols);
    prod.noalias() = cols * wm.transpose();  // (Lout, O)
    double* yb = y.data() + b * O * Lout;
    for (int64_t o = 0; o < O; ++o)
      for (int64_t j = 0; j < Lout; ++j) yb[o * Lout + j] = prod(j, o);
  }
  return x.graph()->add_op(std::make_shared<Conv1dOp>(stride, pad), {x, w}, std::move(y));
}

Var conv1d_dx(Var g, Var w, int stride, int pad, int64_t out_len) {
  const Tensor& gv = g.value();
  const Tensor& wv = w.value();
  check(gv.rank() == 3 && wv.rank() == 3, ErrorCategory::kShape, "conv1d_dx: expects 3-D tensors");
  const int64_t B = gv.dim(0), O = gv.dim(1), Lg = gv.dim(2);
  const int64_t C = wv.dim(1), K = wv.dim(2);
  check(wv.dim(0) == O, ErrorCategory::kShape, "conv1d_dx: channel mismatch");
  Tensor y({B, C, out_len});
  Eigen::Map<const RowMat> wm(wv.data(), O, C * K);
  RowMat dcols;
  for (int64_t b = 0; b < B; ++b) {
    Eigen::Map<const RowMat> gm(gv.data() + b * O * Lg, O, Lg);
    dcols.noalias() = gm.transpose() * wm;  // (Lg, C*K)
    double* yb = y.data() + b * C * out_len;
    for (int64_t j = 0; j < Lg; ++j) {
      const int64_t base = j * stride - pad;
      const double* row = dcols.data() + j * C * K;
      for (int64_t c = 0; c < C; ++c) {
        double* yc = yb + c * out_len;
        for (int64_t k = 0; k < K; ++k) {
          const int64_t i = base + k;
          if (i >= 0 && i < out_len) yc[i] += row[c * K + k];
        }
      }
    }
  }
  return g.graph()->add_op(std::make_shared<Conv1dDxOp>(stride, pad, out_len), {g, w},
                           std::move(y));
}

Var conv1d_dw(Var x, Var g, int stride, int pad, int64_t kernel) {
  const Tensor& xv = x.value();
  const Tensor& gv = g.value();
  check(xv.rank() == 3 && gv.rank() == 3, ErrorCategory::kShape, "conv1d_dw: expects 3-D tensors");
  const int64_t B = xv.dim(0), C = xv.dim(1), L = xv.dim(2);
  const int64_t O = gv.dim(1), Lg = gv.dim(2);
  check(gv.dim(0) == B, ErrorCategory::kShape, "conv1d_dw: batch mismatch");
  Tensor y({O, C, kernel});
  Eigen::Map<RowMat> ym(y.data(), O, C * kernel);
  RowMat cols;
  for (int64_t b = 0; b < B; ++b) {
    im2col_1d(xv.data() + b * C * L, C, L, kernel, stride, pad, Lg, cols);
    Eigen::Map<const RowMat> gm(gv.data() + b * O * Lg, O, Lg);
    ym.noalias() += gm * cols;  // (O, C*K)
  }
  return x.graph()->add_op(std::make_shared<Conv1dDwOp>(stride, pad, kernel), {x, g},
                           std::move(y));
}

// ---- conv3d (first-order only) -------------------------------------------

namespace {

struct Conv3dGeom {
  int64_t M, C, T, H, W;       // input dims
  int64_t O, kt, kh, kw;       // weight dims
  int64_t To, Ho, Wo;          // output spatial dims
  std::array<int, 3> stride, pad;
  int64_t rows() const { return To * Ho * Wo; }
  int64_t ck() const { return C * kt * kh * kw; }
};

Conv3dGeom conv3d_geom(const Tensor& x, const Tensor& w, std::array<int, 3> stride,
                       std::array<int, 3> pad) {
  check(x.rank() == 5 && w.rank() == 5, ErrorCategory::kShape, "conv3d: expects 5-D tensors");
  Conv3dGeom g;
  g.M = x.dim(0);
  g.C = x.dim(1);
  g.T = x.dim(2);
  g.H = x.dim(3);
  g.W = x.dim(4);
  g.O = w.dim(0);
  g.kt = w.dim(2);
  g.kh = w.dim(3);
  g.kw = w.dim(4);
  check(w.dim(1) == g.C, ErrorCategory::kShape, "conv3d: channel mismatch");
  g.stride = stride;
  g.pad = pad;
  g.To = conv_out_len(g.T, g.kt, stride[0], pad[0]);
  g.Ho = conv_out_len(g.H, g.kh, stride[1], pad[1]);
  g.Wo = conv_out_len(g.W, g.kw, stride[2], pad[2]);
  return g;
}

void im2col_3d(const double* x, const Conv3dGeom& g, RowMat& cols) {
  cols.setZero(g.rows(), g.ck());
  int64_t row = 0;
  for (int64_t to = 0; to < g.To; ++to) {
    const int64_t t0 = to * g.stride[0] - g.pad[0];
    for (int64_t ho = 0; ho < g.Ho; ++ho) {
      const int64_t h0 = ho * g.stride[1] - g.pad[1];
      for (int64_t wo = 0; wo < g.Wo; ++wo, ++row) {
        const int64_t w0 = wo * g.stride[2] - g.pad[2];
        double* dst = cols.data() + row * g.ck();
        for (int64_t c = 0; c < g.C; ++c) {
          const double* xc = x + c * g.T * g.H * g.W;
          for (int64_t dt = 0; dt < g.kt; ++dt) {
            const int64_t t = t0 + dt;
            if (t < 0 || t >= g.T) {
              dst += g.kh * g.kw;
              continue;
            }
            const double* xt = xc + t * g.H * g.W;
            for (int64_t dh = 0; dh < g.kh; ++dh) {
              const int64_t h = h0 + dh;
              if (h < 0 || h >= g.H) {
                dst += g.kw;
                continue;
              }
              const double* xh = xt + h * g.W;
              for (int64_t dw = 0; dw < g.kw; ++dw) {
                const int64_t ww = w0 + dw;
                if (ww >= 0 && ww < g.W) *dst = xh[ww];
                ++dst;
              }
            }
          }
        }
      }
    }
  }
}

void col2im_3d(const RowMat& cols, const Conv3dGeom& g, double* x) {
  int64_t row = 0;
  for (int64_t to = 0; to < g.To; ++to) {
    const int64_t t0 = to * g.stride[0] - g.pad[0];
    for (int64_t ho = 0; ho < g.Ho; ++ho) {
      const int64_t h0 = ho * g.stride[1] - g.pad[1];
      for (int64_t wo = 0; wo < g.Wo; ++wo, ++row) {
        const int64_t w0 = wo * g.stride[2] - g.pad[2];
        const double* src = cols.data() + row * g.ck();
        for (int64_t c = 0; c < g.C; ++c) {
          double* xc = x + c * g.T * g.H * g.W;
          for (int64_t dt = 0; dt < g.kt; ++dt) {
            const int64_t t = t0 + dt;
            if (t < 0 || t >= g.T) {
              src += g.kh * g.kw;
              continue;
            }
            double* xt = xc + t * g.H * g.W;
            for (int64_t dh = 0; dh < g.kh; ++dh) {
              const int64_t h = h0 + dh;
              if (h < 0 || h >= g.H) {
                src += g.kw;
                continue;
              }
              double* xh = xt + h * g.W;
              for (int64_t dw = 0; dw < g.kw; ++dw) {
                const int64_t ww = w0 + dw;
                if (ww >= 0 && ww < g.W) xh[ww] += *src;
                ++src;
              }
            }
          }
        }
      }
    }
  }
}

struct Conv3dOp : Op {
  Conv3dOp(std::array<int, 3> stride, std::array<int, 3> pad) : stride_(stride), pad_(pad) {}
  const char* name() const override { return "conv3d"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>& in, Var, Var g) const override {
    Var gx, gw;
    const Shape& xs = in[0].shape();
    const Shape& ws = in[1].shape();
    if (in[0].requires_grad())
      gx = conv3d_dx(g, in[1], stride_, pad_, {xs[2], xs[3], xs[4]});
    if (in[1].requires_grad())
      gw = conv3d_dw(in[0], g, stride_, pad_, {ws[2], ws[3], ws[4]});
    return {gx, gw};
  }
  std::array<int, 3> stride_, pad_;
};

struct Conv3dDxOp : Op {
  const char* name() const override { return "conv3d_dx"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>&, Var, Var) const override {
    fail(ErrorCategory::kInternal, "conv3d_dx: second-order differentiation not supported");
  }
};

struct Conv3dDwOp : Op {
  const char* name() const override { return "conv3d_dw"; }
  std::vector<Var> vjp(Graph&, const std::vector<Var>&, Var, Var) const override {
    fail(ErrorCategory::kInternal, "conv3d_dw: second-order differentiation not supported");
  }
};

}  // namespace

Var conv3d(Var x, Var w, std::array<int, 3> stride, std::array<int, 3> pad) {
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  Conv3dGeom g = conv3d_geom(xv, wv, stride, pad);
  Tensor y({g.M, g.O, g.To, g.Ho, g.Wo});
  Eigen::Map<const RowMat> wm(wv.data(), g.O, g.ck());
  RowMat cols, prod;
  const int64_t rows = g.rows();
  for (int64_t m = 0; m < g.M; ++m) {
    im2col_3d(xv.data() + m * g.C * g.T * g.H * g.W, g, cols);
    prod.noalias() = cols * wm.transpose();  // (rows, O)
    double* ym = y.data() + m * g.O * rows;
    for (int64_t o = 0; o < g.O; ++o)
      for (int64_t r = 0; r < rows; ++r) ym[o * rows + r] = prod(r, o);
  }
  return x.graph()->add_op(std::make_shared<Conv3dOp>(stride, pad), {x, w}, std::move(y));
}

Var conv3d_dx(Var g, Var w, std::array<int, 3> stride, std::array<int, 3> pad,
              std::array<int64_t, 3> in_dims) {
  const Tensor& gv = g.value();
  const Tensor& wv = w.value();
  const int64_t M = gv.dim(0), O = gv.dim(1);
  const int64_t C = wv.dim(1);
  Tensor x_probe({1, C, in_dims[0], in_dims[1], in_dims[2]});
  Conv3dGeom geom = conv3d_geom(x_probe, wv, stride, pad);
  geom.M = M;
  check(gv.dim(2) == geom.To && gv.dim(3) == geom.Ho && gv.dim(4) == geom.Wo,
        ErrorCategory::kShape, "conv3d_dx: geometry mismatch");
  Tensor y({M, C, in_dims[0], in_dims[1], in_dims[2]});
  Eigen::Map<const RowMat> wm(wv.data(), O, geom.ck());
  RowMat dcols;
  const int64_t rows = geom.rows();
  for (int64_t m = 0; m < M; ++m) {
    Eigen::Map<const RowMat> gm(gv.data() + m * O * rows, O, rows);
    dcols.noalias() = gm.transpose() * wm;  // (rows, CK)
    col2im_3d(dcols, geom, y.data() + m * C * in_dims[0] * in_dims[1] * in_dims[2]);
  }
  return g.graph()->add_op(std::make_shared<Conv3dDxOp>(), {g, w}, std::move(y));
}

Var conv3d_dw(Var x, Var g, std::array<int, 3> stride, std::array<int, 3> pad,
              std::array<int64_t, 3> kernel) {
  const Tensor& xv = x.value();
  const Tensor& gv = g.value();
  const int64_t M = xv.dim(0), C = xv.dim(1);
  const int64_t O = gv.dim(1);
  Tensor w_probe({O, C, kernel[0], kernel[1], kernel[2]});
  Conv3dGeom geom = conv3d_geom(xv, w_probe, stride, pad);
  check(gv.dim(0) == M && gv.dim(2) == geom.To && gv.dim(3) == geom.Ho && gv.dim(4) == geom.Wo,
        ErrorCategory::kShape, "conv3d_dw: geometry mismatch");
  Tensor y({O, C, kernel[0], kernel[1], kernel[2]});
  Eigen::Map<RowMat> ym(y.data(), O, geom.ck());
  RowMat cols;
  const int64_t rows = geom.rows();
  for (int64_t m = 0; m < M; ++m) {
    im2col_3d(xv.data() + m * C * geom.T * geom.H * geom.W, geom, cols);
    Eigen::Map<const RowMat> gm(gv.data() + m * O * rows, O, rows);
    ym.noalias() += gm * cols;
  }
  return x.graph()->add_op(std::make_shared<Conv3dDwOp>(), {x, g}, std::move(y));
}

}  // namespace ops
}  // namespace lipsynth
