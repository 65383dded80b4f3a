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

#include "lipsynth/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "lipsynth/error.hpp"

namespace lipsynth {

std::array<double, 10> canonical_anchor_template() {
  // x, y pairs in the 128-high by 96-wide aligned frame: left/right eye
  // corners at y = 40 and the nose tip at y = 64, so the mouth falls into
  // the bottom-half crop.
  return {18.0, 40.0, 38.0, 40.0, 58.0, 40.0, 78.0, 40.0, 48.0, 64.0};
}

SimilarityTransform SimilarityTransform::inverse() const {
  const double det = a * a + b * b;
  check(det > 1e-12, ErrorCategory::kData, "similarity transform is not invertible");
  SimilarityTransform inv;
  inv.a = a / det;
  inv.b = -b / det;
  inv.tx = (-a * tx - b * ty) / det;
  inv.ty = (b * tx - a * ty) / det;
  return inv;
}

SimilarityTransform fit_similarity(const std::vector<std::array<double, 2>>& src,
                                   const std::vector<std::array<double, 2>>& dst) {
  check(src.size() == dst.size() && src.size() >= 2, ErrorCategory::kData,
        "similarity fit needs matching point sets of size >= 2");
  const double n = static_cast<double>(src.size());
  double mx = 0, my = 0, ux = 0, uy = 0;
  for (size_t i = 0; i < src.size(); ++i) {
    mx += src[i][0];
    my += src[i][1];
    ux += dst[i][0];
    uy += dst[i][1];
  }
  mx /= n;
  my /= n;
  ux /= n;
  uy /= n;

  double d = 0, dot = 0, cross = 0;
  double spread = 0;  // collinearity detector: magnitude of second moment minor
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < src.size(); ++i) {
    const double px = src[i][0] - mx;
    const double py = src[i][1] - my;
    const double qx = dst[i][0] - ux;
    const double qy = dst[i][1] - uy;
    d += px * px + py * py;
    dot += px * qx + py * qy;
    cross += px * qy - py * qx;
    sxx += px * px;
    sxy += px * py;
    syy += py * py;
  }
  check(d > 1e-9, ErrorCategory::kData,
        "degenerate anchor geometry: points are coincident");
  spread = sxx * syy - sxy * sxy;
  check(spread > 1e-9 * d * d / n, ErrorCategory::kData,
        "degenerate anchor geometry: points are collinear");

  SimilarityTransform t;
  t.a = dot / d;
  t.b = cross / d;
  t.tx = ux - (t.a * mx - t.b * my);
  t.ty = uy - (t.b * mx + t.a * my);
  return t;
}

namespace {

double bilinear_sample(const double* plane, int64_t height, int64_t width, double x, double y) {
  // Border clamp.
  x = std::clamp(x, 0.0, static_cast<double>(width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(height - 1));
  const int64_t x0 = static_cast<int64_t>(std::floor(x));
  const int64_t y0 = static_cast<int64_t>(std::floor(y));
  const int64_t x1 = std::min(x0 + 1, width - 1);
  const int64_t y1 = std::min(y0 + 1, height - 1);
  const double fx = x - static_cast<double>(x0);
  const double fy = y - static_cast<double>(y0);
  const double v00 = plane[y0 * width + x0];
  const double v01 = plane[y0 * width + x1];
  const double v10 = plane[y1 * width + x0];
  const double v11 = plane[y1 * width + x1];
  return (1 - fy) * ((1 - fx) * v00 + fx * v01) + fy * ((1 - fx) * v10 + fx * v11);
}

}  // namespace

Tensor preprocess_frames(const Tensor& raw_frames, const std::vector<FrameAnchors>& anchors,
                         const PreprocessConfig& config) {
  check(config.anchor_count == 5, ErrorCategory::kConfig, "anchor_count must be 5");
  check(raw_frames.rank() == 4, ErrorCategory::kShape,
        "preprocess_frames: frames must be (T, C, H, W), got " + shape_str(raw_frames.shape()));
  const int64_t T = raw_frames.dim(0), C = raw_frames.dim(1);
  const int64_t H = raw_frames.dim(2), W = raw_frames.dim(3);
  check(T >= 1, ErrorCategory::kShape, "preprocess_frames: no frames");
  check(anchors.size() == static_cast<size_t>(T), ErrorCategory::kData,
        "preprocess_frames: need 5 anchors per frame (" + std::to_string(anchors.size()) +
            " anchor rows for " + std::to_string(T) + " frames)");
  const bool to_gray = (config.channels == 1 && C == 3);
  check(to_gray || config.channels == C, ErrorCategory::kConfig,
        "channels config incompatible with raw frame channels");

  const auto tmpl = canonical_anchor_template();
  std::vector<std::array<double, 2>> dst_pts(5);
  for (int i = 0; i < 5; ++i) dst_pts[static_cast<size_t>(i)] = {tmpl[2 * i], tmpl[2 * i + 1]};

  const int64_t out_h = config.resize_h / 2;  // bottom half
  const int64_t out_w = config.resize_w;
  const int64_t out_c = config.channels;
  Tensor out({T, out_c, out_h, out_w});

  std::vector<double> gray(static_cast<size_t>(H * W));
  for (int64_t t = 0; t < T; ++t) {
    std::vector<std::array<double, 2>> src_pts(5);
    for (int i = 0; i < 5; ++i)
      src_pts[static_cast<size_t>(i)] = {anchors[static_cast<size_t>(t)][2 * i],
                                         anchors[static_cast<size_t>(t)][2 * i + 1]};
    const SimilarityTransform to_canonical = fit_similarity(src_pts, dst_pts);
    const SimilarityTransform back = to_canonical.inverse();

    for (int64_t c = 0; c < out_c; ++c) {
      const double* plane = nullptr;
      if (to_gray) {
        const double* r = raw_frames.data() + (t * C + 0) * H * W;
        const double* gch = raw_frames.data() + (t * C + 1) * H * W;
        const double* bch = raw_frames.data() + (t * C + 2) * H * W;
        for (int64_t i = 0; i < H * W; ++i)
          gray[static_cast<size_t>(i)] = 0.299 * r[i] + 0.587 * gch[i] + 0.114 * bch[i];
        plane = gray.data();
      } else {
        plane = raw_frames.data() + (t * C + c) * H * W;
      }
      double* dst = out.data() + (t * out_c + c) * out_h * out_w;
      for (int64_t y = 0; y < out_h; ++y) {
        // Canonical row in the full 128-high frame; bottom half starts at 64.
        const double cy = static_cast<double>(y + config.resize_h / 2);
        for (int64_t x = 0; x < out_w; ++x) {
          const auto s = back.apply(static_cast<double>(x), cy);
          const double v = bilinear_sample(plane, H, W, s[0], s[1]);
          dst[y * out_w + x] = 2.0 * v - 1.0;
        }
      }
    }
  }
  return out;
}

}  // namespace lipsynth
