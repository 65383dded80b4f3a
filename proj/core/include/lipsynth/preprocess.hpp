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

#ifndef LIPSYNTH_PREPROCESS_H_
#define LIPSYNTH_PREPROCESS_H_

#include <array>
#include <vector>

#include "lipsynth/tensor.hpp"

namespace lipsynth {

// Five face anchor points per frame: outer/inner eye corners and nose tip,
// stored as x1 y1 ... x5 y5 in source-image pixel coordinates.
using FrameAnchors = std::array<double, 10>;

struct PreprocessConfig {
  int anchor_count = 5;  // fixed by the alignment scheme
  int resize_h = 128;
  int resize_w = 96;
  int channels = 1;  // 1 keeps luma only; 3 keeps RGB
};

// The canonical 5-point template in 128x96 alignment coordinates.
std::array<double, 10> canonical_anchor_template();

// 2-D similarity transform y = s R x + t, stored as the four affine numbers.
struct SimilarityTransform {
  double a = 1.0, b = 0.0;  // sR = [[a, -b], [b, a]]
  double tx = 0.0, ty = 0.0;

  std::array<double, 2> apply(double x, double y) const {
    return {a * x - b * y + tx, b * x + a * y + ty};
  }
  SimilarityTransform inverse() const;
};

// Least-squares similarity fit mapping src points onto dst points.
// Degenerate geometry (coincident or collinear points) is rejected.
SimilarityTransform fit_similarity(const std::vector<std::array<double, 2>>& src,
                                   const std::vector<std::array<double, 2>>& dst);

// Full preprocessing: per frame, fit the anchor similarity onto the
// canonical template, warp into 128x96 (bilinear, border clamp), keep the
// bottom half (64x96), and map pixel values from [0, 1] to [-1, 1].
// raw_frames: (T, C, H, W) with values in [0, 1]. Output: (T, channels,
// resize_h/2, resize_w).
Tensor preprocess_frames(const Tensor& raw_frames, const std::vector<FrameAnchors>& anchors,
                         const PreprocessConfig& config);

}  // namespace lipsynth

#endif  // LIPSYNTH_PREPROCESS_H_
