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

#include <cmath>
#include <complex>

#include "doctest.h"
#include "lipsynth/dsp.hpp"
#include "lipsynth/rng.hpp"

using namespace lipsynth;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("fft matches a direct DFT oracle") {
  Rng rng(3);
  const size_t n = 64;
  std::vector<std::complex<double>> x(n);
  for (auto& v : x) v = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  auto a = x;
  dsp::fft(a);
  for (size_t k = 0; k < n; ++k) {
    std::complex<double> ref{0, 0};
    for (size_t t = 0; t < n; ++t) {
      const double ang = -2.0 * kPi * static_cast<double>(k * t) / static_cast<double>(n);
      ref += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    CHECK(std::abs(a[k] - ref) < 1e-9);
  }
  // Inverse recovers the input.
  dsp::fft(a, true);
  for (size_t t = 0; t < n; ++t) CHECK(std::abs(a[t] - x[t]) < 1e-12);
}

TEST_CASE("frame count formula") {
  CHECK(dsp::frame_count(8000, 200, 80) == 98);  // 1 s at 8 kHz, 25 ms / 10 ms
  CHECK(dsp::frame_count(200, 200, 80) == 1);
  CHECK(dsp::frame_count(199, 200, 80) == 0);
  CHECK(dsp::frame_count(280, 200, 80) == 2);
}

TEST_CASE("dct2 matrix against direct summation") {
  Rng rng(5);
  const int64_t n = 40;
  std::vector<double> v(static_cast<size_t>(n));
  for (auto& x : v) x = rng.uniform(-2, 2);
  const Tensor m = dsp::dct2_matrix(n, 14);
  for (int64_t k = 0; k < 14; ++k) {
    double direct = 0.0;
    for (int64_t i = 0; i < n; ++i)
      direct += v[static_cast<size_t>(i)] *
                std::cos(kPi * static_cast<double>(k) * (static_cast<double>(i) + 0.5) /
                         static_cast<double>(n));
    direct *= std::sqrt(2.0 / static_cast<double>(n));
    double viamat = 0.0;
    for (int64_t i = 0; i < n; ++i) viamat += m[k * n + i] * v[static_cast<size_t>(i)];
    CHECK(std::abs(viamat - direct) <= 1e-9 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("mel filterbank partitions energy sensibly") {
  const Tensor fb = dsp::mel_filterbank(10, 256, 8000, 0, 4000);
  CHECK(fb.shape() == Shape{10, 129});
  CHECK(fb.min() >= 0.0);
  CHECK(fb.max() <= 1.0 + 1e-12);
  // Every filter has some support.
  for (int64_t m = 0; m < 10; ++m) {
    double s = 0;
    for (int64_t k = 0; k < 129; ++k) s += fb[m * 129 + k];
    CHECK(s > 0.0);
  }
}

TEST_CASE("resampler preserves an in-band tone") {
  const int sr_in = 8000, sr_out = 10000;
  const double f = 440.0;
  std::vector<double> x(8000);
  for (size_t i = 0; i < x.size(); ++i)
    x[i] = std::sin(2 * kPi * f * static_cast<double>(i) / sr_in);
  const auto y = dsp::resample(x, sr_in, sr_out);
  CHECK(y.size() == 10000);
  // Compare against the ideal resampled tone away from the edges.
  double err = 0, ref = 0;
  for (size_t i = 500; i + 500 < y.size(); ++i) {
    const double ideal = std::sin(2 * kPi * f * static_cast<double>(i) / sr_out);
    err += (y[i] - ideal) * (y[i] - ideal);
    ref += ideal * ideal;
  }
  CHECK(err / ref < 1e-4);
}

TEST_CASE("log mel frames shape and silence floor") {
  std::vector<double> silence(1600, 0.0);
  const Tensor lm = dsp::log_mel_frames(silence, 8000, 200, 80, 40);
  CHECK(lm.dim(0) == dsp::frame_count(1600, 200, 80));
  CHECK(lm.dim(1) == 40);
  // All bands at the floor.
  for (int64_t i = 0; i < lm.numel(); ++i) CHECK(lm[i] == doctest::Approx(std::log(1e-10)));
}
