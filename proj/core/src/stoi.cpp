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

#include <algorithm>
#include <cmath>
#include <array>
#include <complex>
#include <vector>

#include "lipsynth/dsp.hpp"
#include "lipsynth/error.hpp"
#include "lipsynth/metrics.hpp"

namespace lipsynth {

namespace {

// Standard STOI constants.
constexpr int kFs = 10000;          // analysis rate
constexpr int64_t kFrameLen = 256;  // 25.6 ms
constexpr int64_t kHop = 128;
constexpr int64_t kNfft = 512;
constexpr int kBands = 15;
constexpr double kFirstCenter = 150.0;
constexpr int kSegFrames = 30;       // 384 ms
constexpr double kDynRangeDb = 40.0; // silent-frame removal
constexpr double kBetaDb = -15.0;    // clipping SDR bound

struct Frames {
  // magnitude spectra per frame: frames x (kNfft/2+1)
  std::vector<std::vector<double>> mag;
  std::vector<double> energy;  // windowed frame energy
};

Frames analyze(const std::vector<double>& x) {
  Frames out;
  const auto window = dsp::hann_window(kFrameLen);
  const int64_t n_frames = dsp::frame_count(static_cast<int64_t>(x.size()), kFrameLen, kHop);
  out.mag.reserve(static_cast<size_t>(std::max<int64_t>(n_frames, 0)));
  std::vector<std::complex<double>> buf;
  for (int64_t f = 0; f < n_frames; ++f) {
    buf.assign(kNfft, {0.0, 0.0});
    double energy = 0.0;
    for (int64_t i = 0; i < kFrameLen; ++i) {
      const double v = x[static_cast<size_t>(f * kHop + i)] * window[static_cast<size_t>(i)];
      buf[static_cast<size_t>(i)] = v;
      energy += v * v;
    }
    dsp::fft(buf);
    std::vector<double> mag(static_cast<size_t>(kNfft / 2 + 1));
    for (size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(buf[k]);
    out.mag.push_back(std::move(mag));
    out.energy.push_back(energy);
  }
  return out;
}

}  // namespace

double stoi_score(const WaveformClip& ref, const WaveformClip& gen) {
  check(ref.sample_rate == gen.sample_rate, ErrorCategory::kMetric,
        "stoi: sample rate mismatch");
  check(ref.samples.size() == gen.samples.size(), ErrorCategory::kMetric,
        "stoi: signals must have equal length");

  const auto x10 = dsp::resample(ref.samples, ref.sample_rate, kFs);
  const auto y10 = dsp::resample(gen.samples, gen.sample_rate, kFs);

  Frames fx = analyze(x10);
  Frames fy = analyze(y10);
  const size_t n_frames = std::min(fx.mag.size(), fy.mag.size());
  check(n_frames >= 1, ErrorCategory::kMetric, "stoi: signal shorter than one frame");

  // Silent-frame removal based on the reference energy, applied to both.
  double max_e = 0.0;
  for (size_t f = 0; f < n_frames; ++f) max_e = std::max(max_e, fx.energy[f]);
  check(max_e > 0.0, ErrorCategory::kMetric, "stoi: reference is all zeros");
  const double tolerance = max_e * std::pow(10.0, -kDynRangeDb / 10.0);
  std::vector<size_t> kept;
  for (size_t f = 0; f < n_frames; ++f) {
    if (fx.energy[f] >= tolerance) kept.push_back(f);
  }
  check(kept.size() >= static_cast<size_t>(kSegFrames), ErrorCategory::kMetric,
        "stoi: too little speech-active signal after silence removal (need >= 384 ms)");

  // One-third-octave band magnitudes over kept frames.
  const int64_t bins = kNfft / 2 + 1;
  std::vector<std::array<int64_t, 2>> band_edges;
  for (int j = 0; j < kBands; ++j) {
    const double fc = kFirstCenter * std::pow(2.0, static_cast<double>(j) / 3.0);
    const double f_lo = fc / std::pow(2.0, 1.0 / 6.0);
    const double f_hi = fc * std::pow(2.0, 1.0 / 6.0);
    int64_t k_lo = static_cast<int64_t>(std::ceil(f_lo * kNfft / kFs));
    int64_t k_hi = static_cast<int64_t>(std::floor(f_hi * kNfft / kFs));
    k_lo = std::clamp<int64_t>(k_lo, 0, bins - 1);
    k_hi = std::clamp<int64_t>(k_hi, 0, bins - 1);
    band_edges.push_back({k_lo, k_hi});
  }

  auto band_energy = [&](const Frames& fr, size_t frame, int band) {
    double acc = 0.0;
    for (int64_t k = band_edges[static_cast<size_t>(band)][0];
         k <= band_edges[static_cast<size_t>(band)][1]; ++k) {
      const double m = fr.mag[frame][static_cast<size_t>(k)];
      acc += m * m;
    }
    return std::sqrt(acc);
  };

  const size_t n_kept = kept.size();
  std::vector<std::vector<double>> X(kBands, std::vector<double>(n_kept));
  std::vector<std::vector<double>> Y(kBands, std::vector<double>(n_kept));
  for (size_t f = 0; f < n_kept; ++f) {
    for (int j = 0; j < kBands; ++j) {
      X[static_cast<size_t>(j)][f] = band_energy(fx, kept[f], j);
      Y[static_cast<size_t>(j)][f] = band_energy(fy, kept[f], j);
    }
  }

  const double clip_factor = 1.0 + std::pow(10.0, -kBetaDb / 20.0);
  double acc = 0.0;
  int64_t count = 0;
  std::vector<double> xs(kSegFrames), ys(kSegFrames);
  for (size_t m = kSegFrames; m <= n_kept; ++m) {
    for (int j = 0; j < kBands; ++j) {
      double ex = 0.0, ey = 0.0;
      for (int i = 0; i < kSegFrames; ++i) {
        xs[static_cast<size_t>(i)] = X[static_cast<size_t>(j)][m - kSegFrames + i];
        ys[static_cast<size_t>(i)] = Y[static_cast<size_t>(j)][m - kSegFrames + i];
        ex += xs[static_cast<size_t>(i)] * xs[static_cast<size_t>(i)];
        ey += ys[static_cast<size_t>(i)] * ys[static_cast<size_t>(i)];
      }
      const double alpha = ey > 0.0 ? std::sqrt(ex / ey) : 0.0;
      double mx = 0.0, my = 0.0;
      for (int i = 0; i < kSegFrames; ++i) {
        ys[static_cast<size_t>(i)] =
            std::min(alpha * ys[static_cast<size_t>(i)], clip_factor * xs[static_cast<size_t>(i)]);
        mx += xs[static_cast<size_t>(i)];
        my += ys[static_cast<size_t>(i)];
      }
      mx /= kSegFrames;
      my /= kSegFrames;
      double sxy = 0.0, sxx = 0.0, syy = 0.0;
      for (int i = 0; i < kSegFrames; ++i) {
        const double dx = xs[static_cast<size_t>(i)] - mx;
        const double dy = ys[static_cast<size_t>(i)] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
      }
      const double d = (sxx > 0.0 && syy > 0.0) ? sxy / std::sqrt(sxx * syy) : 0.0;
      acc += d;
      ++count;
    }
  }
  return acc / static_cast<double>(count);
}

}  // namespace lipsynth
