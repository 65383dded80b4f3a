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

#include "lipsynth/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lipsynth/error.hpp"

namespace lipsynth::dsp {

namespace {
constexpr double kPi = 3.14159265358979323846;

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}
}  // namespace

void fft(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  check(n > 0 && (n & (n - 1)) == 0, ErrorCategory::kInternal, "fft: size must be a power of two");
  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * kPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    for (auto& v : a) v /= static_cast<double>(n);
  }
}

int64_t next_pow2(int64_t n) {
  int64_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> hann_window(int64_t n) {
  std::vector<double> w(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i)
    w[static_cast<size_t>(i)] =
        0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
  return w;
}

int64_t frame_count(int64_t len, int64_t win, int64_t hop) {
  if (len < win) return 0;
  return (len - win) / hop + 1;
}

std::vector<double> power_spectrum(const std::vector<double>& frame, int64_t nfft) {
  check((nfft & (nfft - 1)) == 0, ErrorCategory::kInternal, "power_spectrum: nfft not pow2");
  std::vector<std::complex<double>> buf(static_cast<size_t>(nfft));
  for (size_t i = 0; i < frame.size() && i < static_cast<size_t>(nfft); ++i) buf[i] = frame[i];
  fft(buf);
  std::vector<double> p(static_cast<size_t>(nfft / 2 + 1));
  for (size_t k = 0; k < p.size(); ++k) p[k] = std::norm(buf[k]);
  return p;
}

Tensor mel_filterbank(int64_t n_mels, int64_t nfft, double sample_rate, double fmin, double fmax) {
  const int64_t bins = nfft / 2 + 1;
  Tensor fb({n_mels, bins});
  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);
  std::vector<double> centers(static_cast<size_t>(n_mels) + 2);
  for (size_t i = 0; i < centers.size(); ++i) {
    double mel = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                              static_cast<double>(n_mels + 1);
    centers[i] = mel_to_hz(mel);
  }
  for (int64_t m = 0; m < n_mels; ++m) {
    const double f_lo = centers[static_cast<size_t>(m)];
    const double f_c = centers[static_cast<size_t>(m) + 1];
    const double f_hi = centers[static_cast<size_t>(m) + 2];
    for (int64_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(nfft);
      double wgt = 0.0;
      if (f >= f_lo && f <= f_c && f_c > f_lo) {
        wgt = (f - f_lo) / (f_c - f_lo);
      } else if (f > f_c && f <= f_hi && f_hi > f_c) {
        wgt = (f_hi - f) / (f_hi - f_c);
      }
      fb[m * bins + k] = wgt;
    }
  }
  return fb;
}

Tensor log_mel_frames(const std::vector<double>& x, double sample_rate, int64_t win_len,
                      int64_t hop_len, int64_t n_mels, double floor_energy) {
  const int64_t frames = frame_count(static_cast<int64_t>(x.size()), win_len, hop_len);
  check(frames >= 1, ErrorCategory::kMetric, "log_mel_frames: signal shorter than one window");
  const int64_t nfft = next_pow2(win_len);
  const int64_t bins = nfft / 2 + 1;
  const auto window = hann_window(win_len);
  const Tensor fb = mel_filterbank(n_mels, nfft, sample_rate, 0.0, sample_rate / 2.0);
  Tensor out({frames, n_mels});
  std::vector<double> frame(static_cast<size_t>(win_len));
  for (int64_t f = 0; f < frames; ++f) {
    const int64_t off = f * hop_len;
    for (int64_t i = 0; i < win_len; ++i)
      frame[static_cast<size_t>(i)] =
          x[static_cast<size_t>(off + i)] * window[static_cast<size_t>(i)];
    const auto power = power_spectrum(frame, nfft);
    for (int64_t m = 0; m < n_mels; ++m) {
      double e = 0.0;
      for (int64_t k = 0; k < bins; ++k) e += fb[m * bins + k] * power[static_cast<size_t>(k)];
      out[f * n_mels + m] = std::log(std::max(e, floor_energy));
    }
  }
  return out;
}

Tensor dct2_matrix(int64_t n_in, int64_t n_out) {
  Tensor m({n_out, n_in});
  const double scale = std::sqrt(2.0 / static_cast<double>(n_in));
  for (int64_t k = 0; k < n_out; ++k)
    for (int64_t n = 0; n < n_in; ++n)
      m[k * n_in + n] = scale * std::cos(kPi * static_cast<double>(k) *
                                         (static_cast<double>(n) + 0.5) /
                                         static_cast<double>(n_in));
  return m;
}

std::pair<Tensor, Tensor> dft_basis(int64_t win_len, int64_t nfft) {
  const int64_t bins = nfft / 2 + 1;
  Tensor re({win_len, bins});
  Tensor im({win_len, bins});
  for (int64_t n = 0; n < win_len; ++n) {
    for (int64_t k = 0; k < bins; ++k) {
      const double ang =
          2.0 * kPi * static_cast<double>(k) * static_cast<double>(n) / static_cast<double>(nfft);
      re[n * bins + k] = std::cos(ang);
      im[n * bins + k] = -std::sin(ang);
    }
  }
  return {std::move(re), std::move(im)};
}

std::vector<double> resample(const std::vector<double>& x, int sr_in, int sr_out) {
  check(sr_in > 0 && sr_out > 0, ErrorCategory::kMetric, "resample: bad sample rates");
  if (sr_in == sr_out) return x;
  if (x.empty()) return {};
  const int g = std::gcd(sr_in, sr_out);
  const int64_t p = sr_out / g;  // upsample factor
  const int64_t q = sr_in / g;   // downsample factor
  const int64_t out_len = (static_cast<int64_t>(x.size()) * p) / q;
  // Kernel cutoff relative to the input Nyquist; widen the support when
  // downsampling so the transition band stays proportional.
  const double ratio = std::min(1.0, static_cast<double>(p) / static_cast<double>(q));
  const double radius = 16.0 / ratio;
  std::vector<double> y(static_cast<size_t>(out_len));
  for (int64_t m = 0; m < out_len; ++m) {
    const double t = static_cast<double>(m) * static_cast<double>(q) / static_cast<double>(p);
    const int64_t n0 = static_cast<int64_t>(std::ceil(t - radius));
    const int64_t n1 = static_cast<int64_t>(std::floor(t + radius));
    double acc = 0.0;
    for (int64_t n = std::max<int64_t>(n0, 0);
         n <= std::min<int64_t>(n1, static_cast<int64_t>(x.size()) - 1); ++n) {
      const double d = t - static_cast<double>(n);
      // Hann-windowed sinc.
      const double w = 0.5 + 0.5 * std::cos(kPi * d / radius);
      acc += x[static_cast<size_t>(n)] * ratio * sinc(ratio * d) * w;
    }
    y[static_cast<size_t>(m)] = acc;
  }
  return y;
}

}  // namespace lipsynth::dsp
