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

#include "lipsynth/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "lipsynth/dsp.hpp"
#include "lipsynth/error.hpp"

namespace lipsynth {

Tensor mel_cepstrum(const WaveformClip& clip, const MelCepstrumConfig& config) {
  check(clip.sample_rate >= 8000, ErrorCategory::kMetric,
        "mel_cepstrum: sample rate must be >= 8 kHz");
  const int64_t win =
      static_cast<int64_t>(std::llround(config.window_ms * clip.sample_rate / 1000.0));
  const int64_t hop =
      static_cast<int64_t>(std::llround(config.hop_ms * clip.sample_rate / 1000.0));
  check(static_cast<int64_t>(clip.samples.size()) >= win, ErrorCategory::kMetric,
        "mel_cepstrum: clip shorter than one analysis window");
  const Tensor logmel = dsp::log_mel_frames(clip.samples, clip.sample_rate, win, hop,
                                            config.mel_bands, config.energy_floor);
  const int64_t frames = logmel.dim(0);
  // DCT-II rows 1..n_coeffs (c0 carries overall energy and is excluded).
  const Tensor dct = dsp::dct2_matrix(config.mel_bands, config.n_coeffs + 1);
  Tensor out({frames, config.n_coeffs});
  for (int64_t f = 0; f < frames; ++f) {
    for (int64_t k = 1; k <= config.n_coeffs; ++k) {
      double acc = 0.0;
      for (int64_t m = 0; m < config.mel_bands; ++m)
        acc += dct[k * config.mel_bands + m] * logmel[f * config.mel_bands + m];
      out[f * config.n_coeffs + (k - 1)] = acc;
    }
  }
  return out;
}

double mcd_db(const WaveformClip& ref, const WaveformClip& gen, const MelCepstrumConfig& config) {
  check(ref.sample_rate == gen.sample_rate, ErrorCategory::kMetric,
        "mcd: sample rate mismatch");
  const Tensor a = mel_cepstrum(ref, config);
  const Tensor b = mel_cepstrum(gen, config);
  const int64_t fa = a.dim(0), fb = b.dim(0);
  check(std::llabs(fa - fb) <= 1, ErrorCategory::kMetric,
        "mcd: frame counts differ by more than one (" + std::to_string(fa) + " vs " +
            std::to_string(fb) + ")");
  const int64_t frames = std::min(fa, fb);
  const int64_t d = config.n_coeffs;
  const double scale = 10.0 / std::log(10.0);
  double total = 0.0;
  for (int64_t f = 0; f < frames; ++f) {
    double sq = 0.0;
    for (int64_t k = 0; k < d; ++k) {
      const double diff = a[f * d + k] - b[f * d + k];
      sq += diff * diff;
    }
    total += scale * std::sqrt(2.0 * sq);
  }
  return total / static_cast<double>(frames);
}

int64_t edit_distance(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const size_t n = a.size(), m = b.size();
  std::vector<int64_t> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = static_cast<int64_t>(j);
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int64_t>(i);
    for (size_t j = 1; j <= m; ++j) {
      const int64_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double word_error_rate(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  check(!ref.empty(), ErrorCategory::kMetric, "word_error_rate: empty reference");
  return static_cast<double>(edit_distance(ref, hyp)) / static_cast<double>(ref.size());
}

namespace {

double pearson(const std::vector<double>& x, const std::vector<double>& y, size_t n) {
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0 || syy <= 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

AvOffsetResult av_offset(const Tensor& video, const WaveformClip& audio, int search_range) {
  check(video.rank() == 4, ErrorCategory::kMetric, "av_offset: video must be (T, C, H, W)");
  const int64_t T = video.dim(0);
  check(search_range >= 0, ErrorCategory::kMetric, "av_offset: negative search range");
  check(T >= 2 * std::max(search_range, 1), ErrorCategory::kMetric,
        "av_offset: clip shorter than twice the search range");
  const int64_t frame_elems = video.numel() / T;
  const int64_t hop = static_cast<int64_t>(audio.samples.size()) / T;
  check(hop >= 1, ErrorCategory::kMetric, "av_offset: audio shorter than one sample per frame");

  // Mouth-motion energy: mean absolute inter-frame difference.
  std::vector<double> motion(static_cast<size_t>(T), 0.0);
  for (int64_t t = 1; t < T; ++t) {
    double acc = 0.0;
    const double* cur = video.data() + t * frame_elems;
    const double* prev = video.data() + (t - 1) * frame_elems;
    for (int64_t i = 0; i < frame_elems; ++i) acc += std::abs(cur[i] - prev[i]);
    motion[static_cast<size_t>(t)] = acc / static_cast<double>(frame_elems);
  }
  motion[0] = motion[1];

  // Per-frame audio RMS envelope.
  std::vector<double> envelope(static_cast<size_t>(T), 0.0);
  for (int64_t t = 0; t < T; ++t) {
    double acc = 0.0;
    for (int64_t i = t * hop; i < (t + 1) * hop; ++i) {
      const double s = audio.samples[static_cast<size_t>(i)];
      acc += s * s;
    }
    envelope[static_cast<size_t>(t)] = std::sqrt(acc / static_cast<double>(hop));
  }

  std::vector<double> curve;
  curve.reserve(static_cast<size_t>(2 * search_range + 1));
  std::vector<double> xs, ys;
  for (int k = -search_range; k <= search_range; ++k) {
    xs.clear();
    ys.clear();
    for (int64_t t = 0; t < T; ++t) {
      const int64_t u = t + k;
      if (u < 0 || u >= T) continue;
      xs.push_back(motion[static_cast<size_t>(t)]);
      ys.push_back(envelope[static_cast<size_t>(u)]);
    }
    curve.push_back(xs.size() >= 2 ? pearson(xs, ys, xs.size()) : 0.0);
  }

  size_t best = 0;
  for (size_t i = 1; i < curve.size(); ++i) {
    if (curve[i] > curve[best]) best = i;
  }
  std::vector<double> sorted = curve;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[sorted.size() / 2];

  AvOffsetResult r;
  r.offset_frames = static_cast<int>(best) - search_range;
  r.confidence = curve[best] - median;
  return r;
}

void MetricReport::finalize() {
  mean_mcd_db = mean_stoi = mean_av_offset_frames = mean_av_confidence = 0.0;
  double wer_sum = 0.0, pesq_sum = 0.0;
  int64_t wer_n = 0, pesq_n = 0;
  for (const auto& c : clips) {
    mean_mcd_db += c.mcd_db;
    mean_stoi += c.stoi;
    mean_av_offset_frames += c.av_offset_frames;
    mean_av_confidence += c.av_confidence;
    if (c.wer) {
      wer_sum += *c.wer;
      ++wer_n;
    }
    if (c.pesq) {
      pesq_sum += *c.pesq;
      ++pesq_n;
    }
  }
  const double n = static_cast<double>(clips.size());
  if (!clips.empty()) {
    mean_mcd_db /= n;
    mean_stoi /= n;
    mean_av_offset_frames /= n;
    mean_av_confidence /= n;
  }
  mean_wer = wer_n > 0 ? std::optional<double>(wer_sum / static_cast<double>(wer_n)) : std::nullopt;
  mean_pesq =
      pesq_n > 0 ? std::optional<double>(pesq_sum / static_cast<double>(pesq_n)) : std::nullopt;
}

}  // namespace lipsynth
