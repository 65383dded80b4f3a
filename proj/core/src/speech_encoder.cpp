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

#include "lipsynth/speech_encoder.hpp"

#include <cmath>

#include "lipsynth/checkpoint.hpp"
#include "lipsynth/dsp.hpp"

namespace lipsynth {

int64_t SpeechEncoderConfig::window_samples() const {
  return static_cast<int64_t>(std::llround(window_ms * sample_rate / 1000.0));
}

int64_t SpeechEncoderConfig::hop_samples() const {
  return static_cast<int64_t>(std::llround(hop_ms * sample_rate / 1000.0));
}

SpeechEncoder::SpeechEncoder(SpeechEncoderConfig config) : config_(std::move(config)) {
  check(config_.sample_rate > 0, ErrorCategory::kConfig, "speech encoder: bad sample rate");
  check(!config_.conv_channels.empty(), ErrorCategory::kConfig,
        "speech encoder: need at least one conv layer");
  const int64_t win = config_.window_samples();
  const int64_t hop = config_.hop_samples();
  check(win >= 2 && hop >= 1, ErrorCategory::kConfig, "speech encoder: window too small");
  const int64_t nfft = dsp::next_pow2(win);
  const int64_t bins = nfft / 2 + 1;

  const auto w = dsp::hann_window(win);
  window_ = Tensor({1, win}, std::vector<double>(w.begin(), w.end()));
  auto [re, im] = dsp::dft_basis(win, nfft);
  basis_re_ = std::move(re);
  basis_im_ = std::move(im);
  // (mel_bands, bins) -> (bins, mel_bands) for right multiplication.
  Tensor fb = dsp::mel_filterbank(config_.mel_bands, nfft, config_.sample_rate, 0.0,
                                  config_.sample_rate / 2.0);
  mel_ = Tensor({bins, config_.mel_bands});
  for (int64_t m = 0; m < config_.mel_bands; ++m)
    for (int64_t k = 0; k < bins; ++k) mel_[k * config_.mel_bands + m] = fb[m * bins + k];

  Rng rng(config_.seed);
  int64_t in_ch = config_.mel_bands;
  for (size_t i = 0; i < config_.conv_channels.size(); ++i) {
    Conv1dLayer conv;
    conv.init(in_ch, config_.conv_channels[i], 3, 1, 1, rng);
    convs_.push_back(std::move(conv));
    in_ch = config_.conv_channels[i];
  }
}

Var SpeechEncoder::encode(Binding& bind, Var waveforms) const {
  const Shape s = waveforms.shape();
  check(s.size() == 2, ErrorCategory::kShape,
        "speech encoder: expected (B, L), got " + shape_str(s));
  const int64_t B = s[0], L = s[1];
  const int64_t win = config_.window_samples();
  const int64_t hop = config_.hop_samples();
  const int64_t frames = dsp::frame_count(L, win, hop);
  check(frames >= 1, ErrorCategory::kShape,
        "speech encoder: waveform shorter than one analysis window");

  Graph& g = bind.graph();
  // Framing via gather: (B, L) -> (B, frames*win) -> (B*frames, win).
  auto idx = std::make_shared<std::vector<int64_t>>();
  idx->reserve(static_cast<size_t>(frames * win));
  for (int64_t f = 0; f < frames; ++f)
    for (int64_t i = 0; i < win; ++i) idx->push_back(f * hop + i);
  Var framed = ops::reshape(ops::gather_last(waveforms, idx), {B * frames, win});
  Var windowed = ops::mul(framed, ops::broadcast_from(g.constant(window_), {B * frames, win}));

  // Power spectrum through the DFT bases, then mel energies and log.
  Var re = ops::matmul(windowed, g.constant(basis_re_));
  Var im = ops::matmul(windowed, g.constant(basis_im_));
  Var power = ops::add(ops::square(re), ops::square(im));
  Var mel = ops::matmul(power, g.constant(mel_));
  Var logmel = ops::log(ops::clamp_min(mel, config_.log_floor));  // (B*frames, mel)

  // (B*frames, M) -> (B, M, frames) for time-axis convolutions.
  Var t = ops::transpose2d(logmel);                                   // (M, B*frames)
  Var x = ops::transpose01(ops::reshape(t, {config_.mel_bands, B, frames}));  // (B, M, F)

  for (size_t i = 0; i < convs_.size(); ++i) {
    x = convs_[i].forward(bind, x);
    x = (i + 1 < convs_.size()) ? ops::leaky_relu(x, 0.2) : ops::tanh(x);
  }
  return x;  // (B, feature_dim, frames)
}

Tensor SpeechEncoder::encode_clip(const WaveformClip& clip) const {
  check(clip.sample_rate == config_.sample_rate, ErrorCategory::kShape,
        "speech encoder: clip sample rate " + std::to_string(clip.sample_rate) +
            " does not match configured " + std::to_string(config_.sample_rate));
  Graph g;
  Binding bind(g, /*trainable=*/false);
  Tensor wave({1, static_cast<int64_t>(clip.samples.size())}, clip.samples);
  return encode(bind, g.constant(std::move(wave))).value();
}

std::vector<Tensor*> SpeechEncoder::parameters() {
  std::vector<Tensor*> out;
  for (auto& c : convs_) c.collect(out);
  return out;
}

uint64_t SpeechEncoder::parameter_checksum() const {
  std::vector<Tensor> copies;
  for (const auto& c : convs_) {
    copies.push_back(c.w);
    copies.push_back(c.b);
  }
  return tensors_checksum(copies);
}

void SpeechEncoder::save_weights(const std::string& path) const {
  Checkpoint ck;
  ck.config_json = "{\"kind\":\"speech_encoder\"}";
  for (size_t i = 0; i < convs_.size(); ++i) {
    ck.blobs.emplace_back("phi/conv" + std::to_string(i) + "/w", convs_[i].w);
    ck.blobs.emplace_back("phi/conv" + std::to_string(i) + "/b", convs_[i].b);
  }
  save_checkpoint(path, ck);
}

void SpeechEncoder::load_weights(const std::string& path) {
  Checkpoint ck = load_checkpoint(path);
  check(ck.blobs.size() == 2 * convs_.size(), ErrorCategory::kCheckpoint,
        "speech encoder weights: blob count mismatch in " + path);
  for (size_t i = 0; i < convs_.size(); ++i) {
    const Tensor& w = ck.blobs[2 * i].second;
    const Tensor& b = ck.blobs[2 * i + 1].second;
    check(w.same_shape(convs_[i].w) && b.same_shape(convs_[i].b), ErrorCategory::kCheckpoint,
          "speech encoder weights: shape mismatch in " + path);
    convs_[i].w = w;
    convs_[i].b = b;
  }
}

}  // namespace lipsynth
