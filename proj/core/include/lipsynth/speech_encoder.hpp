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

#ifndef LIPSYNTH_SPEECH_ENCODER_H_
#define LIPSYNTH_SPEECH_ENCODER_H_

#include <string>
#include <vector>

#include "lipsynth/nn.hpp"
#include "lipsynth/wav.hpp"

namespace lipsynth {

struct SpeechEncoderConfig {
  int sample_rate = 50000;
  double window_ms = 25.0;
  double hop_ms = 10.0;
  int64_t mel_bands = 40;
  std::vector<int64_t> conv_channels = {64, 64};
  double log_floor = 1e-8;
  uint64_t seed = 2024;

  int64_t window_samples() const;
  int64_t hop_samples() const;
};

// The waveform-to-feature map phi used by the perceptual loss: a log-mel
// frontend followed by a small convolutional stack whose weights are drawn
// once from the seed and then frozen. The map is differentiable with
// respect to its input (parameters enter the graph as constants), which is
// all the perceptual loss needs. Any externally trained encoder with the
// same interface can be loaded in its place.
class SpeechEncoder {
 public:
  explicit SpeechEncoder(SpeechEncoderConfig config);

  const SpeechEncoderConfig& config() const { return config_; }
  int64_t feature_dim() const { return config_.conv_channels.back(); }

  // waveforms (B, L) -> features (B, feature_dim, frames). L must cover at
  // least one analysis window.
  Var encode(Binding& bind, Var waveforms) const;

  // Single-clip convenience; validates the sample rate.
  Tensor encode_clip(const WaveformClip& clip) const;

  std::vector<Tensor*> parameters();
  uint64_t parameter_checksum() const;

  // Optional replacement weights (e.g. an externally trained encoder).
  void save_weights(const std::string& path) const;
  void load_weights(const std::string& path);

 private:
  SpeechEncoderConfig config_;
  Tensor window_;             // analysis window
  Tensor basis_re_, basis_im_;  // DFT bases (win, bins)
  Tensor mel_;                // (bins, mel_bands), transposed filterbank
  std::vector<Conv1dLayer> convs_;
};

}  // namespace lipsynth

#endif  // LIPSYNTH_SPEECH_ENCODER_H_
