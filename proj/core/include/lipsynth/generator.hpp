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

#ifndef LIPSYNTH_GENERATOR_H_
#define LIPSYNTH_GENERATOR_H_

#include <vector>

#include "lipsynth/nn.hpp"
#include "lipsynth/wav.hpp"

namespace lipsynth {

struct GeneratorConfig {
  int window_n = 7;       // frames per visual window, odd
  int sample_rate = 50000;
  int fps = 25;
  std::vector<int64_t> encoder_channels = {32, 64, 128, 256, 512};  // exactly 5 stages
  int64_t gru_hidden = 256;
  int64_t decoder_base_channels = 256;
  int64_t input_channels = 1;
  int64_t input_h = 64;   // preprocessed mouth-crop height
  int64_t input_w = 96;
  uint64_t seed = 1234;

  // Audio samples emitted per video frame.
  int64_t samples_per_frame() const;
  void validate() const;
};

// Factors the per-frame sample count into transposed-convolution strides.
// Supported prime factors: 2, 3, 5, 7.
std::vector<int> upsample_strides(int64_t samples_per_frame);

// Video-to-waveform network: a 5-stage 3-D convolutional window encoder, a
// single-layer GRU over time, and a per-frame transposed-convolution audio
// decoder ending in tanh.
class Generator {
 public:
  explicit Generator(GeneratorConfig config);

  const GeneratorConfig& config() const { return config_; }
  int64_t visual_dim() const { return config_.encoder_channels.back(); }
  int64_t content_dim() const { return config_.gru_hidden; }

  std::vector<Tensor*> parameters();
  std::vector<Tensor*> buffers();  // batch-norm running statistics
  uint64_t parameter_checksum();

  // windows: (M, C, N, h, w) -> encodings (M, d_s), each component in (-1, 1).
  Var encode_visual(Binding& bind, Var windows, bool training);

  // z_s: (B, T, d_s) -> z_c (B, T, d_c); unidirectional, zero initial state
  // unless h0 (B, d_c) is supplied.
  Var encode_content(Binding& bind, Var zs);
  Var encode_content(Binding& bind, Var zs, Var h0);

  // z_c rows: (M, d_c) -> audio segments (M, H), samples in (-1, 1).
  Var decode_frame_audio(Binding& bind, Var zc, bool training);

  // Full pipeline over pre-windowed input (B*T, C, N, h, w); returns
  // waveforms (B, T*H).
  Var forward(Binding& bind, Var windows, int64_t batch, int64_t frames, bool training);

  // Inference: preprocessed video (T, C, h, w) -> waveform of length T*H.
  WaveformClip generate(const Tensor& video);

 private:
  GeneratorConfig config_;
  std::vector<Conv3dLayer> enc_convs_;
  std::vector<BatchNormLayer> enc_bns_;
  GruLayer gru_;
  LinearLayer dec_proj_;
  std::vector<ConvTranspose1dLayer> dec_convs_;
  std::vector<BatchNormLayer> dec_bns_;
};

}  // namespace lipsynth

#endif  // LIPSYNTH_GENERATOR_H_
