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

#include "lipsynth/generator.hpp"

#include <algorithm>

#include "lipsynth/grid.hpp"

namespace lipsynth {

int64_t GeneratorConfig::samples_per_frame() const {
  check(fps > 0 && sample_rate % fps == 0, ErrorCategory::kConfig,
        "sample_rate must be divisible by fps");
  return sample_rate / fps;
}

void GeneratorConfig::validate() const {
  check(window_n >= 1 && window_n % 2 == 1, ErrorCategory::kConfig,
        "window_n must be odd, got " + std::to_string(window_n));
  check(encoder_channels.size() == 5, ErrorCategory::kConfig,
        "encoder needs exactly 5 stages, got " + std::to_string(encoder_channels.size()));
  for (int64_t c : encoder_channels)
    check(c >= 1, ErrorCategory::kConfig, "encoder channel counts must be positive");
  check(gru_hidden >= 1 && decoder_base_channels >= 1, ErrorCategory::kConfig,
        "gru_hidden and decoder_base_channels must be positive");
  check(input_h >= 1 && input_w >= 1 && input_channels >= 1, ErrorCategory::kConfig,
        "input dimensions must be positive");
  const int64_t h = samples_per_frame();
  check(h >= 1, ErrorCategory::kConfig, "samples_per_frame must be >= 1");
  upsample_strides(h);  // throws if not factorable
}

std::vector<int> upsample_strides(int64_t samples_per_frame) {
  check(samples_per_frame >= 1, ErrorCategory::kConfig, "samples_per_frame must be >= 1");
  std::vector<int> strides;
  int64_t h = samples_per_frame;
  const int factors[] = {5, 4, 3, 2, 7};
  while (h > 1) {
    bool found = false;
    for (int f : factors) {
      if (h % f == 0) {
        strides.push_back(f);
        h /= f;
        found = true;
        break;
      }
    }
    check(found, ErrorCategory::kConfig,
          "samples_per_frame " + std::to_string(samples_per_frame) +
              " must factor into primes 2, 3, 5, 7");
  }
  if (strides.empty()) strides.push_back(1);
  return strides;
}

Generator::Generator(GeneratorConfig config) : config_(std::move(config)) {
  config_.validate();
  Rng rng(config_.seed);

  // Visual window encoder: 3x3x3 kernels, spatial stride 2, temporal stride 1.
  int64_t in_ch = config_.input_channels;
  for (size_t i = 0; i < 5; ++i) {
    Conv3dLayer conv;
    conv.init(in_ch, config_.encoder_channels[i], {3, 3, 3}, {1, 2, 2}, {1, 1, 1}, rng);
    enc_convs_.push_back(std::move(conv));
    if (i + 1 < 5) {
      BatchNormLayer bn;
      bn.init(config_.encoder_channels[i]);
      enc_bns_.push_back(std::move(bn));
    }
    in_ch = config_.encoder_channels[i];
  }

  gru_.init(visual_dim(), config_.gru_hidden, rng);

  const auto strides = upsample_strides(config_.samples_per_frame());
  std::vector<int64_t> dec_channels;
  dec_channels.push_back(config_.decoder_base_channels);
  for (size_t i = 1; i < strides.size(); ++i)
    dec_channels.push_back(std::max<int64_t>(4, dec_channels.back() / 2));

  dec_proj_.init(config_.gru_hidden, dec_channels[0], rng);
  for (size_t i = 0; i < strides.size(); ++i) {
    ConvTranspose1dLayer up;
    const int64_t out_ch = (i + 1 < strides.size()) ? dec_channels[i + 1] : 1;
    up.init(dec_channels[i], out_ch, strides[i], rng);
    dec_convs_.push_back(std::move(up));
    if (i + 1 < strides.size()) {
      BatchNormLayer bn;
      bn.init(out_ch);
      dec_bns_.push_back(std::move(bn));
    }
  }
}

std::vector<Tensor*> Generator::parameters() {
  std::vector<Tensor*> out;
  for (auto& l : enc_convs_) l.collect(out);
  for (auto& l : enc_bns_) l.collect(out);
  gru_.collect(out);
  dec_proj_.collect(out);
  for (auto& l : dec_convs_) l.collect(out);
  for (auto& l : dec_bns_) l.collect(out);
  return out;
}

std::vector<Tensor*> Generator::buffers() {
  std::vector<Tensor*> out;
  for (auto& l : enc_bns_) l.collect_buffers(out);
  for (auto& l : dec_bns_) l.collect_buffers(out);
  return out;
}

uint64_t Generator::parameter_checksum() {
  std::vector<Tensor> copies;
  for (Tensor* t : parameters()) copies.push_back(*t);
  return tensors_checksum(copies);
}

Var Generator::encode_visual(Binding& bind, Var windows, bool training) {
  const Shape in_shape = windows.shape();
  check(in_shape.size() == 5, ErrorCategory::kShape,
        "encode_visual: expected (M, C, N, h, w), got " + shape_str(in_shape));
  check(in_shape[1] == config_.input_channels && in_shape[2] == config_.window_n &&
            in_shape[3] == config_.input_h && in_shape[4] == config_.input_w,
        ErrorCategory::kShape,
        "encode_visual: window shape " + shape_str(in_shape) + " does not match config");
  Var x = windows;
  for (size_t i = 0; i < enc_convs_.size(); ++i) {
    x = enc_convs_[i].forward(bind, x);
    if (i + 1 < enc_convs_.size()) {
      x = enc_bns_[i].forward(bind, x, training);
      x = ops::relu(x);
    } else {
      // Last encoder stage: tanh, no normalization.
      x = ops::tanh(x);
    }
  }
  // Global average pool over (t, h, w).
  const Shape xs = x.shape();
  Var pooled = ops::reduce_mean_keepdim(x, {0, 0, 1, 1, 1});
  return ops::reshape(pooled, {xs[0], xs[1]});
}

Var Generator::encode_content(Binding& bind, Var zs) {
  const Shape s = zs.shape();
  check(s.size() == 3, ErrorCategory::kShape, "encode_content: expected (B, T, d_s)");
  Var h0 = bind.graph().constant(Tensor::zeros({s[0], config_.gru_hidden}));
  return encode_content(bind, zs, h0);
}

Var Generator::encode_content(Binding& bind, Var zs, Var h0) {
  const Shape s = zs.shape();
  check(s.size() == 3, ErrorCategory::kShape, "encode_content: expected (B, T, d_s)");
  check(s[1] >= 1, ErrorCategory::kShape, "encode_content: empty sequence");
  const int64_t T = s[1];
  Var tb = ops::transpose01(zs);  // (T, B, d_s)
  Var h = h0;
  std::vector<Var> outputs;
  outputs.reserve(static_cast<size_t>(T));
  for (int64_t t = 0; t < T; ++t) {
    Var xt = ops::select0(tb, t);  // (B, d_s)
    h = gru_.step(bind, xt, h);
    outputs.push_back(h);
  }
  return ops::transpose01(ops::stack0(outputs));  // (B, T, d_c)
}

Var Generator::decode_frame_audio(Binding& bind, Var zc, bool training) {
  const Shape s = zc.shape();
  check(s.size() == 2 && s[1] == config_.gru_hidden, ErrorCategory::kShape,
        "decode_frame_audio: expected (M, d_c), got " + shape_str(s));
  const int64_t M = s[0];
  Var x = dec_proj_.forward(bind, zc);                   // (M, C0)
  x = ops::reshape(x, {M, dec_convs_[0].w.dim(0), 1});   // (M, C0, 1)
  for (size_t i = 0; i < dec_convs_.size(); ++i) {
    x = dec_convs_[i].forward(bind, x);
    if (i + 1 < dec_convs_.size()) {
      x = dec_bns_[i].forward(bind, x, training);
      x = ops::relu(x);
    } else {
      x = ops::tanh(x);
    }
  }
  return ops::reshape(x, {M, config_.samples_per_frame()});
}

Var Generator::forward(Binding& bind, Var windows, int64_t batch, int64_t frames, bool training) {
  check(windows.shape()[0] == batch * frames, ErrorCategory::kShape,
        "forward: window count must equal batch * frames");
  Var zs = encode_visual(bind, windows, training);                    // (B*T, d_s)
  Var zc_seq = encode_content(bind, ops::reshape(zs, {batch, frames, visual_dim()}));
  Var zc = ops::reshape(zc_seq, {batch * frames, config_.gru_hidden});
  Var segments = decode_frame_audio(bind, zc, training);              // (B*T, H)
  return ops::reshape(segments, {batch, frames * config_.samples_per_frame()});
}

WaveformClip Generator::generate(const Tensor& video) {
  check(video.rank() == 4, ErrorCategory::kShape,
        "generate: expected preprocessed video (T, C, h, w), got " + shape_str(video.shape()));
  check(video.dim(0) >= 1, ErrorCategory::kShape, "generate: empty video");
  check(video.dim(1) == config_.input_channels && video.dim(2) == config_.input_h &&
            video.dim(3) == config_.input_w,
        ErrorCategory::kShape,
        "generate: video shape " + shape_str(video.shape()) + " does not match config");
  const int64_t T = video.dim(0);
  Graph g;
  Binding bind(g, /*trainable=*/false);
  Var windows = g.constant(sliding_windows(video, config_.window_n));
  Var wave = forward(bind, windows, 1, T, /*training=*/false);
  WaveformClip clip;
  clip.sample_rate = config_.sample_rate;
  clip.samples = wave.value().vec();
  return clip;
}

}  // namespace lipsynth
