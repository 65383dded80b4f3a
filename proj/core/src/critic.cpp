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

#include "lipsynth/critic.hpp"

#include <cmath>

namespace lipsynth {

int64_t CriticConfig::clip_samples() const {
  const double exact = clip_seconds * static_cast<double>(sample_rate);
  const int64_t n = static_cast<int64_t>(std::llround(exact));
  check(n >= 1 && std::abs(exact - static_cast<double>(n)) < 1e-9, ErrorCategory::kConfig,
        "t_d * sample_rate must be a whole number of samples >= 1");
  return n;
}

void CriticConfig::validate() const {
  clip_samples();
  check(!channels.empty(), ErrorCategory::kConfig, "critic needs at least one conv layer");
  check(kernel >= 1 && stride >= 1, ErrorCategory::kConfig, "bad critic kernel/stride");
}

AudioClip sample_clip(const WaveformClip& waveform, double t_d, Rng& rng,
                      AudioClip::Origin origin) {
  const double exact = t_d * static_cast<double>(waveform.sample_rate);
  const int64_t clip_len = static_cast<int64_t>(std::llround(exact));
  check(clip_len >= 1, ErrorCategory::kConfig, "sample_clip: clip length must be >= 1 sample");
  const int64_t total = static_cast<int64_t>(waveform.samples.size());
  check(total >= clip_len, ErrorCategory::kShape,
        "sample_clip: waveform (" + std::to_string(total) + " samples) shorter than clip (" +
            std::to_string(clip_len) + "); pad or reduce t_d");
  const int64_t start = rng.uniform_int(0, total - clip_len);
  AudioClip clip;
  clip.origin = origin;
  clip.start_index = start;
  clip.samples.assign(waveform.samples.begin() + start, waveform.samples.begin() + start + clip_len);
  return clip;
}

Critic::Critic(CriticConfig config) : config_(std::move(config)) {
  config_.validate();
  Rng rng(config_.seed);
  int64_t in_ch = 1;
  int64_t len = config_.clip_samples();
  const int pad = static_cast<int>(config_.kernel / 2);
  for (int64_t out_ch : config_.channels) {
    check(len + 2 * pad >= config_.kernel, ErrorCategory::kConfig,
          "critic stack too deep for clip length");
    Conv1dLayer conv;
    conv.init(in_ch, out_ch, config_.kernel, config_.stride, pad, rng);
    convs_.push_back(std::move(conv));
    len = (len + 2 * pad - config_.kernel) / config_.stride + 1;
    check(len >= 1, ErrorCategory::kConfig, "critic stack reduces clip below one sample");
    in_ch = out_ch;
  }
  flat_dim_ = in_ch * len;
  head_.init(flat_dim_, 1, rng);
}

std::vector<Tensor*> Critic::parameters() {
  std::vector<Tensor*> out;
  for (auto& c : convs_) c.collect(out);
  head_.collect(out);
  return out;
}

uint64_t Critic::parameter_checksum() {
  std::vector<Tensor> copies;
  for (Tensor* t : parameters()) copies.push_back(*t);
  return tensors_checksum(copies);
}

Var Critic::score(Binding& bind, Var clips) const {
  const Shape s = clips.shape();
  check(s.size() == 3 && s[1] == 1, ErrorCategory::kShape,
        "critic: expected clips (B, 1, len), got " + shape_str(s));
  check(s[2] == config_.clip_samples(), ErrorCategory::kShape,
        "critic: clip length " + std::to_string(s[2]) + " does not match configured " +
            std::to_string(config_.clip_samples()));
  Var x = clips;
  for (const auto& conv : convs_) {
    x = conv.forward(bind, x);
    x = ops::leaky_relu(x, config_.leaky_slope);
  }
  const Shape xs = x.shape();
  Var flat = ops::reshape(x, {xs[0], flat_dim_});
  Var scores = head_.forward(bind, flat);  // (B, 1)
  return ops::reshape(scores, {xs[0]});
}

Tensor Critic::score_clips(const Tensor& clips) const {
  Graph g;
  Binding bind(g, /*trainable=*/false);
  return score(bind, g.constant(clips)).value();
}

}  // namespace lipsynth
