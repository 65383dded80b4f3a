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

#ifndef LIPSYNTH_CRITIC_H_
#define LIPSYNTH_CRITIC_H_

#include <vector>

#include "lipsynth/nn.hpp"
#include "lipsynth/rng.hpp"
#include "lipsynth/wav.hpp"

namespace lipsynth {

struct CriticConfig {
  double clip_seconds = 1.0;  // t_d
  int sample_rate = 50000;
  std::vector<int64_t> channels = {32, 64, 128, 256, 512, 1024, 2048};
  int64_t kernel = 25;
  int stride = 4;
  double leaky_slope = 0.2;
  uint64_t seed = 999;

  // t_d * sample_rate; must be a whole number of samples >= 1.
  int64_t clip_samples() const;
  void validate() const;
};

// A fixed-length scoring clip cut out of a longer waveform.
struct AudioClip {
  enum class Origin { kReal, kGenerated };
  std::vector<double> samples;
  Origin origin = Origin::kReal;
  int64_t start_index = 0;
};

// Uniformly samples a clip of t_d seconds; the waveform must be at least
// that long. The clip is copied out, never aliased.
AudioClip sample_clip(const WaveformClip& waveform, double t_d, Rng& rng,
                      AudioClip::Origin origin = AudioClip::Origin::kReal);

// Waveform scorer for the Wasserstein objective: a strided 1-D convolution
// stack with LeakyReLU and a linear head. No normalization layers anywhere,
// so batch elements never interact.
class Critic {
 public:
  explicit Critic(CriticConfig config);

  const CriticConfig& config() const { return config_; }
  std::vector<Tensor*> parameters();
  uint64_t parameter_checksum();

  // clips: (B, 1, clip_samples) -> scores (B).
  Var score(Binding& bind, Var clips) const;

  // Convenience inference scoring.
  Tensor score_clips(const Tensor& clips) const;

 private:
  CriticConfig config_;
  std::vector<Conv1dLayer> convs_;
  LinearLayer head_;
  int64_t flat_dim_ = 0;
};

}  // namespace lipsynth

#endif  // LIPSYNTH_CRITIC_H_
