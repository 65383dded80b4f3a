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

#ifndef LIPSYNTH_TRAINER_H_
#define LIPSYNTH_TRAINER_H_

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "lipsynth/checkpoint.hpp"
#include "lipsynth/critic.hpp"
#include "lipsynth/dataset.hpp"
#include "lipsynth/generator.hpp"
#include "lipsynth/losses.hpp"
#include "lipsynth/speech_encoder.hpp"

namespace lipsynth {

struct TrainConfig {
  int critic_updates_per_gen = 6;
  double learning_rate = 1e-4;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.9;
  int patience_epochs = 10;
  int batch_size = 8;
  int max_epochs = 1000;
  int64_t max_generator_steps = 0;  // 0 means no cap
  double improvement_delta = 1e-4;  // dB of validation MCD
  uint64_t seed = 0;
  bool log_wall_time = true;
  LossWeights weights;

  void validate() const;
};

struct StepRecord {
  int64_t step = 0;       // global counter over critic + generator updates
  std::string kind;       // "critic", "generator" or "epoch"
  LossBundle losses;
  double val_mcd = std::numeric_limits<double>::quiet_NaN();  // epoch records only
  double wall_ms = 0.0;   // 0 when wall-time logging is disabled
};

// A shape-uniform minibatch ready for the networks.
struct PreparedBatch {
  Tensor windows;     // (B*T, C, N, h, w)
  Tensor real_waves;  // (B, T*H), audio trimmed/padded to exactly T*H samples
  int64_t batch = 0;
  int64_t frames = 0;
};

class Trainer {
 public:
  using ValMetricFn = std::function<double(Generator&, const std::vector<VideoSample>&)>;
  using StepCallback = std::function<void(const StepRecord&)>;

  Trainer(Generator& generator, Critic& critic, const SpeechEncoder& speech_encoder,
          TrainConfig config);

  const TrainConfig& config() const { return config_; }

  PreparedBatch prepare_batch(const std::vector<const VideoSample*>& samples) const;

  // One critic update: minimizes mean(D(S(fake))) - mean(D(S(real))) +
  // lambda_gp * penalty. Generator parameters are untouched.
  LossBundle train_step_critic(const PreparedBatch& batch);

  // One generator update on the full weighted objective (gp excluded).
  // Critic parameters are untouched.
  LossBundle train_step_generator(const PreparedBatch& batch);

  // One schedule cycle: critic_updates_per_gen critic updates followed by a
  // single generator update, reusing one generator forward for the fake
  // clips the critic scores.
  LossBundle train_cycle(const PreparedBatch& batch, const StepCallback& on_record = nullptr);

  // Full loop with per-epoch validation MCD and early stopping; returns the
  // state snapshot from the best epoch. val_metric defaults to mean MCD over
  // the validation set.
  Checkpoint train(const std::vector<VideoSample>& train_set,
                   const std::vector<VideoSample>& val_set,
                   const StepCallback& on_record = nullptr,
                   const ValMetricFn& val_metric = nullptr);

  // Full training state for interrupt/resume: network parameters and
  // buffers, optimizer moments, rng state and schedule position.
  Checkpoint snapshot(const std::string& config_json = "{}") const;
  void restore(const Checkpoint& ck);

  double validation_mcd(const std::vector<VideoSample>& val_set);

  int64_t critic_steps() const { return critic_steps_; }
  int64_t generator_steps() const { return generator_steps_; }
  int epochs_run() const { return epoch_; }
  double best_val_metric() const { return best_val_; }
  Rng& rng() { return rng_; }

 private:
  LossBundle critic_update_with(const Tensor& fake_waves, const PreparedBatch& batch);
  Tensor sample_clip_rows(const Tensor& waves);  // (B, L) -> (B, 1, clip_samples)
  void record(StepRecord r, const StepCallback& cb, double wall_ms);

  Generator& generator_;
  Critic& critic_;
  const SpeechEncoder& phi_;
  TrainConfig config_;
  AdamOptimizer opt_generator_;
  AdamOptimizer opt_critic_;
  Rng rng_;
  int64_t critic_steps_ = 0;
  int64_t generator_steps_ = 0;
  int epoch_ = 0;
  double best_val_ = std::numeric_limits<double>::infinity();
  int epochs_since_improvement_ = 0;
  Checkpoint best_state_;
  bool has_best_ = false;
};

}  // namespace lipsynth

#endif  // LIPSYNTH_TRAINER_H_
