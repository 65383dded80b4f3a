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

#ifndef LIPSYNTH_LOSSES_H_
#define LIPSYNTH_LOSSES_H_

#include <functional>
#include <utility>

#include "lipsynth/graph.hpp"
#include "lipsynth/rng.hpp"
#include "lipsynth/speech_encoder.hpp"

namespace lipsynth {

struct LossWeights {
  double l1 = 150.0;
  double tv = 120.0;
  double gp = 10.0;
  double perceptual = 70.0;

  void validate() const;
};

// Named values of all objective terms plus the weighted total.
struct LossBundle {
  double adv = 0.0;
  double gp = 0.0;
  double perceptual = 0.0;
  double l1 = 0.0;
  double tv = 0.0;
  double total = 0.0;
};

// Wasserstein terms from critic scores (batch vectors). Returns
// (critic_objective, generator_objective), both to be minimized:
// critic_objective = mean(fake) - mean(real), generator_objective =
// -mean(fake).
std::pair<Var, Var> adversarial_terms(Var score_real, Var score_fake);

// Any differentiable scorer mapping clips (B, 1, len) to scores (B).
using ScoreFn = std::function<Var(Graph&, Var)>;

// WGAN-GP penalty: with eps ~ U[0,1] per pair, x_hat = eps*real +
// (1-eps)*fake, returns mean over the batch of (||d score/d x_hat||_2 - 1)^2.
// The result is twice differentiable w.r.t. the scorer's parameters.
Var gradient_penalty(Graph& g, const ScoreFn& score, const Tensor& real_clips,
                     const Tensor& fake_clips, Rng& rng);

// Mean absolute difference between frozen-encoder features of two waveform
// batches (B, L).
Var perceptual_loss(Binding& bind, const SpeechEncoder& phi, Var real, Var fake);

// Feature-space form: mean absolute difference of already-encoded features
// (also what an identity encoder reduces to).
Var perceptual_feature_distance(Var feat_real, Var feat_fake);

// Mean absolute sample difference.
Var l1_loss(Var real, Var fake);

// Total variation: per waveform, (1/T) * sum_t |x[t+1] - x[t]|, averaged
// over the batch. Input (B, T) or (T); T >= 2.
Var tv_loss(Var waveforms);

// Weighted total per the training objective; the gp term belongs to the
// critic side and is excluded from the generator total.
LossBundle total_generator_loss(double adv, double l1, double tv, double perceptual,
                                const LossWeights& weights);
LossBundle total_critic_loss(double adv, double gp, const LossWeights& weights);

}  // namespace lipsynth

#endif  // LIPSYNTH_LOSSES_H_
