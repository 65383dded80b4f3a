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

#include "lipsynth/losses.hpp"

namespace lipsynth {

void LossWeights::validate() const {
  check(l1 >= 0 && tv >= 0 && gp >= 0 && perceptual >= 0, ErrorCategory::kConfig,
        "loss weights must be non-negative");
}

std::pair<Var, Var> adversarial_terms(Var score_real, Var score_fake) {
  check(score_real.value().numel() > 0 && score_fake.value().numel() > 0, ErrorCategory::kShape,
        "adversarial_terms: empty score batch");
  Var mean_real = ops::reduce_mean_all(score_real);
  Var mean_fake = ops::reduce_mean_all(score_fake);
  Var critic_objective = ops::sub(mean_fake, mean_real);
  Var generator_objective = ops::neg(mean_fake);
  return {critic_objective, generator_objective};
}

Var gradient_penalty(Graph& g, const ScoreFn& score, const Tensor& real_clips,
                     const Tensor& fake_clips, Rng& rng) {
  check(real_clips.same_shape(fake_clips), ErrorCategory::kShape,
        "gradient_penalty: clip batches must have equal shape, got " +
            shape_str(real_clips.shape()) + " vs " + shape_str(fake_clips.shape()));
  check(real_clips.rank() == 3, ErrorCategory::kShape,
        "gradient_penalty: expected clips (B, 1, len)");
  const int64_t B = real_clips.dim(0);
  const int64_t per = real_clips.numel() / B;

  // One interpolation factor per pair.
  Tensor interp(real_clips.shape());
  for (int64_t b = 0; b < B; ++b) {
    const double eps = rng.uniform();
    for (int64_t i = 0; i < per; ++i) {
      const int64_t k = b * per + i;
      interp[k] = eps * real_clips[k] + (1.0 - eps) * fake_clips[k];
    }
  }

  Var x_hat = g.leaf(std::move(interp));
  Var scores = score(g, x_hat);
  check(scores.value().numel() == B, ErrorCategory::kShape,
        "gradient_penalty: scorer must return one score per clip");
  // Scores are per-clip independent, so the gradient of the sum recovers
  // each clip's own input gradient.
  Var grad = g.gradients(ops::reduce_sum_all(scores), {x_hat})[0];
  Var sq = ops::reduce_sum_keepdim(ops::square(grad), {0, 1, 1});  // (B, 1, 1)
  Var norm = ops::sqrt(ops::reshape(sq, {B}));
  return ops::reduce_mean_all(ops::square(ops::add_scalar(norm, -1.0)));
}

Var perceptual_feature_distance(Var feat_real, Var feat_fake) {
  check(feat_real.shape() == feat_fake.shape(), ErrorCategory::kShape,
        "perceptual_feature_distance: feature shapes differ");
  return ops::reduce_mean_all(ops::abs(ops::sub(feat_real, feat_fake)));
}

Var perceptual_loss(Binding& bind, const SpeechEncoder& phi, Var real, Var fake) {
  check(real.shape() == fake.shape(), ErrorCategory::kShape,
        "perceptual_loss: waveform batches must have equal shape, got " +
            shape_str(real.shape()) + " vs " + shape_str(fake.shape()));
  return perceptual_feature_distance(phi.encode(bind, real), phi.encode(bind, fake));
}

Var l1_loss(Var real, Var fake) {
  check(real.shape() == fake.shape(), ErrorCategory::kShape,
        "l1_loss: shape mismatch " + shape_str(real.shape()) + " vs " + shape_str(fake.shape()));
  return ops::reduce_mean_all(ops::abs(ops::sub(real, fake)));
}

Var tv_loss(Var waveforms) {
  Shape s = waveforms.shape();
  Var x = waveforms;
  if (s.size() == 1) {
    x = ops::reshape(x, {1, s[0]});
    s = x.shape();
  }
  check(s.size() == 2, ErrorCategory::kShape, "tv_loss: expected (B, T) or (T)");
  const int64_t T = s[1];
  check(T >= 2, ErrorCategory::kShape, "tv_loss: need at least 2 samples");
  Var diff = ops::sub(ops::slice_last(x, 1, T - 1), ops::slice_last(x, 0, T - 1));
  Var per_sample = ops::scale(ops::reduce_sum_keepdim(ops::abs(diff), {0, 1}),
                              1.0 / static_cast<double>(T));
  return ops::reduce_mean_all(per_sample);
}

LossBundle total_generator_loss(double adv, double l1, double tv, double perceptual,
                                const LossWeights& weights) {
  weights.validate();
  LossBundle b;
  b.adv = adv;
  b.l1 = l1;
  b.tv = tv;
  b.perceptual = perceptual;
  b.gp = 0.0;
  b.total = adv + weights.l1 * l1 + weights.tv * tv + weights.perceptual * perceptual;
  return b;
}

LossBundle total_critic_loss(double adv, double gp, const LossWeights& weights) {
  weights.validate();
  LossBundle b;
  b.adv = adv;
  b.gp = gp;
  b.total = adv + weights.gp * gp;
  return b;
}

}  // namespace lipsynth
