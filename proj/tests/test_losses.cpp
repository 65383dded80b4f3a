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

#include <cmath>

#include "doctest.h"
#include "lipsynth/critic.hpp"
#include "lipsynth/losses.hpp"
#include "testutil.hpp"

using namespace lipsynth;

namespace {

Var scores_of(Graph& g, std::vector<double> v) {
  return g.constant(Tensor({static_cast<int64_t>(v.size())}, std::move(v)));
}

}  // namespace

TEST_CASE("adversarial terms") {
  Graph g;
  // Equal real and fake scores: critic objective is zero.
  {
    auto [c, gen] = adversarial_terms(scores_of(g, {0.3, -1.2}), scores_of(g, {0.3, -1.2}));
    CHECK(c.value()[0] == doctest::Approx(0.0));
    CHECK(gen.value()[0] == doctest::Approx(0.45));
  }
  // Hand evaluation: real=[1], fake=[0].
  {
    auto [c, gen] = adversarial_terms(scores_of(g, {1.0}), scores_of(g, {0.0}));
    CHECK(c.value()[0] == doctest::Approx(-1.0));
    CHECK(gen.value()[0] == doctest::Approx(0.0));
  }
  // Shifting all scores by a constant leaves the critic objective unchanged.
  {
    auto [c1, g1] = adversarial_terms(scores_of(g, {0.7, 1.1, -0.4}), scores_of(g, {2.0, 0.1, 0.6}));
    auto [c2, g2] = adversarial_terms(scores_of(g, {5.7, 6.1, 4.6}), scores_of(g, {7.0, 5.1, 5.6}));
    (void)g1;
    (void)g2;
    CHECK(c1.value()[0] == doctest::Approx(c2.value()[0]).epsilon(1e-12));
  }
  // Empty batches are rejected.
  CHECK_THROWS_AS(adversarial_terms(scores_of(g, {}), scores_of(g, {1.0})), Error);
}

namespace {

ScoreFn linear_scorer(const Tensor& w, double gain, double offset) {
  return [w, gain, offset](Graph& g, Var clips) {
    const Shape s = clips.shape();
    Var flat = ops::reshape(clips, {s[0], s[1] * s[2]});
    Var scores = ops::matmul(flat, g.constant(w));  // (B, 1)
    return ops::add_scalar(ops::scale(ops::reshape(scores, {s[0]}), gain), offset);
  };
}

}  // namespace

TEST_CASE("gradient penalty closed forms") {
  const int64_t len = 16, batch = 3;
  Rng rng(2);
  Tensor real = Tensor::uniform({batch, 1, len}, -1, 1, rng);
  Tensor fake = Tensor::uniform({batch, 1, len}, -1, 1, rng);

  // Unit-norm linear critic: gradient is w everywhere, penalty 0.
  Tensor w = Tensor::uniform({len, 1}, -1, 1, rng);
  double norm = 0;
  for (int64_t i = 0; i < len; ++i) norm += w[i] * w[i];
  for (int64_t i = 0; i < len; ++i) w[i] /= std::sqrt(norm);
  {
    Graph g;
    Rng eps(5);
    Var gp = gradient_penalty(g, linear_scorer(w, 1.0, 0.0), real, fake, eps);
    CHECK(std::abs(gp.value()[0]) <= 1e-6);
  }
  // Constant critic: zero gradient, penalty (0-1)^2 = 1.
  {
    Graph g;
    Rng eps(6);
    Var gp = gradient_penalty(g, linear_scorer(Tensor::zeros({len, 1}), 1.0, 4.2), real, fake, eps);
    CHECK(gp.value()[0] == doctest::Approx(1.0).epsilon(1e-9));
  }
  // Critic scaled by 3: penalty (3-1)^2 = 4.
  {
    Graph g;
    Rng eps(7);
    Var gp = gradient_penalty(g, linear_scorer(w, 3.0, 0.0), real, fake, eps);
    CHECK(gp.value()[0] == doctest::Approx(4.0).epsilon(1e-9));
  }
  // Mismatched clip shapes are rejected.
  {
    Graph g;
    Rng eps(8);
    CHECK_THROWS_AS(
        gradient_penalty(g, linear_scorer(w, 1.0, 0.0), real, Tensor::zeros({batch, 1, len + 1}), eps),
        Error);
  }
}

TEST_CASE("gradient penalty differentiates w.r.t. critic parameters") {
  auto cc = testutil::tiny_critic_config();
  cc.channels = {3, 4};
  Critic critic(cc);
  const int64_t n = cc.clip_samples();
  Rng rng(9);
  const Tensor real = Tensor::uniform({2, 1, n}, -1, 1, rng);
  const Tensor fake = Tensor::uniform({2, 1, n}, -1, 1, rng);
  const uint64_t eps_seed = 77;

  auto gp_value = [&]() {
    Graph g;
    Binding bind(g, true);
    Rng eps(eps_seed);
    return gradient_penalty(
               g, [&](Graph&, Var clips) { return critic.score(bind, clips); }, real, fake, eps)
        .value()[0];
  };

  Graph g;
  Binding bind(g, true);
  Rng eps(eps_seed);
  Var gp = gradient_penalty(
      g, [&](Graph&, Var clips) { return critic.score(bind, clips); }, real, fake, eps);
  CHECK(gp.value()[0] >= 0.0);
  auto params = critic.parameters();
  auto grads = g.gradients(gp, bind.vars_for(params));

  Rng pick(31);
  for (size_t pi = 0; pi < params.size(); ++pi) {
    CHECK(grads[pi].value().all_finite());
    for (int probe = 0; probe < 2; ++probe) {
      const int64_t j = pick.uniform_int(0, params[pi]->numel() - 1);
      const double h = 1e-6;
      const double orig = (*params[pi])[j];
      (*params[pi])[j] = orig + h;
      const double fp = gp_value();
      (*params[pi])[j] = orig - h;
      const double fm = gp_value();
      (*params[pi])[j] = orig;
      const double fd = (fp - fm) / (2 * h);
      const double an = grads[pi].value()[j];
      INFO("param ", pi, " coord ", j, " analytic ", an, " fd ", fd);
      CHECK(std::abs(an - fd) <= 1e-2 * std::max({std::abs(an), std::abs(fd), 1e-8}));
    }
  }
}

TEST_CASE("perceptual loss") {
  // Feature-space form with an identity encoder.
  {
    Graph g;
    Var x = g.constant(Tensor({1, 2}, {1.0, 0.0}));
    Var y = g.constant(Tensor({1, 2}, {0.0, 0.0}));
    CHECK(perceptual_feature_distance(x, y).value()[0] == doctest::Approx(0.5));
    CHECK(perceptual_feature_distance(x, x).value()[0] == 0.0);
  }
  // Through the actual frozen encoder: zero iff identical, symmetric.
  auto pc = testutil::tiny_phi_config();
  SpeechEncoder phi(pc);
  Rng rng(11);
  Tensor a = Tensor::uniform({1, 200}, -0.8, 0.8, rng);
  Tensor b = Tensor::uniform({1, 200}, -0.8, 0.8, rng);
  Graph g;
  Binding bind(g, false);
  Var va = g.constant(a), vb = g.constant(b);
  const double self_loss = perceptual_loss(bind, phi, va, va).value()[0];
  CHECK(self_loss == 0.0);
  const double ab = perceptual_loss(bind, phi, va, vb).value()[0];
  const double ba = perceptual_loss(bind, phi, vb, va).value()[0];
  CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
  CHECK(ab > 0.0);
  CHECK_THROWS_AS(perceptual_loss(bind, phi, va, g.constant(Tensor::zeros({1, 199}))), Error);
}

TEST_CASE("l1 loss") {
  Graph g;
  Var x = g.constant(Tensor({1, 2}, {1.0, -1.0}));
  Var z = g.constant(Tensor({1, 2}, {0.0, 0.0}));
  CHECK(l1_loss(x, x).value()[0] == 0.0);
  CHECK(l1_loss(x, z).value()[0] == doctest::Approx(1.0));

  // Homogeneity: l1(a*x, a*y) = |a| * l1(x, y).
  Rng rng(12);
  Tensor u = Tensor::uniform({2, 50}, -1, 1, rng);
  Tensor v = Tensor::uniform({2, 50}, -1, 1, rng);
  const double alpha = -2.75;
  Tensor ua = u, va = v;
  ua.scale_(alpha);
  va.scale_(alpha);
  const double base = l1_loss(g.constant(u), g.constant(v)).value()[0];
  const double scaled = l1_loss(g.constant(ua), g.constant(va)).value()[0];
  CHECK(scaled == doctest::Approx(std::abs(alpha) * base).epsilon(1e-12));
  CHECK_THROWS_AS(l1_loss(x, g.constant(Tensor::zeros({1, 3}))), Error);
}

TEST_CASE("tv loss") {
  Graph g;
  CHECK(tv_loss(g.constant(Tensor::full({1, 64}, 0.37))).value()[0] == 0.0);

  // Alternating +-0.5: three unit jumps over T = 4.
  CHECK(tv_loss(g.constant(Tensor({4}, {0.5, -0.5, 0.5, -0.5}))).value()[0] ==
        doctest::Approx(0.75).epsilon(1e-12));

  // Monotone ramp from a to b telescopes to |b - a| / T.
  const double a = -0.3, b = 0.9;
  const int64_t T = 37;
  Tensor ramp({T});
  for (int64_t i = 0; i < T; ++i)
    ramp[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(T - 1);
  CHECK(tv_loss(g.constant(ramp)).value()[0] ==
        doctest::Approx(std::abs(b - a) / static_cast<double>(T)).epsilon(1e-12));

  CHECK_THROWS_AS(tv_loss(g.constant(Tensor({1}, {0.5}))), Error);

  // Brute-force direct-summation oracle over random waveforms.
  Rng rng(13);
  for (int rep = 0; rep < 1000; ++rep) {
    const int64_t n = rng.uniform_int(2, 40);
    Tensor x = Tensor::uniform({n}, -1, 1, rng);
    double direct = 0.0;
    for (int64_t i = 0; i + 1 < n; ++i) direct += std::abs(x[i + 1] - x[i]);
    direct /= static_cast<double>(n);
    const double via = tv_loss(g.constant(x)).value()[0];
    CHECK(std::abs(via - direct) <= 1e-9 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("weighted totals") {
  LossWeights w;  // paper defaults: 150 / 120 / 10 / 70
  const LossBundle zero = total_generator_loss(0, 0, 0, 0, w);
  CHECK(zero.total == 0.0);

  const LossBundle ones = total_generator_loss(1, 1, 1, 1, w);
  CHECK(ones.total == doctest::Approx(341.0));  // 1 + 150 + 120 + 70
  CHECK(ones.gp == 0.0);
  CHECK(ones.total ==
        doctest::Approx(ones.adv + w.l1 * ones.l1 + w.tv * ones.tv + w.perceptual * ones.perceptual));

  LossWeights zero_w;
  zero_w.l1 = zero_w.tv = zero_w.gp = zero_w.perceptual = 0;
  CHECK(total_generator_loss(0.83, 1, 1, 1, zero_w).total == doctest::Approx(0.83));

  const LossBundle critic_side = total_critic_loss(-2.0, 0.5, w);
  CHECK(critic_side.total == doctest::Approx(-2.0 + 10.0 * 0.5));

  LossWeights bad;
  bad.tv = -1;
  CHECK_THROWS_AS(total_generator_loss(0, 0, 0, 0, bad), Error);
}
