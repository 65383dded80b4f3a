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
#include <cstring>

#include "doctest.h"
#include "lipsynth/generator.hpp"
#include "lipsynth/grid.hpp"
#include "lipsynth/losses.hpp"
#include "testutil.hpp"

using namespace lipsynth;

TEST_CASE("upsample stride factorization covers the supported rates") {
  auto product = [](const std::vector<int>& v) {
    int64_t p = 1;
    for (int s : v) p *= s;
    return p;
  };
  CHECK(product(upsample_strides(2000)) == 2000);  // 50 kHz / 25 fps
  CHECK(product(upsample_strides(320)) == 320);    // 8 kHz / 25 fps
  CHECK(product(upsample_strides(640)) == 640);    // 16 kHz / 25 fps
  CHECK(product(upsample_strides(882)) == 882);    // 22.05 kHz / 25 fps
  CHECK(product(upsample_strides(80)) == 80);
  CHECK(upsample_strides(1) == std::vector<int>{1});
  CHECK_THROWS_AS(upsample_strides(11), Error);  // prime > 7
}

TEST_CASE("encode_visual: bounded outputs, determinism, zero input") {
  auto gc = testutil::tiny_generator_config();
  Generator gen(gc);
  Rng rng(3);
  Tensor window =
      Tensor::uniform({1, gc.input_channels, gc.window_n, gc.input_h, gc.input_w}, -1, 1, rng);

  // Two identical windows in one batch get identical encodings (inference).
  Tensor two({2, gc.input_channels, gc.window_n, gc.input_h, gc.input_w});
  std::memcpy(two.data(), window.data(), static_cast<size_t>(window.numel()) * sizeof(double));
  std::memcpy(two.data() + window.numel(), window.data(),
              static_cast<size_t>(window.numel()) * sizeof(double));
  Graph g;
  Binding bind(g, false);
  Var zs = gen.encode_visual(bind, g.constant(two), /*training=*/false);
  CHECK(zs.shape() == Shape{2, gen.visual_dim()});
  CHECK(zs.value().min() > -1.0);
  CHECK(zs.value().max() < 1.0);
  for (int64_t i = 0; i < gen.visual_dim(); ++i)
    CHECK(zs.value()[i] == zs.value()[gen.visual_dim() + i]);

  // All-zero window: finite encoding.
  Graph g2;
  Binding b2(g2, false);
  Var z0 = gen.encode_visual(
      b2, g2.constant(Tensor::zeros({1, gc.input_channels, gc.window_n, gc.input_h, gc.input_w})),
      false);
  CHECK(z0.value().all_finite());

  // Shape mismatch is rejected.
  Graph g3;
  Binding b3(g3, false);
  CHECK_THROWS_AS(gen.encode_visual(b3, g3.constant(Tensor::zeros({1, 1, 5, 8, 8})), false),
                  Error);
}

TEST_CASE("encode_content is unidirectional: truncation and shared-prefix properties") {
  auto gc = testutil::tiny_generator_config();
  Generator gen(gc);
  Rng rng(4);
  const int64_t T = 9, k = 5;
  Tensor zs = Tensor::uniform({1, T, gen.visual_dim()}, -1, 1, rng);
  Tensor zs_prefix({1, k, gen.visual_dim()});
  std::memcpy(zs_prefix.data(), zs.data(),
              static_cast<size_t>(zs_prefix.numel()) * sizeof(double));

  Graph g;
  Binding bind(g, false);
  Var full = gen.encode_content(bind, g.constant(zs));
  Var part = gen.encode_content(bind, g.constant(zs_prefix));
  CHECK(full.shape() == Shape{1, T, gen.content_dim()});
  CHECK(part.shape() == Shape{1, k, gen.content_dim()});
  for (int64_t i = 0; i < part.value().numel(); ++i)
    CHECK(part.value()[i] == full.value()[i]);  // bit-exact prefix

  // Two sequences sharing a prefix agree on it.
  Tensor other = zs;
  for (int64_t i = k * gen.visual_dim(); i < other.numel(); ++i) other[i] = -other[i];
  Var alt = gen.encode_content(bind, g.constant(other));
  for (int64_t i = 0; i < k * gen.content_dim(); ++i)
    CHECK(alt.value()[i] == full.value()[i]);

  // Length-1 input gives length-1 output; empty input errors.
  Var one = gen.encode_content(bind, g.constant(Tensor::uniform({1, 1, gen.visual_dim()}, -1, 1, rng)));
  CHECK(one.shape() == Shape{1, 1, gen.content_dim()});
  CHECK_THROWS_AS(gen.encode_content(bind, g.constant(Tensor({1, 0, gen.visual_dim()}))), Error);
}

TEST_CASE("decode_frame_audio emits H bounded samples") {
  auto gc = testutil::tiny_generator_config();
  Generator gen(gc);
  Rng rng(5);
  const int64_t H = gc.samples_per_frame();
  CHECK(H == 80);

  Graph g;
  Binding bind(g, false);
  Var out = gen.decode_frame_audio(bind, g.constant(Tensor::uniform({3, gen.content_dim()}, -1, 1, rng)),
                                   false);
  CHECK(out.shape() == Shape{3, H});
  CHECK(out.value().min() > -1.0);
  CHECK(out.value().max() < 1.0);
  CHECK_THROWS_AS(
      gen.decode_frame_audio(bind, g.constant(Tensor::zeros({3, gen.content_dim() + 1})), false),
      Error);

  // Paper-rate arithmetic: 50 kHz at 25 fps is 2000 samples per frame.
  GeneratorConfig paper = gc;
  paper.sample_rate = 50000;
  CHECK(paper.samples_per_frame() == 2000);
  GeneratorConfig desk = gc;
  desk.sample_rate = 8000;
  CHECK(desk.samples_per_frame() == 320);
}

TEST_CASE("generate: length T*H, bounded range, determinism, edge cases") {
  auto gc = testutil::tiny_generator_config();
  Generator gen(gc);
  const int64_t H = gc.samples_per_frame();

  for (int64_t T : {1, 2, 7}) {
    const VideoSample s = testutil::synthetic_sample(gc, T, 60 + static_cast<uint64_t>(T));
    const WaveformClip wave = gen.generate(s.frames);
    CHECK(static_cast<int64_t>(wave.samples.size()) == T * H);
    CHECK(wave.sample_rate == gc.sample_rate);
    for (double v : wave.samples) {
      CHECK(v > -1.0);
      CHECK(v < 1.0);
    }
  }

  // Bit-identical across two invocations.
  const VideoSample s = testutil::synthetic_sample(gc, 6, 61);
  const WaveformClip w1 = gen.generate(s.frames);
  const WaveformClip w2 = gen.generate(s.frames);
  CHECK(std::memcmp(w1.samples.data(), w2.samples.data(), w1.samples.size() * sizeof(double)) == 0);

  CHECK_THROWS_AS(gen.generate(Tensor({0, gc.input_channels, gc.input_h, gc.input_w})), Error);
  CHECK_THROWS_AS(gen.generate(Tensor({3, gc.input_channels, gc.input_h + 1, gc.input_w})), Error);
}

TEST_CASE("prefix property and bounded lookahead") {
  auto gc = testutil::tiny_generator_config();
  Generator gen(gc);
  const int64_t H = gc.samples_per_frame();
  const int64_t half = gc.window_n / 2;
  const int64_t T = 10, k = 6;

  const VideoSample s = testutil::synthetic_sample(gc, T, 62);
  Tensor prefix({k, gc.input_channels, gc.input_h, gc.input_w});
  std::memcpy(prefix.data(), s.frames.data(),
              static_cast<size_t>(prefix.numel()) * sizeof(double));

  const WaveformClip full = gen.generate(s.frames);
  const WaveformClip part = gen.generate(prefix);
  // Frames before the lookahead margin see identical windows and identical
  // recurrent history, so their samples agree exactly.
  for (int64_t i = 0; i < (k - half) * H; ++i) CHECK(part.samples[static_cast<size_t>(i)] == full.samples[static_cast<size_t>(i)]);

  // Perturbing frame t+k for k > floor(N/2) leaves frame t unchanged.
  Tensor perturbed = s.frames;
  const int64_t t_probe = 4;
  const int64_t t_future = t_probe + half + 1;
  for (int64_t i = 0; i < gc.input_h * gc.input_w; ++i)
    perturbed[t_future * gc.input_h * gc.input_w + i] =
        -perturbed[t_future * gc.input_h * gc.input_w + i];
  const WaveformClip shifted = gen.generate(perturbed);
  for (int64_t i = 0; i <= t_probe * H - 1 + H; ++i)
    CHECK(shifted.samples[static_cast<size_t>(i)] == full.samples[static_cast<size_t>(i)]);
}

TEST_CASE("generator gradient flow: finite, nonzero, matches finite differences") {
  GeneratorConfig gc = testutil::tiny_generator_config();
  gc.encoder_channels = {2, 2, 2, 2, 2};
  gc.gru_hidden = 4;
  gc.decoder_base_channels = 4;
  Generator gen(gc);
  const int64_t T = 2, B = 1;
  const VideoSample s = testutil::synthetic_sample(gc, T, 63);
  const Tensor windows = sliding_windows(s.frames, gc.window_n);
  Tensor target({B, T * gc.samples_per_frame()},
                std::vector<double>(s.audio.samples.begin(),
                                    s.audio.samples.begin() + T * gc.samples_per_frame()));

  auto loss_value = [&]() {
    Graph g;
    Binding bind(g, true);
    Var fake = gen.forward(bind, g.constant(windows), B, T, /*training=*/true);
    return l1_loss(g.constant(target), fake).value()[0];
  };

  // Analytic gradients.
  Graph g;
  Binding bind(g, true);
  Var fake = gen.forward(bind, g.constant(windows), B, T, /*training=*/true);
  Var loss = l1_loss(g.constant(target), fake);
  auto params = gen.parameters();
  auto grad_vars = g.gradients(loss, bind.vars_for(params));

  Rng pick(99);
  int checked = 0;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    const Tensor grad = grad_vars[pi].value();
    CHECK(grad.all_finite());
    // Every parameter tensor participates in the loss.
    double norm = 0;
    for (int64_t j = 0; j < grad.numel(); ++j) norm += grad[j] * grad[j];
    INFO("parameter tensor ", pi);
    CHECK(norm > 0.0);

    // Spot-check a few coordinates per tensor against central differences.
    const int n_probe = 2;
    for (int probe = 0; probe < n_probe; ++probe) {
      const int64_t j = pick.uniform_int(0, params[pi]->numel() - 1);
      const double h = 1e-6;
      const double orig = (*params[pi])[j];
      (*params[pi])[j] = orig + h;
      const double fp = loss_value();
      (*params[pi])[j] = orig - h;
      const double fm = loss_value();
      (*params[pi])[j] = orig;
      const double fd = (fp - fm) / (2 * h);
      const double an = grad[j];
      INFO("param ", pi, " coord ", j, " analytic ", an, " fd ", fd);
      CHECK(std::abs(an - fd) <= 1e-2 * std::max({std::abs(an), std::abs(fd), 1e-6}));
      ++checked;
    }
  }
  CHECK(checked > 0);
}
