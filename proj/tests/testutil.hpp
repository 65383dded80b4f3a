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

#ifndef LIPSYNTH_TESTS_TESTUTIL_H_
#define LIPSYNTH_TESTS_TESTUTIL_H_

#include <functional>
#include <vector>

#include "doctest.h"
#include "lipsynth/graph.hpp"
#include "lipsynth/tensor.hpp"

namespace lipsynth::testutil {

// Builds a scalar graph output from bound input vars.
using BuildFn = std::function<Var(Graph&, const std::vector<Var>&)>;

inline double eval_scalar(const BuildFn& build, const std::vector<Tensor>& inputs) {
  Graph g;
  std::vector<Var> leaves;
  leaves.reserve(inputs.size());
  for (const Tensor& t : inputs) leaves.push_back(g.leaf(t));
  Var out = build(g, leaves);
  REQUIRE(out.value().numel() == 1);
  return out.value()[0];
}

// Central finite differences over every element of every input.
inline std::vector<Tensor> fd_gradients(const BuildFn& build, std::vector<Tensor> inputs,
                                        double h = 1e-5) {
  std::vector<Tensor> grads;
  for (size_t i = 0; i < inputs.size(); ++i) {
    Tensor g(inputs[i].shape());
    for (int64_t j = 0; j < inputs[i].numel(); ++j) {
      const double orig = inputs[i][j];
      inputs[i][j] = orig + h;
      const double fp = eval_scalar(build, inputs);
      inputs[i][j] = orig - h;
      const double fm = eval_scalar(build, inputs);
      inputs[i][j] = orig;
      g[j] = (fp - fm) / (2.0 * h);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

inline std::vector<Tensor> analytic_gradients(const BuildFn& build,
                                              const std::vector<Tensor>& inputs) {
  Graph g;
  std::vector<Var> leaves;
  leaves.reserve(inputs.size());
  for (const Tensor& t : inputs) leaves.push_back(g.leaf(t));
  Var out = build(g, leaves);
  auto grad_vars = g.gradients(out, leaves);
  std::vector<Tensor> grads;
  grads.reserve(grad_vars.size());
  for (const Var& v : grad_vars) grads.push_back(v.value());
  return grads;
}

inline void check_gradients(const BuildFn& build, const std::vector<Tensor>& inputs,
                            double abs_tol = 1e-6, double rel_tol = 1e-5) {
  auto an = analytic_gradients(build, inputs);
  auto fd = fd_gradients(build, inputs);
  REQUIRE(an.size() == fd.size());
  for (size_t i = 0; i < an.size(); ++i) {
    REQUIRE(an[i].same_shape(fd[i]));
    for (int64_t j = 0; j < an[i].numel(); ++j) {
      const double a = an[i][j];
      const double f = fd[i][j];
      const double err = std::abs(a - f);
      const double bound = abs_tol + rel_tol * std::max(std::abs(a), std::abs(f));
      INFO("input ", i, " element ", j, " analytic ", a, " fd ", f);
      CHECK(err <= bound);
    }
  }
}

// Asymmetric weighting so transposition and indexing bugs do not cancel.
inline Var weighted_sum(Graph& g, Var x, uint64_t seed = 77) {
  Rng rng(seed);
  Tensor w = Tensor::uniform(x.shape(), 0.5, 1.5, rng);
  return ops::reduce_sum_all(ops::mul(x, g.constant(std::move(w))));
}

}  // namespace lipsynth::testutil

#include "lipsynth/critic.hpp"
#include "lipsynth/dataset.hpp"
#include "lipsynth/generator.hpp"
#include "lipsynth/speech_encoder.hpp"

namespace lipsynth::testutil {

// Small configurations for fast tests. Sample rate 2000 at 25 fps gives 80
// samples per frame.
inline GeneratorConfig tiny_generator_config() {
  GeneratorConfig c;
  c.window_n = 3;
  c.sample_rate = 2000;
  c.fps = 25;
  c.encoder_channels = {2, 3, 4, 5, 6};
  c.gru_hidden = 8;
  c.decoder_base_channels = 8;
  c.input_channels = 1;
  c.input_h = 32;
  c.input_w = 32;
  c.seed = 7;
  return c;
}

inline CriticConfig tiny_critic_config() {
  CriticConfig c;
  c.clip_seconds = 0.1;  // 200 samples at 2 kHz
  c.sample_rate = 2000;
  c.channels = {4, 8, 16};
  c.kernel = 9;
  c.stride = 4;
  c.seed = 11;
  return c;
}

inline SpeechEncoderConfig tiny_phi_config() {
  SpeechEncoderConfig c;
  c.sample_rate = 2000;
  c.window_ms = 25.0;  // 50 samples
  c.hop_ms = 10.0;     // 20 samples
  c.mel_bands = 12;
  c.conv_channels = {8, 8};
  c.seed = 13;
  return c;
}

// A synthetic audio-visual clip: frames carry a moving bump whose phase also
// modulates a tone in the audio, so video and audio are genuinely coupled.
inline VideoSample synthetic_sample(const GeneratorConfig& gc, int64_t frames, uint64_t seed,
                                    const std::string& clip_id = "s1/clip", int speaker = 1) {
  Rng rng(seed);
  const double f0 = rng.uniform(150.0, 450.0);
  const double phase0 = rng.uniform(0.0, 6.28);
  VideoSample s;
  s.speaker_id = speaker;
  s.clip_id = clip_id;
  s.frames = Tensor({frames, gc.input_channels, gc.input_h, gc.input_w});
  for (int64_t t = 0; t < frames; ++t) {
    const double phase = phase0 + 0.35 * static_cast<double>(t);
    const double cx = (0.5 + 0.3 * std::sin(phase)) * static_cast<double>(gc.input_w);
    const double cy = (0.5 + 0.3 * std::cos(phase)) * static_cast<double>(gc.input_h);
    for (int64_t c = 0; c < gc.input_channels; ++c) {
      for (int64_t y = 0; y < gc.input_h; ++y) {
        for (int64_t x = 0; x < gc.input_w; ++x) {
          const double dx = (static_cast<double>(x) - cx) / 6.0;
          const double dy = (static_cast<double>(y) - cy) / 6.0;
          s.frames[((t * gc.input_channels + c) * gc.input_h + y) * gc.input_w + x] =
              1.6 * std::exp(-(dx * dx + dy * dy)) - 0.8;
        }
      }
    }
  }
  const int64_t H = gc.sample_rate / gc.fps;
  s.audio.sample_rate = gc.sample_rate;
  s.audio.samples.resize(static_cast<size_t>(frames * H));
  for (int64_t i = 0; i < frames * H; ++i) {
    const double t_sec = static_cast<double>(i) / gc.sample_rate;
    const double frame_phase = phase0 + 0.35 * (static_cast<double>(i) / H);
    const double am = 0.4 + 0.3 * std::sin(frame_phase);
    s.audio.samples[static_cast<size_t>(i)] = am * std::sin(6.283185307 * f0 * t_sec);
  }
  s.sentence = parse_grid_sentence({"bin", "blue", "at", "a", "9", "again"});
  return s;
}

}  // namespace lipsynth::testutil

#endif  // LIPSYNTH_TESTS_TESTUTIL_H_
