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
#include "lipsynth/critic.hpp"
#include "testutil.hpp"

using namespace lipsynth;

TEST_CASE("sample_clip: bounds, determinism, copy semantics") {
  WaveformClip wave;
  wave.sample_rate = 2000;
  wave.samples.resize(200);
  for (size_t i = 0; i < wave.samples.size(); ++i) wave.samples[i] = static_cast<double>(i);

  // Source length equals clip length: the only valid offset is 0.
  Rng rng(1);
  const AudioClip c = sample_clip(wave, 0.1, rng);
  CHECK(c.start_index == 0);
  CHECK(c.samples.size() == 200);

  // Fixed seed reproduces the clip.
  wave.samples.resize(500);
  for (size_t i = 0; i < wave.samples.size(); ++i) wave.samples[i] = static_cast<double>(i);
  Rng r1(42), r2(42);
  const AudioClip a = sample_clip(wave, 0.1, r1);
  const AudioClip b = sample_clip(wave, 0.1, r2);
  CHECK(a.start_index == b.start_index);
  CHECK(a.samples == b.samples);
  CHECK(a.samples[0] == static_cast<double>(a.start_index));

  // The clip is copied, not aliased.
  WaveformClip src = wave;
  Rng r3(7);
  AudioClip copied = sample_clip(src, 0.1, r3);
  const std::vector<double> before = copied.samples;
  src.samples.assign(src.samples.size(), -99.0);
  CHECK(copied.samples == before);

  // Too-short waveform is an error telling the caller to pad or shrink t_d.
  WaveformClip tiny;
  tiny.sample_rate = 2000;
  tiny.samples.resize(100);
  Rng r4(8);
  CHECK_THROWS_WITH_AS(sample_clip(tiny, 0.1, r4), doctest::Contains("pad or reduce"), Error);
}

TEST_CASE("sample_clip start indices are uniform over all valid offsets") {
  // 3 s source, 1 s clip at 8 kHz: offsets uniform on [0, 16000].
  WaveformClip wave;
  wave.sample_rate = 8000;
  wave.samples.resize(24000, 0.0);
  const int64_t n_offsets = 16001;
  const int n_draws = 100000;
  const int n_bins = 11;

  Rng rng(123);
  std::vector<int64_t> counts(n_bins, 0);
  int64_t min_start = n_offsets, max_start = -1;
  for (int i = 0; i < n_draws; ++i) {
    const AudioClip c = sample_clip(wave, 1.0, rng);
    REQUIRE(c.start_index >= 0);
    REQUIRE(c.start_index <= 16000);
    min_start = std::min(min_start, c.start_index);
    max_start = std::max(max_start, c.start_index);
    counts[static_cast<size_t>(c.start_index * n_bins / n_offsets)]++;
  }
  // Every bin within 3 sigma of its expectation.
  for (int bbin = 0; bbin < n_bins; ++bbin) {
    const int64_t lo = static_cast<int64_t>(bbin) * n_offsets / n_bins;
    const int64_t hi = static_cast<int64_t>(bbin + 1) * n_offsets / n_bins;
    const double p = static_cast<double>(hi - lo) / static_cast<double>(n_offsets);
    const double expect = n_draws * p;
    const double sigma = std::sqrt(n_draws * p * (1 - p));
    INFO("bin ", bbin, " count ", counts[static_cast<size_t>(bbin)], " expect ", expect);
    CHECK(std::abs(counts[static_cast<size_t>(bbin)] - expect) <= 3.0 * sigma);
  }
  CHECK(min_start == 0);      // extremes are reachable
  CHECK(max_start == 16000);
}

TEST_CASE("critic scores: finite, distinct at init, length-checked") {
  auto cc = testutil::tiny_critic_config();
  Critic critic(cc);
  const int64_t n = cc.clip_samples();
  CHECK(n == 200);

  Rng rng(5);
  Tensor clips = Tensor::uniform({2, 1, n}, -1, 1, rng);
  const Tensor scores = critic.score_clips(clips);
  CHECK(scores.shape() == Shape{2});
  CHECK(scores.all_finite());
  CHECK(scores[0] != scores[1]);  // non-degenerate initialization

  const Tensor zero_score = critic.score_clips(Tensor::zeros({1, 1, n}));
  CHECK(zero_score.all_finite());

  Graph g;
  Binding bind(g, false);
  CHECK_THROWS_AS(critic.score(bind, g.constant(Tensor::zeros({1, 1, n + 1}))), Error);
}

TEST_CASE("critic batch independence is bit-exact for batch sizes 1-8") {
  auto cc = testutil::tiny_critic_config();
  Critic critic(cc);
  const int64_t n = cc.clip_samples();
  Rng rng(6);
  for (int64_t batch = 1; batch <= 8; ++batch) {
    Tensor clips = Tensor::uniform({batch, 1, n}, -1, 1, rng);
    const Tensor batched = critic.score_clips(clips);
    for (int64_t b = 0; b < batch; ++b) {
      Tensor single({1, 1, n});
      std::memcpy(single.data(), clips.data() + b * n, static_cast<size_t>(n) * sizeof(double));
      const Tensor alone = critic.score_clips(single);
      CHECK(batched[b] == alone[0]);  // bitwise
    }
  }
}

TEST_CASE("critic config validation") {
  auto cc = testutil::tiny_critic_config();
  cc.clip_seconds = 0.00025;  // half a sample at 2 kHz
  CHECK_THROWS_AS(Critic(cc), Error);

  auto deep = testutil::tiny_critic_config();
  deep.channels = {4, 8, 16, 32, 64, 128};  // collapses 200 samples below 1
  CHECK_THROWS_AS(Critic(deep), Error);
}
