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

#include <algorithm>
#include <set>

#include "doctest.h"
#include "lipsynth/error.hpp"
#include "lipsynth/grid.hpp"
#include "testutil.hpp"

using namespace lipsynth;

TEST_CASE("grid sentence parsing accepts the grammar") {
  const GridSentence a = parse_grid_sentence({"bin", "blue", "at", "a", "9", "again"});
  CHECK(a.command == "bin");
  CHECK(a.letter == 'a');
  CHECK(a.digit == 9);
  CHECK(a.text() == "bin blue at a 9 again");

  // Boundary values of each column.
  const GridSentence b = parse_grid_sentence({"set", "white", "with", "z", "0", "soon"});
  CHECK(b.adverb == "soon");
  CHECK(b.letter == 'z');
  CHECK(b.digit == 0);
}

TEST_CASE("grid sentence parsing rejects out-of-domain tokens") {
  CHECK_THROWS_WITH_AS(parse_grid_sentence({"bin", "blue", "at", "w", "9", "again"}),
                       doctest::Contains("letter 'W' is excluded"), Error);
  CHECK_THROWS_AS(parse_grid_sentence({"bin", "blue", "at", "a", "9"}), Error);
  CHECK_THROWS_WITH_AS(parse_grid_sentence({"eat", "blue", "at", "a", "9", "again"}),
                       doctest::Contains("token 1"), Error);
  CHECK_THROWS_WITH_AS(parse_grid_sentence({"bin", "black", "at", "a", "9", "again"}),
                       doctest::Contains("token 2"), Error);
  CHECK_THROWS_WITH_AS(parse_grid_sentence({"bin", "blue", "at", "a", "x", "again"}),
                       doctest::Contains("token 5"), Error);
}

namespace {

std::vector<SampleRef> clips_for(int speaker, int n) {
  std::vector<SampleRef> out;
  for (int i = 0; i < n; ++i)
    out.push_back({"s" + std::to_string(speaker) + "/c" + std::to_string(i), speaker});
  return out;
}

bool disjoint(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::set<std::string> sa(a.begin(), a.end());
  for (const auto& x : b)
    if (sa.count(x)) return false;
  return true;
}

}  // namespace

TEST_CASE("speaker-dependent split is 90/5/5 and deterministic") {
  const auto samples = clips_for(1, 1000);
  const DatasetSplit s = make_speaker_dependent_split(samples, 42);
  CHECK(s.train.size() == 900);
  CHECK(s.validation.size() == 50);
  CHECK(s.test.size() == 50);
  CHECK(disjoint(s.train, s.validation));
  CHECK(disjoint(s.train, s.test));
  CHECK(disjoint(s.validation, s.test));

  const DatasetSplit again = make_speaker_dependent_split(samples, 42);
  CHECK(again.train == s.train);
  CHECK(again.validation == s.validation);
  CHECK(again.test == s.test);

  const DatasetSplit other = make_speaker_dependent_split(samples, 43);
  CHECK(other.train != s.train);  // overwhelmingly likely under a different seed
  CHECK(disjoint(other.train, other.validation));
  CHECK(disjoint(other.train, other.test));
}

TEST_CASE("speaker-dependent split restrictions") {
  CHECK_THROWS_AS(make_speaker_dependent_split({}, 1), Error);
  CHECK_THROWS_WITH_AS(make_speaker_dependent_split(clips_for(3, 10), 1),
                       doctest::Contains("subjects 1, 2, 4, 29"), Error);
  // Multiple admissible speakers are split per speaker.
  auto samples = clips_for(1, 100);
  auto more = clips_for(29, 40);
  samples.insert(samples.end(), more.begin(), more.end());
  const DatasetSplit s = make_speaker_dependent_split(samples, 7);
  CHECK(s.train.size() + s.validation.size() + s.test.size() == 140);
  CHECK(s.validation.size() == 5 + 2);  // floor(5% of 100) + floor(5% of 40)
}

TEST_CASE("speaker-independent split routes by speaker") {
  SpeakerAssignment a;
  for (int i = 1; i <= 15; ++i) a.train.push_back(i);
  for (int i = 16; i <= 23; ++i) a.validation.push_back(i);
  for (int i = 24; i <= 33; ++i) a.test.push_back(i);

  std::vector<SampleRef> samples;
  for (int spk = 1; spk <= 33; ++spk) {
    auto c = clips_for(spk, 10);
    samples.insert(samples.end(), c.begin(), c.end());
  }
  const DatasetSplit s = make_speaker_independent_split(samples, a);
  CHECK(s.train.size() == 150);
  CHECK(s.validation.size() == 80);
  CHECK(s.test.size() == 100);

  // No speaker appears in more than one list.
  auto speakers_of = [](const std::vector<std::string>& ids) {
    std::set<std::string> out;
    for (const auto& id : ids) out.insert(id.substr(0, id.find('/')));
    return out;
  };
  auto st = speakers_of(s.train), sv = speakers_of(s.validation), se = speakers_of(s.test);
  for (const auto& x : sv) CHECK(st.count(x) == 0);
  for (const auto& x : se) {
    CHECK(st.count(x) == 0);
    CHECK(sv.count(x) == 0);
  }
}

TEST_CASE("speaker-independent split validates the assignment") {
  SpeakerAssignment a;
  for (int i = 1; i <= 15; ++i) a.train.push_back(i);
  for (int i = 16; i <= 23; ++i) a.validation.push_back(i);
  for (int i = 24; i <= 33; ++i) a.test.push_back(i);

  SpeakerAssignment dup = a;
  dup.test[0] = 1;  // speaker 1 in both train and test
  CHECK_THROWS_WITH_AS(make_speaker_independent_split(clips_for(1, 3), dup),
                       doctest::Contains("more than one split"), Error);

  SpeakerAssignment empty_test = a;
  empty_test.test.clear();
  CHECK_THROWS_AS(make_speaker_independent_split(clips_for(1, 3), empty_test), Error);

  SpeakerAssignment not_partition = a;
  not_partition.test[9] = 24;  // 24 twice, 33 missing
  CHECK_THROWS_AS(make_speaker_independent_split(clips_for(1, 3), not_partition), Error);
}

TEST_CASE("sliding windows are centered with replicate padding") {
  // Frames with distinguishable content: frame t is constant value t.
  const int64_t T = 75;
  Tensor video({T, 1, 2, 2});
  for (int64_t t = 0; t < T; ++t)
    for (int64_t i = 0; i < 4; ++i) video[t * 4 + i] = static_cast<double>(t);

  const Tensor w = sliding_windows(video, 7);
  CHECK(w.shape() == Shape{T, 1, 7, 2, 2});

  // t=0 window = [f0, f0, f0, f0, f1, f2, f3].
  const std::vector<double> expect = {0, 0, 0, 0, 1, 2, 3};
  for (int64_t k = 0; k < 7; ++k) CHECK(w[k * 4] == expect[static_cast<size_t>(k)]);
  // Interior window is centered.
  for (int64_t k = 0; k < 7; ++k) CHECK(w[(10 * 7 + k) * 4] == static_cast<double>(7 + k));
  // Tail is clamped.
  for (int64_t k = 0; k < 7; ++k)
    CHECK(w[((T - 1) * 7 + k) * 4] == static_cast<double>(std::min(T - 1, T - 4 + k)));

  // N=1: each window is the frame itself.
  const Tensor w1 = sliding_windows(video, 1);
  CHECK(w1.shape() == Shape{T, 1, 1, 2, 2});
  for (int64_t t = 0; t < T; ++t) CHECK(w1[t * 4] == static_cast<double>(t));

  CHECK_THROWS_AS(sliding_windows(video, 4), Error);  // even N: center undefined

  // Output count equals input length for any T >= 1 and odd N.
  Rng rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    const int64_t t = rng.uniform_int(1, 12);
    const int n = static_cast<int>(rng.uniform_int(0, 3)) * 2 + 1;
    Tensor v({t, 1, 3, 3});
    CHECK(sliding_windows(v, n).dim(0) == t);
  }
}

TEST_CASE("mirror augmentation is an involution that reverses columns") {
  Rng rng(21);
  Tensor video = Tensor::uniform({4, 1, 3, 5}, -1, 1, rng);
  const Tensor once = mirror_frames(video);
  // Column order reversed.
  for (int64_t r = 0; r < 4 * 3; ++r)
    for (int64_t x = 0; x < 5; ++x) CHECK(once[r * 5 + x] == video[r * 5 + (4 - x)]);
  // Involution, bit-exact.
  const Tensor twice = mirror_frames(once);
  CHECK(tensor_checksum(twice) == tensor_checksum(video));

  // Full-sample augmentation leaves audio and sentence alone.
  auto gc = testutil::tiny_generator_config();
  VideoSample s = testutil::synthetic_sample(gc, 4, 5);
  const uint64_t audio_checksum =
      tensor_checksum(Tensor({static_cast<int64_t>(s.audio.samples.size())}, s.audio.samples));
  VideoSample m = augment_mirror(s);
  CHECK(tensor_checksum(Tensor({static_cast<int64_t>(m.audio.samples.size())}, m.audio.samples)) ==
        audio_checksum);
  CHECK(m.sentence.text() == s.sentence.text());
  CHECK(tensor_checksum(augment_mirror(m).frames) == tensor_checksum(s.frames));
}
