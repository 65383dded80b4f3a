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

#ifndef LIPSYNTH_GRID_H_
#define LIPSYNTH_GRID_H_

#include <cstdint>
#include <string>
#include <vector>

#include "lipsynth/tensor.hpp"

namespace lipsynth {

// A six-word GRID corpus sentence: command color preposition letter digit
// adverb, e.g. "bin blue at a 9 again". The letter W is excluded from the
// grammar.
struct GridSentence {
  std::string command;      // bin | lay | place | set
  std::string color;        // blue | green | red | white
  std::string preposition;  // at | by | in | with
  char letter = 'a';        // a-z minus w
  int digit = 0;            // 0-9
  std::string adverb;       // again | now | please | soon

  std::vector<std::string> words() const;
  std::string text() const;
};

GridSentence parse_grid_sentence(const std::vector<std::string>& tokens);

// Clip identity plus the speaker it belongs to; what the splitters operate on.
struct SampleRef {
  std::string clip_id;
  int speaker_id = 0;
};

struct DatasetSplit {
  enum class Mode { kSpeakerDependent, kSpeakerIndependent };
  Mode mode = Mode::kSpeakerDependent;
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
};

// Per-speaker random 90/5/5 partition, deterministic under seed. Only the
// four speaker-dependent subjects (1, 2, 4, 29) are admissible.
DatasetSplit make_speaker_dependent_split(const std::vector<SampleRef>& samples, uint64_t seed);

struct SpeakerAssignment {
  std::vector<int> train;       // 15 speakers
  std::vector<int> validation;  // 8 speakers
  std::vector<int> test;        // 10 speakers
};

// Routes every clip by its speaker. The assignment must partition the 33
// GRID speakers into 15/8/10.
DatasetSplit make_speaker_independent_split(const std::vector<SampleRef>& samples,
                                            const SpeakerAssignment& assignment);

// Centered sliding windows with replicate edge padding. Input video is
// (T, C, H, W); the result is (T, C, N, H, W), one window per frame, laid
// out to feed the 3-D visual encoder directly. N must be odd.
Tensor sliding_windows(const Tensor& video, int window_n);

// Horizontal flip of every frame; (T, C, H, W) in, same shape out.
Tensor mirror_frames(const Tensor& video);

}  // namespace lipsynth

#endif  // LIPSYNTH_GRID_H_
