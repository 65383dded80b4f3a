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

#include "lipsynth/grid.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <set>

#include "lipsynth/error.hpp"
#include "lipsynth/rng.hpp"

namespace lipsynth {

namespace {

const std::vector<std::string> kCommands = {"bin", "lay", "place", "set"};
const std::vector<std::string> kColors = {"blue", "green", "red", "white"};
const std::vector<std::string> kPrepositions = {"at", "by", "in", "with"};
const std::vector<std::string> kAdverbs = {"again", "now", "please", "soon"};

void require_in(const std::string& token, const std::vector<std::string>& domain, int position,
                const std::string& field) {
  if (std::find(domain.begin(), domain.end(), token) == domain.end()) {
    fail(ErrorCategory::kData, "grid sentence token " + std::to_string(position) + " ('" + token +
                                   "') is not a valid " + field);
  }
}

}  // namespace

std::vector<std::string> GridSentence::words() const {
  return {command, color, preposition, std::string(1, letter), std::to_string(digit), adverb};
}

std::string GridSentence::text() const {
  std::string out;
  for (const auto& w : words()) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

GridSentence parse_grid_sentence(const std::vector<std::string>& tokens) {
  check(tokens.size() == 6, ErrorCategory::kData,
        "grid sentence must have exactly 6 tokens, got " + std::to_string(tokens.size()));
  GridSentence s;
  require_in(tokens[0], kCommands, 1, "command");
  s.command = tokens[0];
  require_in(tokens[1], kColors, 2, "color");
  s.color = tokens[1];
  require_in(tokens[2], kPrepositions, 3, "preposition");
  s.preposition = tokens[2];

  const std::string& letter_tok = tokens[3];
  check(letter_tok.size() == 1, ErrorCategory::kData,
        "grid sentence token 4 ('" + letter_tok + "') is not a single letter");
  char c = static_cast<char>(std::tolower(static_cast<unsigned char>(letter_tok[0])));
  check(c >= 'a' && c <= 'z', ErrorCategory::kData,
        "grid sentence token 4 ('" + letter_tok + "') is not a letter");
  check(c != 'w', ErrorCategory::kData,
        "grid sentence token 4: letter 'W' is excluded from the GRID grammar");
  s.letter = c;

  const std::string& digit_tok = tokens[4];
  check(digit_tok.size() == 1 && digit_tok[0] >= '0' && digit_tok[0] <= '9', ErrorCategory::kData,
        "grid sentence token 5 ('" + digit_tok + "') is not a digit 0-9");
  s.digit = digit_tok[0] - '0';

  require_in(tokens[5], kAdverbs, 6, "adverb");
  s.adverb = tokens[5];
  return s;
}

DatasetSplit make_speaker_dependent_split(const std::vector<SampleRef>& samples, uint64_t seed) {
  check(!samples.empty(), ErrorCategory::kData, "speaker-dependent split: empty sample set");
  const std::set<int> allowed = {1, 2, 4, 29};
  std::map<int, std::vector<std::string>> by_speaker;
  for (const auto& s : samples) {
    check(allowed.count(s.speaker_id) != 0, ErrorCategory::kData,
          "speaker-dependent split admits only subjects 1, 2, 4, 29; got speaker " +
              std::to_string(s.speaker_id) + " (clip " + s.clip_id + ")");
    by_speaker[s.speaker_id].push_back(s.clip_id);
  }

  DatasetSplit split;
  split.mode = DatasetSplit::Mode::kSpeakerDependent;
  Rng rng(seed);
  for (auto& [speaker, clips] : by_speaker) {
    std::sort(clips.begin(), clips.end());
    rng.shuffle(clips);
    const int64_t n = static_cast<int64_t>(clips.size());
    const int64_t n_val = n * 5 / 100;
    const int64_t n_test = n * 5 / 100;
    const int64_t n_train = n - n_val - n_test;
    for (int64_t i = 0; i < n; ++i) {
      if (i < n_train) {
        split.train.push_back(clips[static_cast<size_t>(i)]);
      } else if (i < n_train + n_val) {
        split.validation.push_back(clips[static_cast<size_t>(i)]);
      } else {
        split.test.push_back(clips[static_cast<size_t>(i)]);
      }
    }
  }
  return split;
}

DatasetSplit make_speaker_independent_split(const std::vector<SampleRef>& samples,
                                            const SpeakerAssignment& assignment) {
  check(assignment.train.size() == 15 && assignment.validation.size() == 8 &&
            assignment.test.size() == 10,
        ErrorCategory::kData,
        "speaker assignment must be 15/8/10 subjects, got " +
            std::to_string(assignment.train.size()) + "/" +
            std::to_string(assignment.validation.size()) + "/" +
            std::to_string(assignment.test.size()));
  std::map<int, int> route;  // speaker -> 0 train, 1 val, 2 test
  auto insert_all = [&route](const std::vector<int>& ids, int dest) {
    for (int id : ids) {
      check(id >= 1 && id <= 33, ErrorCategory::kData,
            "speaker id out of range 1-33: " + std::to_string(id));
      auto [it, inserted] = route.emplace(id, dest);
      (void)it;
      check(inserted, ErrorCategory::kData,
            "speaker " + std::to_string(id) + " listed in more than one split");
    }
  };
  insert_all(assignment.train, 0);
  insert_all(assignment.validation, 1);
  insert_all(assignment.test, 2);
  check(route.size() == 33, ErrorCategory::kData,
        "speaker assignment must cover all 33 GRID speakers");

  DatasetSplit split;
  split.mode = DatasetSplit::Mode::kSpeakerIndependent;
  for (const auto& s : samples) {
    auto it = route.find(s.speaker_id);
    check(it != route.end(), ErrorCategory::kData,
          "clip " + s.clip_id + " has speaker " + std::to_string(s.speaker_id) +
              " outside the 33-speaker roster");
    switch (it->second) {
      case 0: split.train.push_back(s.clip_id); break;
      case 1: split.validation.push_back(s.clip_id); break;
      default: split.test.push_back(s.clip_id); break;
    }
  }
  return split;
}

Tensor sliding_windows(const Tensor& video, int window_n) {
  check(video.rank() == 4, ErrorCategory::kShape,
        "sliding_windows: video must be (T, C, H, W), got " + shape_str(video.shape()));
  check(window_n >= 1 && window_n % 2 == 1, ErrorCategory::kShape,
        "sliding_windows: window size must be odd, got " + std::to_string(window_n));
  const int64_t T = video.dim(0), C = video.dim(1), H = video.dim(2), W = video.dim(3);
  check(T >= 1, ErrorCategory::kShape, "sliding_windows: empty video");
  const int64_t half = window_n / 2;
  const int64_t plane = H * W;
  Tensor out({T, C, window_n, H, W});
  for (int64_t t = 0; t < T; ++t) {
    for (int64_t c = 0; c < C; ++c) {
      for (int64_t k = 0; k < window_n; ++k) {
        int64_t src_t = std::clamp<int64_t>(t + k - half, 0, T - 1);
        std::memcpy(out.data() + ((t * C + c) * window_n + k) * plane,
                    video.data() + (src_t * C + c) * plane,
                    static_cast<size_t>(plane) * sizeof(double));
      }
    }
  }
  return out;
}

Tensor mirror_frames(const Tensor& video) {
  check(video.rank() == 4, ErrorCategory::kShape,
        "mirror_frames: video must be (T, C, H, W), got " + shape_str(video.shape()));
  const int64_t W = video.dim(3);
  const int64_t rows = video.numel() / W;
  Tensor out(video.shape());
  for (int64_t r = 0; r < rows; ++r) {
    const double* src = video.data() + r * W;
    double* dst = out.data() + r * W;
    for (int64_t x = 0; x < W; ++x) dst[x] = src[W - 1 - x];
  }
  return out;
}

}  // namespace lipsynth
