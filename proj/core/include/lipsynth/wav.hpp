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

#ifndef LIPSYNTH_WAV_H_
#define LIPSYNTH_WAV_H_

#include <string>
#include <vector>

namespace lipsynth {

// Mono raw audio in [-1, 1] with sample-rate metadata.
struct WaveformClip {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

// 16-bit PCM mono little-endian WAV.
WaveformClip read_wav(const std::string& path);
void write_wav(const std::string& path, const WaveformClip& clip);

}  // namespace lipsynth

#endif  // LIPSYNTH_WAV_H_
