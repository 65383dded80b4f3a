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

#ifndef LIPSYNTH_DATASET_H_
#define LIPSYNTH_DATASET_H_

#include <optional>
#include <string>
#include <vector>

#include "lipsynth/grid.hpp"
#include "lipsynth/preprocess.hpp"
#include "lipsynth/tensor.hpp"
#include "lipsynth/wav.hpp"

namespace lipsynth {

// On-disk corpus layout: one directory per speaker named s<N>; each clip is
// a packed frame file plus a 16-bit PCM WAV and a 6-token transcript:
//
//   root/s1/clip001.frames    raw frames, bytes in [0, 255]
//   root/s1/clip001.anchors   one line per frame: x1 y1 ... x5 y5
//   root/s1/clip001.wav       mono 16-bit PCM
//   root/s1/clip001.txt       "bin blue at a 9 again"
//
// Clip ids are "s1/clip001".

struct ClipEntry {
  std::string clip_id;
  int speaker_id = 0;
  std::string frames_path;
  std::string anchors_path;
  std::string wav_path;
  std::string transcript_path;
};

struct CorpusIndex {
  std::string root;
  std::vector<ClipEntry> entries;

  const ClipEntry& find(const std::string& clip_id) const;
  std::vector<SampleRef> refs() const;
};

CorpusIndex scan_corpus(const std::string& root);

// A fully loaded, preprocessed clip.
struct VideoSample {
  int speaker_id = 0;
  std::string clip_id;
  Tensor frames;  // (T, C, 64, 96), values in [-1, 1]
  WaveformClip audio;
  GridSentence sentence;
};

// Packed byte-tensor file for raw frames: (T, C, H, W), u8 payload scaled
// to [0, 1] on read.
Tensor read_frames_file(const std::string& path);
void write_frames_file(const std::string& path, const Tensor& frames01);

std::vector<FrameAnchors> read_anchors_file(const std::string& path);
void write_anchors_file(const std::string& path, const std::vector<FrameAnchors>& anchors);

// Packed double-tensor container used for preprocessing caches.
Tensor read_tensor_file(const std::string& path);
void write_tensor_file(const std::string& path, const Tensor& t);

GridSentence read_transcript_file(const std::string& path);

std::vector<std::string> read_split_file(const std::string& path);
void write_split_file(const std::string& path, const std::vector<std::string>& clip_ids);

// Write-to-temp plus atomic rename.
void atomic_write_file(const std::string& path, const std::string& bytes);

// Loads and preprocesses one clip; validates the audio/video duration
// invariant at the given frame rate.
VideoSample load_sample(const ClipEntry& entry, const PreprocessConfig& config, int fps);

// Same, but reads the preprocessed tensor from `cache_path` when present.
VideoSample load_sample_cached(const ClipEntry& entry, const PreprocessConfig& config, int fps,
                               const std::string& cache_path);

// Mirror augmentation: frames flipped left-right, audio and sentence kept.
VideoSample augment_mirror(const VideoSample& sample);

}  // namespace lipsynth

#endif  // LIPSYNTH_DATASET_H_
