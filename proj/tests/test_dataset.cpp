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

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "lipsynth/dataset.hpp"
#include "lipsynth/error.hpp"
#include "testutil.hpp"

using namespace lipsynth;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("lipsynth_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(reinterpret_cast<uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Writes one on-disk clip with identity-aligned 128x96 frames.
void write_clip(const fs::path& dir, const std::string& stem, int64_t frames, int sample_rate,
                uint64_t seed, const std::string& transcript = "bin blue at a 9 again") {
  fs::create_directories(dir);
  Rng rng(seed);
  Tensor raw = Tensor::uniform({frames, 1, 128, 96}, 0.0, 1.0, rng);
  write_frames_file((dir / (stem + ".frames")).string(), raw);

  const auto t = canonical_anchor_template();
  FrameAnchors a{};
  for (size_t i = 0; i < 10; ++i) a[i] = t[i];
  write_anchors_file((dir / (stem + ".anchors")).string(),
                     std::vector<FrameAnchors>(static_cast<size_t>(frames), a));

  WaveformClip audio;
  audio.sample_rate = sample_rate;
  audio.samples.resize(static_cast<size_t>(frames * (sample_rate / 25)));
  for (size_t i = 0; i < audio.samples.size(); ++i)
    audio.samples[i] = 0.5 * std::sin(0.01 * static_cast<double>(i));
  write_wav((dir / (stem + ".wav")).string(), audio);

  std::ofstream txt(dir / (stem + ".txt"));
  txt << transcript << "\n";
}

}  // namespace

TEST_CASE("wav files round-trip deterministically") {
  TempDir tmp;
  WaveformClip clip;
  clip.sample_rate = 8000;
  Rng rng(4);
  clip.samples.resize(1000);
  for (auto& s : clip.samples) s = rng.uniform(-1, 1);

  const std::string p1 = (tmp.path / "a.wav").string();
  const std::string p2 = (tmp.path / "b.wav").string();
  write_wav(p1, clip);
  write_wav(p2, clip);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(b1 == b2);  // bit-identical writes

  const WaveformClip back = read_wav(p1);
  CHECK(back.sample_rate == 8000);
  REQUIRE(back.samples.size() == clip.samples.size());
  for (size_t i = 0; i < back.samples.size(); ++i)
    CHECK(back.samples[i] == doctest::Approx(clip.samples[i]).epsilon(1e-4));

  CHECK_THROWS_AS(read_wav((tmp.path / "missing.wav").string()), Error);
  std::ofstream bad(tmp.path / "bad.wav", std::ios::binary);
  bad << "NOTAWAVE====";
  bad.close();
  CHECK_THROWS_AS(read_wav((tmp.path / "bad.wav").string()), Error);
}

TEST_CASE("frame and tensor containers round-trip") {
  TempDir tmp;
  Rng rng(5);
  Tensor frames = Tensor::uniform({3, 1, 8, 9}, 0.0, 1.0, rng);
  const std::string fp = (tmp.path / "x.frames").string();
  write_frames_file(fp, frames);
  const Tensor back = read_frames_file(fp);
  CHECK(back.shape() == frames.shape());
  for (int64_t i = 0; i < back.numel(); ++i)
    CHECK(back[i] == doctest::Approx(frames[i]).epsilon(1.0 / 255.0));

  Tensor t = Tensor::uniform({2, 3, 4}, -5, 5, rng);
  const std::string tp = (tmp.path / "x.vt").string();
  write_tensor_file(tp, t);
  const Tensor tb = read_tensor_file(tp);
  CHECK(tensor_checksum(tb) == tensor_checksum(t));  // doubles: bit-exact

  // Truncation is detected.
  std::ofstream f(tp, std::ios::binary | std::ios::trunc);
  f << "LSVT1234";
  f.close();
  CHECK_THROWS_AS(read_tensor_file(tp), Error);
}

TEST_CASE("corpus scan finds clips and validates layout") {
  TempDir tmp;
  write_clip(tmp.path / "s1", "c0", 4, 8000, 1);
  write_clip(tmp.path / "s1", "c1", 4, 8000, 2);
  write_clip(tmp.path / "s2", "c0", 6, 8000, 3);

  const CorpusIndex idx = scan_corpus(tmp.path.string());
  REQUIRE(idx.entries.size() == 3);
  CHECK(idx.entries[0].clip_id == "s1/c0");
  CHECK(idx.entries[2].speaker_id == 2);
  CHECK(idx.find("s2/c0").wav_path == (tmp.path / "s2" / "c0.wav").string());
  CHECK_THROWS_AS(idx.find("s9/zzz"), Error);

  // A missing transcript is reported with the clip name.
  fs::remove(tmp.path / "s1" / "c1.txt");
  CHECK_THROWS_WITH_AS(scan_corpus(tmp.path.string()), doctest::Contains("s1/c1"), Error);
}

TEST_CASE("load_sample preprocesses and validates the duration invariant") {
  TempDir tmp;
  write_clip(tmp.path / "s1", "good", 5, 8000, 7);
  const CorpusIndex idx = scan_corpus(tmp.path.string());
  PreprocessConfig cfg;

  const VideoSample s = load_sample(idx.find("s1/good"), cfg, 25);
  CHECK(s.frames.shape() == Shape{5, 1, 64, 96});
  CHECK(s.frames.min() >= -1.0);
  CHECK(s.frames.max() <= 1.0);
  CHECK(s.sentence.text() == "bin blue at a 9 again");
  CHECK(s.audio.samples.size() == 5 * 320);

  // Audio/video length mismatch beyond one hop is an error.
  WaveformClip bad;
  bad.sample_rate = 8000;
  bad.samples.assign(5 * 320 + 700, 0.1);
  write_wav((tmp.path / "s1" / "good.wav").string(), bad);
  CHECK_THROWS_WITH_AS(load_sample(idx.find("s1/good"), cfg, 25), doctest::Contains("s1/good"),
                       Error);
}

TEST_CASE("preprocessing cache round-trips through load_sample_cached") {
  TempDir tmp;
  write_clip(tmp.path / "s1", "c", 4, 8000, 9);
  const CorpusIndex idx = scan_corpus(tmp.path.string());
  PreprocessConfig cfg;
  const VideoSample direct = load_sample(idx.find("s1/c"), cfg, 25);

  const std::string cache = (tmp.path / "c.vt").string();
  write_tensor_file(cache, direct.frames);
  const VideoSample cached = load_sample_cached(idx.find("s1/c"), cfg, 25, cache);
  CHECK(tensor_checksum(cached.frames) == tensor_checksum(direct.frames));
}

TEST_CASE("split files round-trip") {
  TempDir tmp;
  const std::vector<std::string> ids = {"s1/a", "s1/b", "s2/c"};
  const std::string p = (tmp.path / "train.txt").string();
  write_split_file(p, ids);
  CHECK(read_split_file(p) == ids);
}
