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

#include "lipsynth/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lipsynth/error.hpp"

namespace fs = std::filesystem;

namespace lipsynth {

namespace {

constexpr char kFramesMagic[4] = {'L', 'S', 'V', 'F'};
constexpr char kTensorMagic[4] = {'L', 'S', 'V', 'T'};
constexpr uint32_t kContainerVersion = 1;

void put_u32(std::string& s, uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t get_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  check(in.good(), ErrorCategory::kIo, "cannot open file: " + path);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

}  // namespace

const ClipEntry& CorpusIndex::find(const std::string& clip_id) const {
  for (const auto& e : entries) {
    if (e.clip_id == clip_id) return e;
  }
  fail(ErrorCategory::kData, "clip not found in corpus: " + clip_id);
}

std::vector<SampleRef> CorpusIndex::refs() const {
  std::vector<SampleRef> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back({e.clip_id, e.speaker_id});
  return out;
}

CorpusIndex scan_corpus(const std::string& root) {
  check(fs::is_directory(root), ErrorCategory::kData, "dataset root is not a directory: " + root);
  CorpusIndex index;
  index.root = root;
  std::vector<std::string> speaker_dirs;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory() && e.path().filename().string().size() > 1 &&
        e.path().filename().string()[0] == 's') {
      speaker_dirs.push_back(e.path().filename().string());
    }
  }
  std::sort(speaker_dirs.begin(), speaker_dirs.end());
  for (const auto& dir : speaker_dirs) {
    int speaker_id = 0;
    try {
      speaker_id = std::stoi(dir.substr(1));
    } catch (...) {
      fail(ErrorCategory::kData, "malformed speaker directory name: " + dir);
    }
    std::vector<std::string> stems;
    for (const auto& f : fs::directory_iterator(fs::path(root) / dir)) {
      if (f.path().extension() == ".frames") stems.push_back(f.path().stem().string());
    }
    std::sort(stems.begin(), stems.end());
    for (const auto& stem : stems) {
      ClipEntry entry;
      entry.clip_id = dir + "/" + stem;
      entry.speaker_id = speaker_id;
      const fs::path base = fs::path(root) / dir / stem;
      entry.frames_path = base.string() + ".frames";
      entry.anchors_path = base.string() + ".anchors";
      entry.wav_path = base.string() + ".wav";
      entry.transcript_path = base.string() + ".txt";
      for (const std::string* p :
           {&entry.anchors_path, &entry.wav_path, &entry.transcript_path}) {
        check(fs::exists(*p), ErrorCategory::kData,
              "clip " + entry.clip_id + " is missing file " + *p);
      }
      index.entries.push_back(std::move(entry));
    }
  }
  check(!index.entries.empty(), ErrorCategory::kData, "no clips found under " + root);
  return index;
}

Tensor read_frames_file(const std::string& path) {
  const std::string bytes = read_all(path);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  check(bytes.size() >= 24 && std::memcmp(p, kFramesMagic, 4) == 0, ErrorCategory::kIo,
        "not a frames container: " + path);
  check(get_u32(p + 4) == kContainerVersion, ErrorCategory::kIo,
        "unsupported frames container version in " + path);
  const int64_t T = get_u32(p + 8), C = get_u32(p + 12), H = get_u32(p + 16), W = get_u32(p + 20);
  const int64_t n = T * C * H * W;
  check(static_cast<int64_t>(bytes.size()) == 24 + n, ErrorCategory::kIo,
        "frames container truncated: " + path);
  Tensor t({T, C, H, W});
  for (int64_t i = 0; i < n; ++i) t[i] = static_cast<double>(p[24 + i]) / 255.0;
  return t;
}

void write_frames_file(const std::string& path, const Tensor& frames01) {
  check(frames01.rank() == 4, ErrorCategory::kShape, "frames file expects (T, C, H, W)");
  std::string out;
  out.append(kFramesMagic, 4);
  put_u32(out, kContainerVersion);
  for (int i = 0; i < 4; ++i) put_u32(out, static_cast<uint32_t>(frames01.dim(i)));
  const int64_t n = frames01.numel();
  out.reserve(out.size() + static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    const double v = std::clamp(frames01[i], 0.0, 1.0);
    out.push_back(static_cast<char>(std::lrint(v * 255.0)));
  }
  atomic_write_file(path, out);
}

std::vector<FrameAnchors> read_anchors_file(const std::string& path) {
  std::ifstream in(path);
  check(in.good(), ErrorCategory::kIo, "cannot open anchors file: " + path);
  std::vector<FrameAnchors> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    check(toks.size() == 10, ErrorCategory::kData,
          "anchors line must have 10 numbers (5 x,y pairs): " + path);
    FrameAnchors a{};
    for (size_t i = 0; i < 10; ++i) a[i] = std::stod(toks[i]);
    out.push_back(a);
  }
  check(!out.empty(), ErrorCategory::kData, "anchors file is empty: " + path);
  return out;
}

void write_anchors_file(const std::string& path, const std::vector<FrameAnchors>& anchors) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& a : anchors) {
    for (size_t i = 0; i < 10; ++i) {
      if (i) os << ' ';
      os << a[i];
    }
    os << '\n';
  }
  atomic_write_file(path, os.str());
}

Tensor read_tensor_file(const std::string& path) {
  const std::string bytes = read_all(path);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  check(bytes.size() >= 12 && std::memcmp(p, kTensorMagic, 4) == 0, ErrorCategory::kIo,
        "not a tensor container: " + path);
  check(get_u32(p + 4) == kContainerVersion, ErrorCategory::kIo,
        "unsupported tensor container version in " + path);
  const uint32_t rank = get_u32(p + 8);
  check(rank <= 8 && bytes.size() >= 12 + 4 * rank, ErrorCategory::kIo,
        "tensor container truncated: " + path);
  Shape shape;
  for (uint32_t i = 0; i < rank; ++i) shape.push_back(get_u32(p + 12 + 4 * i));
  const int64_t n = shape_numel(shape);
  const size_t header = 12 + 4 * rank;
  check(static_cast<int64_t>(bytes.size()) == static_cast<int64_t>(header) + n * 8,
        ErrorCategory::kIo, "tensor container truncated: " + path);
  Tensor t(shape);
  std::memcpy(t.data(), p + header, static_cast<size_t>(n) * sizeof(double));
  return t;
}

void write_tensor_file(const std::string& path, const Tensor& t) {
  std::string out;
  out.append(kTensorMagic, 4);
  put_u32(out, kContainerVersion);
  put_u32(out, static_cast<uint32_t>(t.rank()));
  for (int i = 0; i < t.rank(); ++i) put_u32(out, static_cast<uint32_t>(t.dim(i)));
  const size_t payload = static_cast<size_t>(t.numel()) * sizeof(double);
  out.append(reinterpret_cast<const char*>(t.data()), payload);
  atomic_write_file(path, out);
}

GridSentence read_transcript_file(const std::string& path) {
  std::ifstream in(path);
  check(in.good(), ErrorCategory::kData, "missing transcript file: " + path);
  std::string line;
  std::getline(in, line);
  return parse_grid_sentence(split_ws(line));
}

std::vector<std::string> read_split_file(const std::string& path) {
  std::ifstream in(path);
  check(in.good(), ErrorCategory::kIo, "cannot open split file: " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

void write_split_file(const std::string& path, const std::vector<std::string>& clip_ids) {
  std::string out;
  for (const auto& id : clip_ids) {
    out += id;
    out += '\n';
  }
  atomic_write_file(path, out);
}

void atomic_write_file(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    check(f.good(), ErrorCategory::kIo, "cannot write file: " + tmp);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    check(f.good(), ErrorCategory::kIo, "failed writing file: " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  check(!ec, ErrorCategory::kIo, "atomic rename failed for " + path + ": " + ec.message());
}

VideoSample load_sample(const ClipEntry& entry, const PreprocessConfig& config, int fps) {
  VideoSample s;
  s.speaker_id = entry.speaker_id;
  s.clip_id = entry.clip_id;
  const Tensor raw = read_frames_file(entry.frames_path);
  const auto anchors = read_anchors_file(entry.anchors_path);
  check(anchors.size() == static_cast<size_t>(raw.dim(0)), ErrorCategory::kData,
        "clip " + entry.clip_id + ": anchor rows (" + std::to_string(anchors.size()) +
            ") do not match frame count (" + std::to_string(raw.dim(0)) + ")");
  s.frames = preprocess_frames(raw, anchors, config);
  s.audio = read_wav(entry.wav_path);
  s.sentence = read_transcript_file(entry.transcript_path);

  // Audio/video duration must agree to within one frame-hop of samples.
  const int64_t frames = s.frames.dim(0);
  const int64_t hop = s.audio.sample_rate / fps;
  const int64_t expected = frames * hop;
  const int64_t actual = static_cast<int64_t>(s.audio.samples.size());
  check(std::llabs(actual - expected) <= hop, ErrorCategory::kData,
        "clip " + entry.clip_id + ": audio length " + std::to_string(actual) +
            " does not match " + std::to_string(frames) + " frames at " + std::to_string(fps) +
            " fps (expected about " + std::to_string(expected) + " samples)");
  return s;
}

VideoSample load_sample_cached(const ClipEntry& entry, const PreprocessConfig& config, int fps,
                               const std::string& cache_path) {
  if (fs::exists(cache_path)) {
    VideoSample s;
    s.speaker_id = entry.speaker_id;
    s.clip_id = entry.clip_id;
    s.frames = read_tensor_file(cache_path);
    s.audio = read_wav(entry.wav_path);
    s.sentence = read_transcript_file(entry.transcript_path);
    return s;
  }
  return load_sample(entry, config, fps);
}

VideoSample augment_mirror(const VideoSample& sample) {
  VideoSample out = sample;
  out.frames = mirror_frames(sample.frames);
  return out;
}

}  // namespace lipsynth
