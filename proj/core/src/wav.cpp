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

#include "lipsynth/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "lipsynth/error.hpp"

namespace lipsynth {

namespace {

void put_u32(std::string& s, uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& s, uint16_t v) {
  for (int i = 0; i < 2; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t get_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t get_u16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

WaveformClip read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  check(in.good(), ErrorCategory::kIo, "cannot open wav file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  check(bytes.size() >= 44 && std::memcmp(p, "RIFF", 4) == 0 && std::memcmp(p + 8, "WAVE", 4) == 0,
        ErrorCategory::kIo, "not a RIFF/WAVE file: " + path);

  size_t pos = 12;
  int sample_rate = 0;
  uint16_t channels = 0, bits = 0, format = 0;
  const unsigned char* data = nullptr;
  uint32_t data_len = 0;
  while (pos + 8 <= bytes.size()) {
    const uint32_t chunk_len = get_u32(p + pos + 4);
    if (std::memcmp(p + pos, "fmt ", 4) == 0) {
      check(pos + 8 + 16 <= bytes.size(), ErrorCategory::kIo, "truncated fmt chunk: " + path);
      format = get_u16(p + pos + 8);
      channels = get_u16(p + pos + 10);
      sample_rate = static_cast<int>(get_u32(p + pos + 12));
      bits = get_u16(p + pos + 22);
    } else if (std::memcmp(p + pos, "data", 4) == 0) {
      check(pos + 8 + chunk_len <= bytes.size(), ErrorCategory::kIo,
            "truncated data chunk: " + path);
      data = p + pos + 8;
      data_len = chunk_len;
    }
    pos += 8 + chunk_len + (chunk_len & 1);
  }
  check(format == 1 && channels == 1 && bits == 16, ErrorCategory::kIo,
        "wav must be mono 16-bit PCM: " + path);
  check(data != nullptr, ErrorCategory::kIo, "wav has no data chunk: " + path);

  WaveformClip clip;
  clip.sample_rate = sample_rate;
  const size_t n = data_len / 2;
  clip.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const auto v = static_cast<int16_t>(get_u16(data + 2 * i));
    clip.samples[i] = static_cast<double>(v) / 32768.0;
  }
  return clip;
}

void write_wav(const std::string& path, const WaveformClip& clip) {
  check(clip.sample_rate > 0, ErrorCategory::kIo, "write_wav: sample rate not set");
  const uint32_t n = static_cast<uint32_t>(clip.samples.size());
  std::string out;
  out.reserve(44 + 2 * n);
  out += "RIFF";
  put_u32(out, 36 + 2 * n);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<uint32_t>(clip.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, 2 * n);
  for (double s : clip.samples) {
    const double clamped = std::clamp(s, -1.0, 1.0);
    const auto v = static_cast<int16_t>(std::lrint(clamped * 32767.0));
    put_u16(out, static_cast<uint16_t>(v));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  check(f.good(), ErrorCategory::kIo, "cannot write wav file: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  check(f.good(), ErrorCategory::kIo, "failed writing wav file: " + path);
}

}  // namespace lipsynth
