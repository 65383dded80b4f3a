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

#include "lipsynth/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "lipsynth/error.hpp"

namespace lipsynth {

namespace {

constexpr char kMagic[4] = {'L', 'S', 'C', 'K'};

void put_u32(std::string& s, uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_str(std::string& s, const std::string& v) {
  put_u32(s, static_cast<uint32_t>(v.size()));
  s += v;
}

struct Cursor {
  const unsigned char* p;
  size_t len;
  size_t pos = 0;
  std::string path;

  void need(size_t n) {
    check(pos + n <= len, ErrorCategory::kCheckpoint, "checkpoint file truncated: " + path);
  }
  uint32_t u32() {
    need(4);
    uint32_t v = static_cast<uint32_t>(p[pos]) | (static_cast<uint32_t>(p[pos + 1]) << 8) |
                 (static_cast<uint32_t>(p[pos + 2]) << 16) |
                 (static_cast<uint32_t>(p[pos + 3]) << 24);
    pos += 4;
    return v;
  }
  std::string str() {
    const uint32_t n = u32();
    need(n);
    std::string v(reinterpret_cast<const char*>(p + pos), n);
    pos += n;
    return v;
  }
};

}  // namespace

const Tensor& Checkpoint::blob(const std::string& name) const {
  for (const auto& [n, t] : blobs) {
    if (n == name) return t;
  }
  fail(ErrorCategory::kCheckpoint, "checkpoint blob not found: " + name);
}

bool Checkpoint::has_blob(const std::string& name) const {
  for (const auto& [n, t] : blobs) {
    if (n == name) return true;
  }
  return false;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, Checkpoint::kVersion);
  put_str(out, ck.config_json);
  put_u32(out, static_cast<uint32_t>(ck.blobs.size()));
  for (const auto& [name, t] : ck.blobs) {
    put_str(out, name);
    put_u32(out, static_cast<uint32_t>(t.rank()));
    for (int i = 0; i < t.rank(); ++i) put_u32(out, static_cast<uint32_t>(t.dim(i)));
    const size_t bytes = static_cast<size_t>(t.numel()) * sizeof(double);
    out.append(reinterpret_cast<const char*>(t.data()), bytes);
  }
  put_str(out, ck.aux_json);

  // Write to temp, then atomic rename: no partial checkpoints on failure.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    check(f.good(), ErrorCategory::kIo, "cannot write checkpoint: " + tmp);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    check(f.good(), ErrorCategory::kIo, "failed writing checkpoint: " + tmp);
  }
  check(std::rename(tmp.c_str(), path.c_str()) == 0, ErrorCategory::kIo,
        "atomic rename failed for checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  check(in.good(), ErrorCategory::kCheckpoint, "cannot open checkpoint: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  check(bytes.size() >= 8, ErrorCategory::kCheckpoint, "checkpoint file truncated: " + path);
  check(std::memcmp(bytes.data(), kMagic, 4) == 0, ErrorCategory::kCheckpoint,
        "not a checkpoint file: " + path);

  Cursor c{reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), 4, path};
  const uint32_t version = c.u32();
  check(version == Checkpoint::kVersion, ErrorCategory::kCheckpoint,
        "unsupported checkpoint version " + std::to_string(version) + " in " + path);

  Checkpoint ck;
  ck.config_json = c.str();
  const uint32_t n_blobs = c.u32();
  ck.blobs.reserve(n_blobs);
  for (uint32_t i = 0; i < n_blobs; ++i) {
    std::string name = c.str();
    const uint32_t rank = c.u32();
    check(rank <= 8, ErrorCategory::kCheckpoint, "corrupt blob rank in " + path);
    Shape shape;
    for (uint32_t d = 0; d < rank; ++d) shape.push_back(c.u32());
    const int64_t numel = shape_numel(shape);
    const size_t payload = static_cast<size_t>(numel) * sizeof(double);
    c.need(payload);
    Tensor t(shape);
    std::memcpy(t.data(), c.p + c.pos, payload);
    c.pos += payload;
    ck.blobs.emplace_back(std::move(name), std::move(t));
  }
  ck.aux_json = c.str();
  check(c.pos == c.len, ErrorCategory::kCheckpoint, "trailing bytes in checkpoint: " + path);
  return ck;
}

}  // namespace lipsynth
