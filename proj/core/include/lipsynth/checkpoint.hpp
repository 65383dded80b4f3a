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

#ifndef LIPSYNTH_CHECKPOINT_H_
#define LIPSYNTH_CHECKPOINT_H_

#include <string>
#include <utility>
#include <vector>

#include "lipsynth/tensor.hpp"

namespace lipsynth {

// Versioned binary container: a configuration echo, named parameter blobs
// (raw doubles, bit-exact round trip), and an auxiliary JSON state string.
struct Checkpoint {
  static constexpr uint32_t kVersion = 1;

  std::string config_json;
  std::vector<std::pair<std::string, Tensor>> blobs;
  std::string aux_json;

  const Tensor& blob(const std::string& name) const;
  bool has_blob(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace lipsynth

#endif  // LIPSYNTH_CHECKPOINT_H_
