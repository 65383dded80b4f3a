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

#ifndef LIPSYNTH_ERROR_H_
#define LIPSYNTH_ERROR_H_

#include <stdexcept>
#include <string>

namespace lipsynth {

// Coarse failure category, surfaced by the CLI as a machine-parsable tag
// and mapped to the process exit code.
enum class ErrorCategory {
  kConfig,      // bad or inconsistent configuration / arguments
  kData,        // malformed corpus, transcripts, splits
  kShape,       // tensor / signal dimension mismatch
  kIo,          // file system and serialization failures
  kCheckpoint,  // versioning or corruption of checkpoint files
  kTrain,       // training-time failures (non-finite losses, empty splits)
  kMetric,      // evaluation failures
  kInternal,    // bugs; should not happen
};

const char* error_category_name(ErrorCategory c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] inline void fail(ErrorCategory category, const std::string& message) {
  throw Error(category, message);
}

inline void check(bool cond, ErrorCategory category, const std::string& message) {
  if (!cond) fail(category, message);
}

}  // namespace lipsynth

#endif  // LIPSYNTH_ERROR_H_
