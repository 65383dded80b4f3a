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

#ifndef LIPSYNTH_CONFIG_H_
#define LIPSYNTH_CONFIG_H_

#include <string>
#include <vector>

#include "lipsynth/critic.hpp"
#include "lipsynth/generator.hpp"
#include "lipsynth/metrics.hpp"
#include "lipsynth/preprocess.hpp"
#include "lipsynth/speech_encoder.hpp"
#include "lipsynth/trainer.hpp"

namespace lipsynth {

// Fully resolved run configuration: defaults, then an optional JSON config
// file, then dotted-path command line overrides (e.g.
// "train.batch_size=4"). Unknown keys are rejected. The canonical merged
// JSON is kept for checkpoint echoes and reproducibility.
struct RunConfig {
  std::string dataset_root;
  int sample_rate = 50000;
  int fps = 25;
  int channels = 1;

  PreprocessConfig preprocess;
  GeneratorConfig generator;
  CriticConfig critic;
  SpeechEncoderConfig speech_encoder;
  std::string speech_encoder_weights;  // optional external weights
  TrainConfig train;
  EvalConfig eval;

  std::string split_mode = "speaker_dependent";
  uint64_t split_seed = 0;
  std::string split_assignment_file;

  std::string canonical_json;
};

// The documented default configuration as JSON text.
std::string default_config_json();

RunConfig load_run_config(const std::string& config_path,
                          const std::vector<std::string>& overrides,
                          const std::string& env_data_root);

}  // namespace lipsynth

#endif  // LIPSYNTH_CONFIG_H_
