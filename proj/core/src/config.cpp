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

#include "lipsynth/config.hpp"

#include <fstream>

#include "json.hpp"
#include "lipsynth/error.hpp"

namespace lipsynth {

namespace {

using nlohmann::json;

json defaults() {
  json j;
  j["data"]["root"] = "";
  j["data"]["sample_rate"] = 50000;
  j["data"]["fps"] = 25;
  j["data"]["channels"] = 1;

  j["preprocess"]["resize_h"] = 128;
  j["preprocess"]["resize_w"] = 96;

  j["generator"]["window_n"] = 7;
  j["generator"]["encoder_channels"] = {32, 64, 128, 256, 512};
  j["generator"]["gru_hidden"] = 256;
  j["generator"]["decoder_base_channels"] = 256;
  j["generator"]["seed"] = 1234;

  j["critic"]["t_d"] = 1.0;
  j["critic"]["channels"] = {32, 64, 128, 256, 512, 1024, 2048};
  j["critic"]["kernel"] = 25;
  j["critic"]["stride"] = 4;
  j["critic"]["leaky_slope"] = 0.2;
  j["critic"]["seed"] = 999;

  j["speech_encoder"]["window_ms"] = 25.0;
  j["speech_encoder"]["hop_ms"] = 10.0;
  j["speech_encoder"]["mel_bands"] = 40;
  j["speech_encoder"]["conv_channels"] = {64, 64};
  j["speech_encoder"]["seed"] = 2024;
  j["speech_encoder"]["weights_path"] = "";

  j["loss"]["lambda_l1"] = 150.0;
  j["loss"]["lambda_tv"] = 120.0;
  j["loss"]["lambda_gp"] = 10.0;
  j["loss"]["lambda_p"] = 70.0;

  j["train"]["critic_updates_per_gen"] = 6;
  j["train"]["learning_rate"] = 1e-4;
  j["train"]["adam_beta1"] = 0.5;
  j["train"]["adam_beta2"] = 0.9;
  j["train"]["patience_epochs"] = 10;
  j["train"]["batch_size"] = 8;
  j["train"]["max_epochs"] = 1000;
  j["train"]["max_generator_steps"] = 0;
  j["train"]["improvement_delta"] = 1e-4;
  j["train"]["seed"] = 0;
  j["train"]["log_wall_time"] = true;

  j["eval"]["search_range"] = 5;
  j["eval"]["recognizer_cmd"] = "";
  j["eval"]["pesq_cmd"] = "";

  j["split"]["mode"] = "speaker_dependent";
  j["split"]["seed"] = 0;
  j["split"]["assignment_file"] = "";
  return j;
}

void check_known_keys(const json& user, const json& ref, const std::string& prefix) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    check(ref.contains(it.key()), ErrorCategory::kConfig, "unknown config key: " + path);
    if (it.value().is_object()) {
      check(ref.at(it.key()).is_object(), ErrorCategory::kConfig,
            "config key is not a section: " + path);
      check_known_keys(it.value(), ref.at(it.key()), path);
    }
  }
}

void merge_into(json& base, const json& user) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    if (it.value().is_object() && base.contains(it.key()) && base.at(it.key()).is_object()) {
      merge_into(base.at(it.key()), it.value());
    } else {
      base[it.key()] = it.value();
    }
  }
}

void apply_override(json& tree, const json& ref, const std::string& assignment) {
  const auto eq = assignment.find('=');
  check(eq != std::string::npos, ErrorCategory::kConfig,
        "override must look like key.path=value: " + assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string value_text = assignment.substr(eq + 1);

  std::vector<std::string> parts;
  size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    parts.push_back(path.substr(start, dot == std::string::npos ? dot : dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }

  json* node = &tree;
  const json* ref_node = &ref;
  for (size_t i = 0; i + 1 < parts.size(); ++i) {
    check(ref_node->contains(parts[i]) && ref_node->at(parts[i]).is_object(),
          ErrorCategory::kConfig, "unknown config key: " + path);
    node = &(*node)[parts[i]];
    ref_node = &ref_node->at(parts[i]);
  }
  const std::string& leaf = parts.back();
  check(ref_node->contains(leaf), ErrorCategory::kConfig, "unknown config key: " + path);

  json value;
  try {
    value = json::parse(value_text);
  } catch (...) {
    value = value_text;  // plain string
  }
  (*node)[leaf] = value;
}

template <typename T>
std::vector<T> vec_of(const json& arr) {
  std::vector<T> out;
  for (const auto& v : arr) out.push_back(v.get<T>());
  return out;
}

}  // namespace

std::string default_config_json() { return defaults().dump(2) + "\n"; }

RunConfig load_run_config(const std::string& config_path,
                          const std::vector<std::string>& overrides,
                          const std::string& env_data_root) {
  const json ref = defaults();
  json tree = ref;

  if (!config_path.empty()) {
    std::ifstream in(config_path);
    check(in.good(), ErrorCategory::kConfig, "cannot open config file: " + config_path);
    json user;
    try {
      user = json::parse(in);
    } catch (const std::exception& e) {
      fail(ErrorCategory::kConfig,
           "config file is not valid JSON: " + config_path + " (" + e.what() + ")");
    }
    check_known_keys(user, ref, "");
    merge_into(tree, user);
  }
  for (const auto& ov : overrides) apply_override(tree, ref, ov);

  if (tree["data"]["root"].get<std::string>().empty() && !env_data_root.empty()) {
    tree["data"]["root"] = env_data_root;
  }

  RunConfig rc;
  try {
    rc.dataset_root = tree["data"]["root"].get<std::string>();
    rc.sample_rate = tree["data"]["sample_rate"].get<int>();
    rc.fps = tree["data"]["fps"].get<int>();
    rc.channels = tree["data"]["channels"].get<int>();

    rc.preprocess.resize_h = tree["preprocess"]["resize_h"].get<int>();
    rc.preprocess.resize_w = tree["preprocess"]["resize_w"].get<int>();
    rc.preprocess.channels = rc.channels;

    rc.generator.window_n = tree["generator"]["window_n"].get<int>();
    rc.generator.sample_rate = rc.sample_rate;
    rc.generator.fps = rc.fps;
    rc.generator.encoder_channels = vec_of<int64_t>(tree["generator"]["encoder_channels"]);
    rc.generator.gru_hidden = tree["generator"]["gru_hidden"].get<int64_t>();
    rc.generator.decoder_base_channels = tree["generator"]["decoder_base_channels"].get<int64_t>();
    rc.generator.input_channels = rc.channels;
    rc.generator.input_h = rc.preprocess.resize_h / 2;
    rc.generator.input_w = rc.preprocess.resize_w;
    rc.generator.seed = tree["generator"]["seed"].get<uint64_t>();

    rc.critic.clip_seconds = tree["critic"]["t_d"].get<double>();
    rc.critic.sample_rate = rc.sample_rate;
    rc.critic.channels = vec_of<int64_t>(tree["critic"]["channels"]);
    rc.critic.kernel = tree["critic"]["kernel"].get<int64_t>();
    rc.critic.stride = tree["critic"]["stride"].get<int>();
    rc.critic.leaky_slope = tree["critic"]["leaky_slope"].get<double>();
    rc.critic.seed = tree["critic"]["seed"].get<uint64_t>();

    rc.speech_encoder.sample_rate = rc.sample_rate;
    rc.speech_encoder.window_ms = tree["speech_encoder"]["window_ms"].get<double>();
    rc.speech_encoder.hop_ms = tree["speech_encoder"]["hop_ms"].get<double>();
    rc.speech_encoder.mel_bands = tree["speech_encoder"]["mel_bands"].get<int64_t>();
    rc.speech_encoder.conv_channels = vec_of<int64_t>(tree["speech_encoder"]["conv_channels"]);
    rc.speech_encoder.seed = tree["speech_encoder"]["seed"].get<uint64_t>();
    rc.speech_encoder_weights = tree["speech_encoder"]["weights_path"].get<std::string>();

    rc.train.weights.l1 = tree["loss"]["lambda_l1"].get<double>();
    rc.train.weights.tv = tree["loss"]["lambda_tv"].get<double>();
    rc.train.weights.gp = tree["loss"]["lambda_gp"].get<double>();
    rc.train.weights.perceptual = tree["loss"]["lambda_p"].get<double>();

    rc.train.critic_updates_per_gen = tree["train"]["critic_updates_per_gen"].get<int>();
    rc.train.learning_rate = tree["train"]["learning_rate"].get<double>();
    rc.train.adam_beta1 = tree["train"]["adam_beta1"].get<double>();
    rc.train.adam_beta2 = tree["train"]["adam_beta2"].get<double>();
    rc.train.patience_epochs = tree["train"]["patience_epochs"].get<int>();
    rc.train.batch_size = tree["train"]["batch_size"].get<int>();
    rc.train.max_epochs = tree["train"]["max_epochs"].get<int>();
    rc.train.max_generator_steps = tree["train"]["max_generator_steps"].get<int64_t>();
    rc.train.improvement_delta = tree["train"]["improvement_delta"].get<double>();
    rc.train.seed = tree["train"]["seed"].get<uint64_t>();
    rc.train.log_wall_time = tree["train"]["log_wall_time"].get<bool>();

    rc.eval.search_range = tree["eval"]["search_range"].get<int>();
    rc.eval.recognizer_cmd = tree["eval"]["recognizer_cmd"].get<std::string>();
    rc.eval.pesq_cmd = tree["eval"]["pesq_cmd"].get<std::string>();

    rc.split_mode = tree["split"]["mode"].get<std::string>();
    rc.split_seed = tree["split"]["seed"].get<uint64_t>();
    rc.split_assignment_file = tree["split"]["assignment_file"].get<std::string>();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCategory::kConfig, std::string("config value has the wrong type: ") + e.what());
  }

  check(rc.split_mode == "speaker_dependent" || rc.split_mode == "speaker_independent",
        ErrorCategory::kConfig,
        "split.mode must be speaker_dependent or speaker_independent, got " + rc.split_mode);

  rc.canonical_json = tree.dump();
  return rc;
}

}  // namespace lipsynth
