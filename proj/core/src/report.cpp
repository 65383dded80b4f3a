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

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "json.hpp"
#include "lipsynth/error.hpp"
#include "lipsynth/metrics.hpp"

namespace fs = std::filesystem;

namespace lipsynth {

namespace {

std::string run_command_line(const std::string& cmd) {
  FILE* pipe = popen((cmd + " 2>/dev/null").c_str(), "r");
  check(pipe != nullptr, ErrorCategory::kMetric, "failed to launch: " + cmd);
  std::string out;
  char buf[512];
  while (fgets(buf, sizeof(buf), pipe) != nullptr) out += buf;
  const int rc = pclose(pipe);
  check(rc == 0, ErrorCategory::kMetric,
        "external command failed (exit " + std::to_string(rc) + "): " + cmd);
  return out;
}

std::vector<std::string> first_line_tokens(const std::string& text) {
  std::istringstream is(text.substr(0, text.find('\n')));
  std::vector<std::string> toks;
  std::string t;
  while (is >> t) toks.push_back(t);
  return toks;
}

std::string sanitize_id(const std::string& clip_id) {
  std::string s = clip_id;
  for (auto& c : s) {
    if (c == '/' || c == '\\') c = '_';
  }
  return s;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

MetricReport evaluate_corpus(const std::vector<VideoSample>& samples, const SynthFn& synth,
                             const EvalConfig& config) {
  check(!samples.empty(), ErrorCategory::kMetric, "evaluate_corpus: empty split");
  const bool use_recognizer = !config.recognizer_cmd.empty();
  const bool use_pesq = !config.pesq_cmd.empty();
  if (use_recognizer || use_pesq) {
    fs::create_directories(config.work_dir);
  }

  MetricReport report;
  for (const auto& sample : samples) {
    check(!sample.audio.samples.empty(), ErrorCategory::kMetric,
          "evaluate_corpus: clip " + sample.clip_id + " has no reference audio");
    WaveformClip generated = synth(sample);
    check(generated.sample_rate == sample.audio.sample_rate, ErrorCategory::kMetric,
          "evaluate_corpus: sample rate mismatch for clip " + sample.clip_id);

    ClipMetrics m;
    m.clip_id = sample.clip_id;
    m.mcd_db = mcd_db(sample.audio, generated, config.mel);
    {
      // STOI needs equal lengths; trim to the shorter signal.
      WaveformClip a = sample.audio, b = generated;
      const size_t n = std::min(a.samples.size(), b.samples.size());
      a.samples.resize(n);
      b.samples.resize(n);
      m.stoi = stoi_score(a, b);
    }
    const auto av = av_offset(sample.frames, generated, config.search_range);
    m.av_offset_frames = av.offset_frames;
    m.av_confidence = av.confidence;

    if (use_recognizer || use_pesq) {
      const std::string base = (fs::path(config.work_dir) / sanitize_id(sample.clip_id)).string();
      const std::string gen_path = base + ".gen.wav";
      write_wav(gen_path, generated);
      if (use_recognizer) {
        const auto hyp = first_line_tokens(
            run_command_line(config.recognizer_cmd + " '" + gen_path + "'"));
        m.wer = word_error_rate(sample.sentence.words(), hyp);
      }
      if (use_pesq) {
        const std::string ref_path = base + ".ref.wav";
        write_wav(ref_path, sample.audio);
        const auto out = run_command_line(config.pesq_cmd + " '" + ref_path + "' '" + gen_path + "'");
        try {
          m.pesq = std::stod(out);
        } catch (...) {
          fail(ErrorCategory::kMetric, "pesq command printed no number: " + out);
        }
      }
    }
    report.clips.push_back(std::move(m));
  }
  report.finalize();
  return report;
}

void write_report_csv(const std::string& path, const MetricReport& report) {
  std::string out =
      "clip_id,mcd_db,stoi,wer,av_offset_frames,av_confidence,pesq\n";
  for (const auto& c : report.clips) {
    out += c.clip_id;
    out += ',' + fmt6(c.mcd_db);
    out += ',' + fmt6(c.stoi);
    out += ',';
    if (c.wer) out += fmt6(*c.wer);
    out += ',' + std::to_string(c.av_offset_frames);
    out += ',' + fmt6(c.av_confidence);
    out += ',';
    if (c.pesq) out += fmt6(*c.pesq);
    out += '\n';
  }
  atomic_write_file(path, out);
}

void write_report_json(const std::string& path, const MetricReport& report) {
  nlohmann::json j;
  j["clips"] = report.clips.size();
  j["mean_mcd_db"] = report.mean_mcd_db;
  j["mean_stoi"] = report.mean_stoi;
  j["mean_av_offset_frames"] = report.mean_av_offset_frames;
  j["mean_av_confidence"] = report.mean_av_confidence;
  if (report.mean_wer) {
    j["mean_wer"] = *report.mean_wer;
  } else {
    j["mean_wer"] = nullptr;
  }
  if (report.mean_pesq) {
    j["mean_pesq"] = *report.mean_pesq;
  } else {
    j["mean_pesq"] = nullptr;
  }
  atomic_write_file(path, j.dump(2) + "\n");
}

}  // namespace lipsynth
