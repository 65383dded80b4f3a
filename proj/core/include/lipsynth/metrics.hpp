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

#ifndef LIPSYNTH_METRICS_H_
#define LIPSYNTH_METRICS_H_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lipsynth/dataset.hpp"
#include "lipsynth/tensor.hpp"
#include "lipsynth/wav.hpp"

namespace lipsynth {

struct MelCepstrumConfig {
  double window_ms = 25.0;
  double hop_ms = 10.0;
  int64_t mel_bands = 40;
  int64_t n_coeffs = 13;  // c1..c13, c0 excluded
  double energy_floor = 1e-10;
};

// Mel-cepstral frames: (frames, n_coeffs), coefficients c1..c13.
Tensor mel_cepstrum(const WaveformClip& clip, const MelCepstrumConfig& config = {});

// Frame-wise mel-cepstral distortion in dB: mean over frames of
// (10/ln10) * sqrt(2 * sum_d (delta mc_d)^2). Frame counts may differ by at
// most one (the longer sequence is trimmed).
double mcd_db(const WaveformClip& ref, const WaveformClip& gen,
              const MelCepstrumConfig& config = {});

// Short-time objective intelligibility; standard 10 kHz / 15-band /
// 384 ms-segment pipeline.
double stoi_score(const WaveformClip& ref, const WaveformClip& gen);

int64_t edit_distance(const std::vector<std::string>& a, const std::vector<std::string>& b);

// Word error rate: edit distance divided by reference length.
double word_error_rate(const std::vector<std::string>& ref, const std::vector<std::string>& hyp);

struct AvOffsetResult {
  int offset_frames = 0;
  double confidence = 0.0;
};

// Simplified audio-visual synchrony estimate: cross-correlates mouth-motion
// energy against the per-frame audio RMS envelope over integer offsets in
// [-search_range, search_range]. Positive offsets mean the audio lags the
// video.
AvOffsetResult av_offset(const Tensor& video, const WaveformClip& audio, int search_range);

struct ClipMetrics {
  std::string clip_id;
  double mcd_db = 0.0;
  double stoi = 0.0;
  std::optional<double> wer;
  int av_offset_frames = 0;
  double av_confidence = 0.0;
  std::optional<double> pesq;
};

struct MetricReport {
  std::vector<ClipMetrics> clips;
  double mean_mcd_db = 0.0;
  double mean_stoi = 0.0;
  double mean_av_offset_frames = 0.0;
  double mean_av_confidence = 0.0;
  std::optional<double> mean_wer;
  std::optional<double> mean_pesq;

  void finalize();
};

struct EvalConfig {
  int search_range = 5;
  // External recognizer hook: invoked as `cmd <wav>`; must print one
  // transcript line. Empty disables WER.
  std::string recognizer_cmd;
  // External PESQ hook: invoked as `cmd <ref_wav> <deg_wav>`; must print a
  // single number. Empty disables PESQ.
  std::string pesq_cmd;
  std::string work_dir = ".";
  MelCepstrumConfig mel;
};

using SynthFn = std::function<WaveformClip(const VideoSample&)>;

// Per-clip metrics plus corpus means. `synth` maps each sample to the audio
// under evaluation (a model, or the ground truth itself).
MetricReport evaluate_corpus(const std::vector<VideoSample>& samples, const SynthFn& synth,
                             const EvalConfig& config);

void write_report_csv(const std::string& path, const MetricReport& report);
void write_report_json(const std::string& path, const MetricReport& report);

}  // namespace lipsynth

#endif  // LIPSYNTH_METRICS_H_
