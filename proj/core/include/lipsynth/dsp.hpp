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

#ifndef LIPSYNTH_DSP_H_
#define LIPSYNTH_DSP_H_

#include <complex>
#include <utility>
#include <vector>

#include "lipsynth/tensor.hpp"

namespace lipsynth::dsp {

// In-place iterative radix-2 FFT; size must be a power of two.
void fft(std::vector<std::complex<double>>& a, bool inverse = false);

int64_t next_pow2(int64_t n);

// Periodic Hann window.
std::vector<double> hann_window(int64_t n);

// Number of full analysis frames: floor((len - win) / hop) + 1; 0 if the
// signal is shorter than one window.
int64_t frame_count(int64_t len, int64_t win, int64_t hop);

// Power spectrum |FFT|^2 of a windowed frame, zero-padded to nfft.
// Returns nfft/2 + 1 bins.
std::vector<double> power_spectrum(const std::vector<double>& frame, int64_t nfft);

// Triangular mel filterbank, HTK mel scale. Rows: n_mels, cols: nfft/2+1.
Tensor mel_filterbank(int64_t n_mels, int64_t nfft, double sample_rate, double fmin, double fmax);

// Log-mel analysis: frames x n_mels. Window is Hann of win_len samples,
// hop_len advance; energies are floored before the log.
Tensor log_mel_frames(const std::vector<double>& x, double sample_rate, int64_t win_len,
                      int64_t hop_len, int64_t n_mels, double floor_energy = 1e-10);

// DCT-II with HTK scaling: c_k = sqrt(2/N) * sum_n v[n] cos(pi k (n+0.5) / N).
// Rows of the returned matrix are k = 0 .. n_out-1, columns n = 0 .. n_in-1.
Tensor dct2_matrix(int64_t n_in, int64_t n_out);

// Real-DFT bases for expressing an STFT as a matrix product (used where the
// transform has to be differentiable). Shapes: (win_len, nfft/2+1).
std::pair<Tensor, Tensor> dft_basis(int64_t win_len, int64_t nfft);

// Windowed-sinc rational resampler.
std::vector<double> resample(const std::vector<double>& x, int sr_in, int sr_out);

}  // namespace lipsynth::dsp

#endif  // LIPSYNTH_DSP_H_
