// Copyright (c) 2026 nnSpeech Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NNSPEECH_DSP_MEL_HPP_
#define NNSPEECH_DSP_MEL_HPP_

#include <Eigen/Core>
#include <vector>

#include "data/types.hpp"

namespace nns {

// Mel energies are clamped at this floor before the log, so silence maps to
// log(kMelFloor) instead of -inf.
constexpr double kMelFloor = 1e-5;

double HzToMel(double hz);
double MelToHz(double mel);

// Triangular filterbank, peak height 1, rows = n_mels, cols = n_fft/2 + 1.
Eigen::MatrixXd MelFilterbank(const AudioConfig& config, int n_fft);

// Frame count for a waveform analyzed without centering: frames lie fully
// inside the signal, T = floor((len - win) / hop) + 1.
Eigen::Index NumFrames(size_t num_samples, const AudioConfig& config);

// STFT (Hann window, no centering) -> power spectrum -> mel filterbank ->
// clamp at kMelFloor -> natural log. Throws if the waveform is shorter than
// one window.
MelSpectrogram ExtractMel(const std::vector<float>& waveform,
                          const AudioConfig& config);

// Per-frame RMS over the same framing as ExtractMel (Hann-windowed frames
// are used for mel; RMS uses the raw frame).
std::vector<double> FrameRms(const std::vector<float>& waveform,
                             const AudioConfig& config);

// Autocorrelation f0 estimate per frame; 0 marks unvoiced. Search range
// [f0_min, f0_max] Hz with parabolic peak interpolation.
std::vector<double> FramePitch(const std::vector<float>& waveform,
                               const AudioConfig& config,
                               double f0_min = 80.0, double f0_max = 400.0);

// Per-phoneme prosody from frame-level measurements. `boundaries` holds the
// phoneme end positions in samples (contiguous cover of the waveform).
ProsodyTargets ExtractProsody(const std::vector<float>& waveform,
                              const std::vector<size_t>& boundaries,
                              const AudioConfig& config);

}  // namespace nns

#endif  // NNSPEECH_DSP_MEL_HPP_
