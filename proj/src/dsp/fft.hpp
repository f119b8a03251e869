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

#ifndef NNSPEECH_DSP_FFT_HPP_
#define NNSPEECH_DSP_FFT_HPP_

#include <complex>
#include <vector>

namespace nns {

// In-place iterative radix-2 FFT. Size must be a power of two.
void Fft(std::vector<std::complex<double>>& x);

// Power spectrum |X_k|^2 for k in [0, n_fft/2] of a real frame, zero padded
// to n_fft (power of two).
std::vector<double> PowerSpectrum(const double* frame, int frame_len,
                                  int n_fft);

int NextPow2(int n);

}  // namespace nns

#endif  // NNSPEECH_DSP_FFT_HPP_
