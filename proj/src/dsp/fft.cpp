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

#include "dsp/fft.hpp"

#include <cmath>

#include "util/error.hpp"

namespace nns {

void Fft(std::vector<std::complex<double>>& x) {
  const size_t n = x.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    ThrowInvalid("FFT size must be a power of two");
  }
  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = x[i + k];
        const std::complex<double> v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

std::vector<double> PowerSpectrum(const double* frame, int frame_len,
                                  int n_fft) {
  std::vector<std::complex<double>> buf(static_cast<size_t>(n_fft));
  for (int i = 0; i < frame_len; ++i) buf[static_cast<size_t>(i)] = frame[i];
  Fft(buf);
  std::vector<double> power(static_cast<size_t>(n_fft / 2 + 1));
  for (int k = 0; k <= n_fft / 2; ++k) {
    power[static_cast<size_t>(k)] = std::norm(buf[static_cast<size_t>(k)]);
  }
  return power;
}

int NextPow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace nns
