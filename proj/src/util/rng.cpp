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

#include "util/rng.hpp"

#include <algorithm>
#include <cmath>

namespace nns {

namespace {

inline uint64_t SplitMix64(uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

void Rng::Seed(uint64_t seed) {
  uint64_t x = seed;
  for (auto& s : s_) s = SplitMix64(x);
  has_spare_ = false;
}

uint64_t Rng::UniformInt(uint64_t n) {
  // Rejection sampling to avoid modulo bias.
  const uint64_t limit = n * (UINT64_MAX / n);
  uint64_t v;
  do {
    v = NextU64();
  } while (v >= limit);
  return v % n;
}

double Rng::Normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller. Uniform() can return 0; shift it away from the log
  // singularity.
  const double u1 = 1.0 - Uniform();
  const double u2 = Uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = kTwoPi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

namespace detail {
// Implemented in rng_simd.cpp (built with vector math enabled).
void BoxMullerBatch(const double* u1, const double* u2, std::size_t pairs,
                    double* out);
}  // namespace detail

void Rng::NormalFill(double* out, std::size_t n) {
  constexpr std::size_t kBatch = 1024;
  double u1[kBatch];
  double u2[kBatch];
  while (n >= 2) {
    const std::size_t pairs = std::min(kBatch, n / 2);
    for (std::size_t i = 0; i < pairs; ++i) {
      u1[i] = 1.0 - Uniform();
      u2[i] = Uniform();
    }
    detail::BoxMullerBatch(u1, u2, pairs, out);
    out += 2 * pairs;
    n -= 2 * pairs;
  }
  if (n > 0) *out = Normal();
}

Rng Rng::Fork(uint64_t stream_id) const {
  uint64_t x = s_[0] ^ Rotl(stream_id, 32) ^ s_[2];
  Rng child(0);
  for (auto& s : child.s_) s = SplitMix64(x);
  return child;
}

}  // namespace nns
