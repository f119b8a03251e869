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

#ifndef NNSPEECH_UTIL_RNG_HPP_
#define NNSPEECH_UTIL_RNG_HPP_

#include <cstdint>
#include <cstddef>

namespace nns {

// xoshiro256++ with splitmix64 seeding. Self-contained so that streams are
// reproducible across standard libraries and platforms, which the
// determinism contract requires (std::normal_distribution is
// implementation-defined).
class Rng {
 public:
  explicit Rng(uint64_t seed) { Seed(seed); }

  void Seed(uint64_t seed);

  uint64_t NextU64() {
    const uint64_t result = Rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = Rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be > 0.
  uint64_t UniformInt(uint64_t n);

  double UniformRange(double lo, double hi) {
    return lo + (hi - lo) * Uniform();
  }

  // Standard normal via Box-Muller; one spare value is cached.
  double Normal();

  // Fills out[0..n) with standard normals. Batched so the transcendental
  // math vectorizes; deterministic for a given state, but the batch layout
  // differs from repeated Normal() calls.
  void NormalFill(double* out, std::size_t n);

  // Derives an independent child stream; used to give each worker or
  // corpus item its own deterministic stream.
  Rng Fork(uint64_t stream_id) const;

 private:
  static uint64_t Rotl(uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace nns

#endif  // NNSPEECH_UTIL_RNG_HPP_
