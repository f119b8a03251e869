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
//
// Box-Muller transform over plain arrays. This translation unit is built
// with fast-math so the log/sin/cos loops vectorize; the inputs are
// uniforms in (0, 1], so no special values reach the math calls. Kept free
// of any NaN/Inf-sensitive logic.

#include <cmath>
#include <cstddef>

namespace nns::detail {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr std::size_t kMaxBatch = 1024;
}  // namespace

void BoxMullerBatch(const double* u1, const double* u2, std::size_t pairs,
                    double* out) {
  double radius[kMaxBatch];
  for (std::size_t i = 0; i < pairs; ++i) {
    radius[i] = std::sqrt(-2.0 * std::log(u1[i]));
  }
  double* second = out + pairs;
  for (std::size_t i = 0; i < pairs; ++i) {
    out[i] = radius[i] * std::cos(kTwoPi * u2[i]);
  }
  for (std::size_t i = 0; i < pairs; ++i) {
    second[i] = radius[i] * std::sin(kTwoPi * u2[i]);
  }
}

}  // namespace nns::detail
