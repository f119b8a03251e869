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
// Mel-cepstral distortion. Cepstra come from an orthonormal DCT-II of each
// log-mel frame; coefficients 1..n_cepstra (the 0th is excluded) enter
//   MCD = (10 / ln 10) * sqrt(2) * mean over aligned frames of ||dc||_2.
// Optional alignment is DTW with a Sakoe-Chiba band.

#ifndef NNSPEECH_EVAL_MCD_HPP_
#define NNSPEECH_EVAL_MCD_HPP_

#include <Eigen/Core>

#include "data/types.hpp"

namespace nns {

struct McdConfig {
  int n_cepstra = 13;  // excluding the 0th coefficient
  enum class Alignment { kNone, kDtw };
  Alignment alignment = Alignment::kDtw;
  double dtw_band_fraction = 0.1;
};

// Rows = frames, cols = n_cepstra (coefficients 1..n_cepstra).
Eigen::MatrixXd MelToCepstra(const Eigen::MatrixXd& log_mel, int n_cepstra);

double Mcd(const MelSpectrogram& ref, const MelSpectrogram& syn,
           const McdConfig& config = {});
double Mcd(const Eigen::MatrixXd& ref_log_mel,
           const Eigen::MatrixXd& syn_log_mel, const McdConfig& config = {});

}  // namespace nns

#endif  // NNSPEECH_EVAL_MCD_HPP_
