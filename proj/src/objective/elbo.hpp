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
// Monte Carlo estimate of the modified ELBO for verification. Observation
// models are Gaussians whose variances are chosen so that the negative log
// likelihoods equal the mean-square losses up to additive constants:
//
//   p(X | Z, S): per-bin variance T*M/2   =>  -log p = mel MSE + C_x
//   p(S | Z):    per-dim variance D_s/2   =>  -log p = spk MSE + C_s
//   C_x = (T*M/2) log(pi*T*M),  C_s = (D_s/2) log(pi*D_s)
//
// With the KL reduced as mean-over-positions, the correspondence is
//   -ELBO = mel + spk + L * kl + C_x + C_s     (in expectation over z)
// i.e. the total training loss at alpha = beta = 1 with an effective KL
// weight of L and the prosody terms excluded.

#ifndef NNSPEECH_OBJECTIVE_ELBO_HPP_
#define NNSPEECH_OBJECTIVE_ELBO_HPP_

#include <cstdint>
#include <vector>

#include "data/types.hpp"
#include "model/model.hpp"

namespace nns {

struct TrainingExample {
  Eigen::MatrixXd mel;  // T x n_mels (double precision view of the target)
  std::vector<int> phoneme_ids;
  ProsodyTargets prosody;
  int speaker_index = 0;
};

// Per-draw parts, exposed for bookkeeping tests on small sample counts.
struct ElboSample {
  double elbo = 0.0;
  double mel_neg_loglik = 0.0;  // -log p(X|z,S), includes C_x
  double spk_neg_loglik = 0.0;  // -log p(S|z), includes C_s
  double log_ratio = 0.0;       // log q(z) - log p(z|C,S)
  Eigen::MatrixXd z;
};

struct ElboEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double ratio_mean = 0.0;      // MC estimate of the full KL term
  double ratio_std_error = 0.0;
  double const_offset = 0.0;    // C_x + C_s
  int64_t n_samples = 0;
};

// Draws z ~ q(Z|X,C) and averages
//   log p(X|z,S) + log p(S|z) - [log q(z) - log p(z|C,S)].
// Log densities are evaluated directly from the Gaussian formulas (not via
// the loss functions), so comparisons against the loss route are a real
// cross-check. The entropy part of the KL term is integrated analytically
// (same expectation, and the estimator degenerates cleanly as the posterior
// variance reaches the clamp floor). Intended for small model dims.
ElboEstimate ElboOracle(Model& model, const TrainingExample& example,
                        int64_t n_samples, uint64_t seed,
                        std::vector<ElboSample>* samples = nullptr);

}  // namespace nns

#endif  // NNSPEECH_OBJECTIVE_ELBO_HPP_
