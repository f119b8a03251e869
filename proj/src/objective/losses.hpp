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
// Loss terms of the training objective, each usable standalone on domain
// types and composable on the autodiff tape. Reduction conventions: mel and
// speaker losses are means over all entries; the KL term is the mean over
// positions of the per-position sum over latent dimensions; duration loss
// is the MSE of log durations.

#ifndef NNSPEECH_OBJECTIVE_LOSSES_HPP_
#define NNSPEECH_OBJECTIVE_LOSSES_HPP_

#include <vector>

#include "ad/tape.hpp"
#include "data/types.hpp"
#include "model/sgcvae.hpp"
#include "model/synthesis.hpp"
#include "util/rng.hpp"

namespace nns {

struct LossWeights {
  double alpha = 1.0;   // mel
  double beta = 1.0;    // speaker
  double gamma = 5e-4;  // KL
};

struct LossBreakdown {
  double mel = 0.0;
  double spk = 0.0;
  double kl = 0.0;
  double duration = 0.0;
  double pitch = 0.0;
  double energy = 0.0;
  double total = 0.0;
  LossWeights weights;
};

// Mean squared error over all entries; shapes must match.
double MelLoss(const MelSpectrogram& x, const MelSpectrogram& x_hat);
double MelLoss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_hat);
double SpeakerLoss(const SpeakerEmbedding& s, const SpeakerEmbedding& s_hat);
double SpeakerLoss(const Eigen::VectorXd& s, const Eigen::VectorXd& s_hat);

// Closed-form KL(q || p) of diagonal Gaussians:
//   1/2 sum_i [ log(var_p_i / var_q_i) - 1 + var_q_i / var_p_i
//               + (mu_q_i - mu_p_i)^2 / var_p_i ]
double KlDiag(const DiagonalGaussian& q, const DiagonalGaussian& p);
// Mean over positions of the per-position KlDiag.
double KlDiag(const GaussianSequence& q, const GaussianSequence& p);

struct ProsodyLossValues {
  double duration = 0.0;
  double pitch = 0.0;
  double energy = 0.0;
};

ProsodyLossValues ProsodyLosses(const ProsodyPrediction& pred,
                                const ProsodyTargets& targets);

LossBreakdown TotalLoss(double mel, double spk, double kl, double duration,
                        double pitch, double energy,
                        const LossWeights& weights);

// Tape-level builders used by the trainer; their values match the plain
// functions above.
Expr KlDiagExpr(Tape& t, const GaussianExpr& q, const GaussianExpr& p);

// Monte Carlo estimate of KL(q || p) = E_q[log q(z) - log p(z)] from
// n_samples draws; the independent check for the closed form.
struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};
McEstimate KlMonteCarlo(const DiagonalGaussian& q, const DiagonalGaussian& p,
                        int64_t n_samples, Rng& rng);

}  // namespace nns

#endif  // NNSPEECH_OBJECTIVE_LOSSES_HPP_
