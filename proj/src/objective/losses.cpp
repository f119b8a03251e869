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

#include "objective/losses.hpp"

#include <cmath>

#include "util/error.hpp"

namespace nns {

namespace {

double MeanSquaredError(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    ThrowInvalid("loss: shape mismatch");
  }
  return (a - b).array().square().mean();
}

}  // namespace

double MelLoss(const MelSpectrogram& x, const MelSpectrogram& x_hat) {
  return MeanSquaredError(x.frames.cast<double>(), x_hat.frames.cast<double>());
}

double MelLoss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_hat) {
  return MeanSquaredError(x, x_hat);
}

double SpeakerLoss(const SpeakerEmbedding& s, const SpeakerEmbedding& s_hat) {
  return SpeakerLoss(s.vector, s_hat.vector);
}

double SpeakerLoss(const Eigen::VectorXd& s, const Eigen::VectorXd& s_hat) {
  if (s.size() != s_hat.size()) ThrowInvalid("speaker loss: length mismatch");
  return (s - s_hat).array().square().mean();
}

double KlDiag(const DiagonalGaussian& q, const DiagonalGaussian& p) {
  if (q.mu.size() != p.mu.size() || q.log_var.size() != p.log_var.size() ||
      q.mu.size() != q.log_var.size()) {
    ThrowInvalid("kl: dimension mismatch");
  }
  const auto lv_q = q.log_var.array();
  const auto lv_p = p.log_var.array();
  const auto diff = (q.mu - p.mu).array();
  const auto term = (lv_p - lv_q) - 1.0 + (lv_q - lv_p).exp() +
                    diff.square() * (-lv_p).exp();
  return 0.5 * term.sum();
}

double KlDiag(const GaussianSequence& q, const GaussianSequence& p) {
  if (q.mu.rows() != p.mu.rows() || q.mu.cols() != p.mu.cols()) {
    ThrowInvalid("kl: sequence shape mismatch");
  }
  const auto lv_q = q.log_var.array();
  const auto lv_p = p.log_var.array();
  const auto diff = (q.mu - p.mu).array();
  const auto term = (lv_p - lv_q) - 1.0 + (lv_q - lv_p).exp() +
                    diff.square() * (-lv_p).exp();
  return 0.5 * term.sum() / static_cast<double>(q.mu.rows());
}

ProsodyLossValues ProsodyLosses(const ProsodyPrediction& pred,
                                const ProsodyTargets& targets) {
  const auto L = static_cast<Eigen::Index>(targets.durations.size());
  if (pred.log_durations.size() != L || pred.pitch.size() != L ||
      pred.energy.size() != L) {
    ThrowInvalid("prosody losses: length mismatch");
  }
  ProsodyLossValues out;
  for (Eigen::Index i = 0; i < L; ++i) {
    const double ld = std::log(
        static_cast<double>(targets.durations[static_cast<size_t>(i)]));
    const double dd = pred.log_durations(i) - ld;
    const double dp =
        pred.pitch(i) - static_cast<double>(targets.pitch[static_cast<size_t>(i)]);
    const double de = pred.energy(i) -
                      static_cast<double>(targets.energy[static_cast<size_t>(i)]);
    out.duration += dd * dd;
    out.pitch += dp * dp;
    out.energy += de * de;
  }
  out.duration /= static_cast<double>(L);
  out.pitch /= static_cast<double>(L);
  out.energy /= static_cast<double>(L);
  return out;
}

LossBreakdown TotalLoss(double mel, double spk, double kl, double duration,
                        double pitch, double energy,
                        const LossWeights& weights) {
  for (double v : {mel, spk, kl, duration, pitch, energy}) {
    if (!std::isfinite(v)) ThrowRuntime("total loss: non-finite part");
  }
  LossBreakdown b;
  b.mel = mel;
  b.spk = spk;
  b.kl = kl;
  b.duration = duration;
  b.pitch = pitch;
  b.energy = energy;
  b.weights = weights;
  b.total = weights.alpha * mel + weights.beta * spk + weights.gamma * kl +
            duration + pitch + energy;
  return b;
}

Expr KlDiagExpr(Tape& t, const GaussianExpr& q, const GaussianExpr& p) {
  const Eigen::Index L = t.Value(q.mu).rows();
  Expr lv_diff = t.Sub(p.log_var, q.log_var);           // log(var_p/var_q)
  Expr ratio = t.Exp(t.Sub(q.log_var, p.log_var));      // var_q/var_p
  Expr d = t.Sub(q.mu, p.mu);
  Expr quad = t.Mul(t.Mul(d, d), t.Exp(t.Scale(p.log_var, -1.0)));
  Expr inner = t.AddScalar(t.Add(t.Add(lv_diff, ratio), quad), -1.0);
  return t.Scale(t.SumAll(inner), 0.5 / static_cast<double>(L));
}

McEstimate KlMonteCarlo(const DiagonalGaussian& q, const DiagonalGaussian& p,
                        int64_t n_samples, Rng& rng) {
  if (q.mu.size() != p.mu.size()) ThrowInvalid("kl mc: dimension mismatch");
  const Eigen::Index n = q.mu.size();
  const Eigen::ArrayXd sigma_q = (0.5 * q.log_var.array()).exp();
  const Eigen::ArrayXd inv_var_p = (-p.log_var.array()).exp();
  const Eigen::ArrayXd mu_diff = (q.mu - p.mu).array();
  // Constant part of log q(z) - log p(z) for diagonal Gaussians.
  const double log_det_term = 0.5 * (p.log_var.sum() - q.log_var.sum());

  // Blocked evaluation: per coordinate, a contiguous stream of normals
  // feeds the per-sample totals v[s]. With z = mu_q + sigma_q * e,
  //   log q(z) - log p(z)
  //     = log_det + 1/2 sum_i [ (mu_diff_i + sigma_q_i e_i)^2 / var_p_i
  //                             - e_i^2 ].
  constexpr int64_t kBlock = 8192;
  std::vector<double> eps(static_cast<size_t>(kBlock));
  std::vector<double> v(static_cast<size_t>(kBlock));
  double acc = 0.0;
  double acc_sq = 0.0;
  int64_t done = 0;
  while (done < n_samples) {
    const int64_t count = std::min(kBlock, n_samples - done);
    for (int64_t s = 0; s < count; ++s) {
      v[static_cast<size_t>(s)] = log_det_term;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      rng.NormalFill(eps.data(), static_cast<size_t>(count));
      const double a = mu_diff(i);
      const double b = sigma_q(i);
      const double ivp = inv_var_p(i);
      for (int64_t s = 0; s < count; ++s) {
        const double e = eps[static_cast<size_t>(s)];
        const double dp = a + b * e;
        v[static_cast<size_t>(s)] += 0.5 * (dp * dp * ivp - e * e);
      }
    }
    for (int64_t s = 0; s < count; ++s) {
      acc += v[static_cast<size_t>(s)];
      acc_sq += v[static_cast<size_t>(s)] * v[static_cast<size_t>(s)];
    }
    done += count;
  }
  McEstimate est;
  const double inv_n = 1.0 / static_cast<double>(n_samples);
  est.mean = acc * inv_n;
  const double var = std::max(0.0, acc_sq * inv_n - est.mean * est.mean);
  est.std_error = std::sqrt(var * inv_n);
  return est;
}

}  // namespace nns
