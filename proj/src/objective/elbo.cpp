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

#include "objective/elbo.hpp"

#include <cmath>

#include "util/error.hpp"
#include "util/rng.hpp"

namespace nns {

ElboEstimate ElboOracle(Model& model, const TrainingExample& example,
                        int64_t n_samples, uint64_t seed,
                        std::vector<ElboSample>* samples) {
  if (n_samples < 1) ThrowInvalid("elbo oracle: need at least one sample");

  // Deterministic conditioning path, shared across draws.
  MelSpectrogram mel_view;
  mel_view.frames = example.mel.cast<float>();
  mel_view.config.n_mels = static_cast<int>(example.mel.cols());
  const RefVector x = model.reference_encoder.Encode(mel_view);
  ContentSequence c;
  {
    PhonemeSequence ph;
    ph.ids.assign(example.phoneme_ids.begin(), example.phoneme_ids.end());
    c = model.phoneme_encoder.Encode(ph);
  }
  const GaussianSequence q = model.recognition.Apply(x, c);
  const SpeakerEmbedding s = model.LookupSpeaker(example.speaker_index);
  const GaussianSequence p = model.prior.Apply(c, s);

  const Eigen::Index L = q.mu.rows();
  const Eigen::Index dz = q.mu.cols();
  const double TM = static_cast<double>(example.mel.size());
  const double Ds = static_cast<double>(s.vector.size());
  const double c_x = 0.5 * TM * std::log(M_PI * TM);
  const double c_s = 0.5 * Ds * std::log(M_PI * Ds);

  const Eigen::ArrayXXd sigma_q = (0.5 * q.log_var.array()).exp();

  Rng rng(seed);
  double acc = 0.0, acc_sq = 0.0;
  double racc = 0.0, racc_sq = 0.0;
  Eigen::MatrixXd eps(L, dz);
  for (int64_t si = 0; si < n_samples; ++si) {
    rng.NormalFill(eps.data(), static_cast<size_t>(eps.size()));
    Eigen::MatrixXd z = q.mu + (sigma_q * eps.array()).matrix();

    // E_q[log q] is the (negative) Gaussian entropy and is integrated
    // analytically; only log p(z|C,S) is sampled. Expectation matches the
    // literal log q(z) - log p(z) estimator, and the per-sample spread
    // vanishes as the posterior variance goes to the clamp floor. The 2*pi
    // constants cancel between the two terms.
    double ratio = 0.0;
    for (Eigen::Index t = 0; t < L; ++t) {
      for (Eigen::Index i = 0; i < dz; ++i) {
        const double dp = z(t, i) - p.mu(t, i);
        ratio += 0.5 * (p.log_var(t, i) - q.log_var(t, i) - 1.0 +
                        dp * dp * std::exp(-p.log_var(t, i)));
      }
    }

    // Decode with this z; the decoder sees the lookup embedding, matching
    // the training-time data path.
    LatentSequence lat;
    lat.z = z;
    lat.eps = eps;
    const Eigen::MatrixXd dec_in =
        model.latent_for_decoder.Apply(lat, c, model.config.flags);
    auto [frames, pred] = model.adaptor.Apply(dec_in, s, &example.prosody);
    const Eigen::MatrixXd x_hat = model.decoder.Apply(frames, s);
    const SpeakerEmbedding s_hat = model.speaker_predictor.Apply(lat);

    double mel_sq = 0.0;
    for (Eigen::Index r = 0; r < example.mel.rows(); ++r) {
      for (Eigen::Index cc = 0; cc < example.mel.cols(); ++cc) {
        const double d = example.mel(r, cc) - x_hat(r, cc);
        mel_sq += d * d;
      }
    }
    double spk_sq = 0.0;
    for (Eigen::Index i = 0; i < s.vector.size(); ++i) {
      const double d = s.vector(i) - s_hat.vector(i);
      spk_sq += d * d;
    }
    // Variances T*M/2 and D_s/2 turn the sums into means; see header.
    const double mel_nll = mel_sq / TM + c_x;
    const double spk_nll = spk_sq / Ds + c_s;

    const double elbo = -mel_nll - spk_nll - ratio;
    acc += elbo;
    acc_sq += elbo * elbo;
    racc += ratio;
    racc_sq += ratio * ratio;
    if (samples != nullptr) {
      ElboSample smp;
      smp.elbo = elbo;
      smp.mel_neg_loglik = mel_nll;
      smp.spk_neg_loglik = spk_nll;
      smp.log_ratio = ratio;
      smp.z = std::move(z);
      samples->push_back(std::move(smp));
    }
  }

  ElboEstimate est;
  est.n_samples = n_samples;
  est.const_offset = c_x + c_s;
  const double inv_n = 1.0 / static_cast<double>(n_samples);
  est.mean = acc * inv_n;
  est.ratio_mean = racc * inv_n;
  const double var = std::max(0.0, acc_sq * inv_n - est.mean * est.mean);
  const double rvar =
      std::max(0.0, racc_sq * inv_n - est.ratio_mean * est.ratio_mean);
  est.std_error = std::sqrt(var * inv_n);
  est.ratio_std_error = std::sqrt(rvar * inv_n);
  return est;
}

}  // namespace nns
