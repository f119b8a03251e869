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
// Speaker-guided CVAE core: the recognition network q(Z|X,C), the learned
// conditional prior p(Z|C,S), reparameterized sampling, and the speaker
// predictor that recovers the embedding from the latent at inference time.

#ifndef NNSPEECH_MODEL_SGCVAE_HPP_
#define NNSPEECH_MODEL_SGCVAE_HPP_

#include <optional>
#include <vector>

#include "data/types.hpp"
#include "model/encoders.hpp"
#include "nn/modules.hpp"

namespace nns {

// Log variances are clamped to this symmetric range; the KL term divides by
// the prior variance, so unbounded log variances blow it up early in
// training.
constexpr double kLogVarClamp = 8.0;

struct AblationFlags {
  // Table-style "content add": decoder consumes z + projected(c), the
  // standard-CVAE variant.
  bool content_add = false;
  // Speaker predictor removed; the decoder receives a zero embedding at
  // inference.
  bool no_speaker_predictor = false;
};

// Per-position diagonal Gaussians as two L x D matrices.
struct GaussianSequence {
  Eigen::MatrixXd mu;
  Eigen::MatrixXd log_var;

  Eigen::Index length() const { return mu.rows(); }
  Eigen::Index dim() const { return mu.cols(); }
  std::vector<DiagonalGaussian> ToGaussians() const;
};

// Tape-level pair of (mu, log_var) nodes.
struct GaussianExpr {
  Expr mu;
  Expr log_var;
};

struct RecognitionNet {
  Mlp mlp;
  Eigen::Index d_z = 0;

  RecognitionNet() = default;
  RecognitionNet(Eigen::Index d_x, Eigen::Index d_c, Eigen::Index hidden,
                 Eigen::Index d_z);
  void Init(Rng& rng);

  // x: 1 x D_x broadcast across positions, c: L x D_c.
  GaussianExpr Forward(Tape& t, Expr x, Expr c) const;
  GaussianSequence Apply(const RefVector& x, const ContentSequence& c) const;
  std::vector<Param*> Params();
};

struct PriorNet {
  Mlp mlp;
  Eigen::Index d_z = 0;

  PriorNet() = default;
  PriorNet(Eigen::Index d_c, Eigen::Index d_s, Eigen::Index hidden,
           Eigen::Index d_z);
  void Init(Rng& rng);

  // c: L x D_c, s: 1 x D_s broadcast across positions.
  GaussianExpr Forward(Tape& t, Expr c, Expr s) const;
  GaussianSequence Apply(const ContentSequence& c,
                         const SpeakerEmbedding& s) const;
  std::vector<Param*> Params();
};

struct SpeakerPredictor {
  Mlp mlp;

  SpeakerPredictor() = default;
  SpeakerPredictor(Eigen::Index d_z, Eigen::Index hidden, Eigen::Index d_s);
  void Init(Rng& rng);

  // z: L x D_z -> 1 x D_s via temporal mean pooling.
  Expr Forward(Tape& t, Expr z) const;
  SpeakerEmbedding Apply(const LatentSequence& z) const;
  std::vector<Param*> Params();
};

// z = mu + sigma (.) eps. When `eps` is absent, fresh noise is drawn from
// `rng` and recorded in the result.
LatentSequence Reparameterize(const GaussianSequence& g,
                              const std::optional<Eigen::MatrixXd>& eps,
                              Rng* rng, LatentSource source);

// Tape-level version with fixed noise.
Expr ReparameterizeExpr(Tape& t, const GaussianExpr& g,
                        const Eigen::MatrixXd& eps);

// Decoder input selection. Default: z unchanged (the latent is assumed to
// carry the content). content_add: z + projected(c).
struct LatentForDecoder {
  Linear content_proj;

  LatentForDecoder() = default;
  LatentForDecoder(Eigen::Index d_c, Eigen::Index d_z);
  void Init(Rng& rng);

  Expr Forward(Tape& t, Expr z, Expr c, const AblationFlags& flags) const;
  Eigen::MatrixXd Apply(const LatentSequence& z, const ContentSequence& c,
                        const AblationFlags& flags) const;
  std::vector<Param*> Params();
};

}  // namespace nns

#endif  // NNSPEECH_MODEL_SGCVAE_HPP_
