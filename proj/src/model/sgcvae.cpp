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

#include "model/sgcvae.hpp"

#include "util/error.hpp"

namespace nns {

std::vector<DiagonalGaussian> GaussianSequence::ToGaussians() const {
  std::vector<DiagonalGaussian> out(static_cast<size_t>(mu.rows()));
  for (Eigen::Index i = 0; i < mu.rows(); ++i) {
    out[static_cast<size_t>(i)].mu = mu.row(i).transpose();
    out[static_cast<size_t>(i)].log_var = log_var.row(i).transpose();
  }
  return out;
}

namespace {

GaussianExpr SplitHeads(Tape& t, Expr heads, Eigen::Index d_z) {
  GaussianExpr g;
  g.mu = t.SliceCols(heads, 0, d_z);
  g.log_var = t.Clamp(t.SliceCols(heads, d_z, d_z), -kLogVarClamp,
                      kLogVarClamp);
  return g;
}

}  // namespace

RecognitionNet::RecognitionNet(Eigen::Index d_x, Eigen::Index d_c,
                               Eigen::Index hidden, Eigen::Index d_z)
    : mlp("recognition", d_x + d_c, {hidden, hidden}, 2 * d_z), d_z(d_z) {}

void RecognitionNet::Init(Rng& rng) { mlp.Init(rng); }

GaussianExpr RecognitionNet::Forward(Tape& t, Expr x, Expr c) const {
  const Eigen::Index L = t.Value(c).rows();
  Expr xs = t.RepeatRow(x, L);
  Expr heads = mlp.Forward(t, t.ConcatCols(xs, c));
  return SplitHeads(t, heads, d_z);
}

GaussianSequence RecognitionNet::Apply(const RefVector& x,
                                       const ContentSequence& c) const {
  Tape t(/*grad_enabled=*/false);
  Expr xe = t.Constant(x.x.transpose());
  Expr ce = t.Constant(c.c);
  GaussianExpr g = Forward(t, xe, ce);
  return GaussianSequence{t.Value(g.mu), t.Value(g.log_var)};
}

std::vector<Param*> RecognitionNet::Params() { return mlp.Params(); }

PriorNet::PriorNet(Eigen::Index d_c, Eigen::Index d_s, Eigen::Index hidden,
                   Eigen::Index d_z)
    : mlp("prior", d_c + d_s, {hidden, hidden}, 2 * d_z), d_z(d_z) {}

void PriorNet::Init(Rng& rng) { mlp.Init(rng); }

GaussianExpr PriorNet::Forward(Tape& t, Expr c, Expr s) const {
  const Eigen::Index L = t.Value(c).rows();
  Expr ss = t.RepeatRow(s, L);
  Expr heads = mlp.Forward(t, t.ConcatCols(c, ss));
  return SplitHeads(t, heads, d_z);
}

GaussianSequence PriorNet::Apply(const ContentSequence& c,
                                 const SpeakerEmbedding& s) const {
  Tape t(/*grad_enabled=*/false);
  Expr ce = t.Constant(c.c);
  Expr se = t.Constant(s.vector.transpose());
  GaussianExpr g = Forward(t, ce, se);
  return GaussianSequence{t.Value(g.mu), t.Value(g.log_var)};
}

std::vector<Param*> PriorNet::Params() { return mlp.Params(); }

SpeakerPredictor::SpeakerPredictor(Eigen::Index d_z, Eigen::Index hidden,
                                   Eigen::Index d_s)
    : mlp("spk_predictor", d_z, {hidden, hidden}, d_s) {}

void SpeakerPredictor::Init(Rng& rng) { mlp.Init(rng); }

Expr SpeakerPredictor::Forward(Tape& t, Expr z) const {
  return mlp.Forward(t, t.MeanRows(z));
}

SpeakerEmbedding SpeakerPredictor::Apply(const LatentSequence& z) const {
  Tape t(/*grad_enabled=*/false);
  Expr out = Forward(t, t.Constant(z.z));
  SpeakerEmbedding s;
  s.vector = t.Value(out).row(0).transpose();
  s.source = SpeakerSource::kPredicted;
  return s;
}

std::vector<Param*> SpeakerPredictor::Params() { return mlp.Params(); }

LatentSequence Reparameterize(const GaussianSequence& g,
                              const std::optional<Eigen::MatrixXd>& eps,
                              Rng* rng, LatentSource source) {
  LatentSequence out;
  out.source = source;
  if (eps.has_value()) {
    if (eps->rows() != g.mu.rows() || eps->cols() != g.mu.cols()) {
      ThrowInvalid("reparameterize: eps shape mismatch");
    }
    out.eps = *eps;
  } else {
    if (rng == nullptr) {
      ThrowInvalid("reparameterize: need either eps or an rng");
    }
    out.eps.resize(g.mu.rows(), g.mu.cols());
    rng->NormalFill(out.eps.data(), static_cast<size_t>(out.eps.size()));
  }
  out.z = g.mu + ((0.5 * g.log_var.array()).exp() * out.eps.array()).matrix();
  return out;
}

Expr ReparameterizeExpr(Tape& t, const GaussianExpr& g,
                        const Eigen::MatrixXd& eps) {
  const ad::Mat& mu = t.Value(g.mu);
  if (eps.rows() != mu.rows() || eps.cols() != mu.cols()) {
    ThrowInvalid("reparameterize: eps shape mismatch");
  }
  Expr sigma = t.Exp(t.Scale(g.log_var, 0.5));
  return t.Add(g.mu, t.Mul(sigma, t.Constant(eps)));
}

LatentForDecoder::LatentForDecoder(Eigen::Index d_c, Eigen::Index d_z)
    : content_proj("content_proj", d_c, d_z) {}

void LatentForDecoder::Init(Rng& rng) { content_proj.Init(rng); }

Expr LatentForDecoder::Forward(Tape& t, Expr z, Expr c,
                               const AblationFlags& flags) const {
  if (!flags.content_add) return z;
  return t.Add(z, content_proj.Forward(t, c));
}

Eigen::MatrixXd LatentForDecoder::Apply(const LatentSequence& z,
                                        const ContentSequence& c,
                                        const AblationFlags& flags) const {
  if (!flags.content_add) return z.z;
  Tape t(/*grad_enabled=*/false);
  Expr out = Forward(t, t.Constant(z.z), t.Constant(c.c), flags);
  return t.Value(out);
}

std::vector<Param*> LatentForDecoder::Params() {
  return content_proj.Params();
}

}  // namespace nns
