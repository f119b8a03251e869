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

#include "model/synthesis.hpp"

#include <cmath>

#include "util/error.hpp"

namespace nns {

int QuantRange::Bucket(double v, int bins) const {
  if (hi <= lo) return 0;
  const double pos = (v - lo) / (hi - lo) * bins;
  int idx = static_cast<int>(std::floor(pos));
  if (idx < 0) idx = 0;
  if (idx >= bins) idx = bins - 1;
  return idx;
}

std::vector<int> ExpandIndex(const std::vector<int32_t>& durations) {
  std::vector<int> idx;
  for (size_t i = 0; i < durations.size(); ++i) {
    for (int32_t k = 0; k < durations[i]; ++k) {
      idx.push_back(static_cast<int>(i));
    }
  }
  return idx;
}

VarianceAdaptor::VarianceAdaptor(Eigen::Index d_z, Eigen::Index d_s,
                                 Eigen::Index dim, int bins)
    : in_proj("adaptor.in_proj", d_z, dim),
      spk_proj("adaptor.spk_proj", d_s, dim),
      duration_predictor("adaptor.duration", dim, {dim}, 1),
      pitch_predictor("adaptor.pitch", dim, {dim}, 1),
      energy_predictor("adaptor.energy", dim, {dim}, 1),
      pitch_embed("adaptor.pitch_embed", bins, dim),
      energy_embed("adaptor.energy_embed", bins, dim),
      bins(bins) {}

void VarianceAdaptor::Init(Rng& rng) {
  in_proj.Init(rng);
  spk_proj.Init(rng);
  duration_predictor.Init(rng);
  pitch_predictor.Init(rng);
  energy_predictor.Init(rng);
  pitch_embed.Init(rng);
  energy_embed.Init(rng);
}

VarianceOutputs VarianceAdaptor::Forward(Tape& t, Expr z_in, Expr s,
                                         const ProsodyTargets* targets) const {
  const Eigen::Index L = t.Value(z_in).rows();
  if (targets != nullptr &&
      static_cast<Eigen::Index>(targets->durations.size()) != L) {
    ThrowInvalid("variance adaptor: target length mismatch");
  }

  Expr base = t.Add(in_proj.Forward(t, z_in),
                    t.RepeatRow(spk_proj.Forward(t, s), L));

  VarianceOutputs out;
  out.log_durations = duration_predictor.Forward(t, base);
  out.pitch = pitch_predictor.Forward(t, base);
  out.energy = energy_predictor.Forward(t, base);

  // Quantized prosody values feed learned embeddings; the bucket index is a
  // fixed integer, so the predictors learn only through their losses.
  std::vector<int> pitch_idx(static_cast<size_t>(L));
  std::vector<int> energy_idx(static_cast<size_t>(L));
  if (targets != nullptr) {
    out.durations = targets->durations;
    for (Eigen::Index i = 0; i < L; ++i) {
      pitch_idx[static_cast<size_t>(i)] =
          pitch_range.Bucket(targets->pitch[static_cast<size_t>(i)], bins);
      energy_idx[static_cast<size_t>(i)] =
          energy_range.Bucket(targets->energy[static_cast<size_t>(i)], bins);
    }
  } else {
    out.durations.resize(static_cast<size_t>(L));
    const Mat& log_d = t.Value(out.log_durations);
    const Mat& pitch_v = t.Value(out.pitch);
    const Mat& energy_v = t.Value(out.energy);
    for (Eigen::Index i = 0; i < L; ++i) {
      const double frames = std::exp(log_d(i, 0));
      out.durations[static_cast<size_t>(i)] = static_cast<int32_t>(
          std::max<int64_t>(1, std::llround(frames)));
      pitch_idx[static_cast<size_t>(i)] =
          pitch_range.Bucket(pitch_v(i, 0), bins);
      energy_idx[static_cast<size_t>(i)] =
          energy_range.Bucket(energy_v(i, 0), bins);
    }
  }

  Expr h = t.Add(base, t.Add(pitch_embed.Forward(t, pitch_idx),
                             energy_embed.Forward(t, energy_idx)));
  out.frames = t.GatherRows(h, ExpandIndex(out.durations));
  return out;
}

std::pair<FrameHidden, ProsodyPrediction> VarianceAdaptor::Apply(
    const Eigen::MatrixXd& z_in, const SpeakerEmbedding& s,
    const ProsodyTargets* targets) const {
  Tape t(/*grad_enabled=*/false);
  VarianceOutputs out =
      Forward(t, t.Constant(z_in), t.Constant(s.vector.transpose()), targets);
  FrameHidden fh{t.Value(out.frames)};
  ProsodyPrediction pp;
  pp.log_durations = t.Value(out.log_durations).col(0);
  pp.pitch = t.Value(out.pitch).col(0);
  pp.energy = t.Value(out.energy).col(0);
  return {std::move(fh), std::move(pp)};
}

std::vector<Param*> VarianceAdaptor::Params() {
  std::vector<Param*> out;
  for (auto* p : in_proj.Params()) out.push_back(p);
  for (auto* p : spk_proj.Params()) out.push_back(p);
  for (auto* p : duration_predictor.Params()) out.push_back(p);
  for (auto* p : pitch_predictor.Params()) out.push_back(p);
  for (auto* p : energy_predictor.Params()) out.push_back(p);
  for (auto* p : pitch_embed.Params()) out.push_back(p);
  for (auto* p : energy_embed.Params()) out.push_back(p);
  return out;
}

MelDecoder::MelDecoder(Eigen::Index dim, Eigen::Index ffn_dim,
                       Eigen::Index d_s, Eigen::Index n_mels, int num_blocks,
                       int num_heads)
    : spk_proj("decoder.spk_proj", d_s, dim),
      head("decoder.head", dim, n_mels) {
  for (int i = 0; i < num_blocks; ++i) {
    blocks.emplace_back("decoder.block" + std::to_string(i), dim, ffn_dim,
                        num_heads);
  }
}

void MelDecoder::Init(Rng& rng) {
  spk_proj.Init(rng);
  for (auto& b : blocks) b.Init(rng);
  head.Init(rng);
}

Expr MelDecoder::Forward(Tape& t, Expr frames, Expr s) const {
  const Eigen::Index T = t.Value(frames).rows();
  Expr h = t.Add(frames, t.RepeatRow(spk_proj.Forward(t, s), T));
  h = t.Add(h, t.Constant(SinusoidalPositions(T, t.Value(h).cols())));
  for (const auto& b : blocks) h = b.Forward(t, h);
  return head.Forward(t, h);
}

Eigen::MatrixXd MelDecoder::Apply(const FrameHidden& h,
                                  const SpeakerEmbedding& s) const {
  Tape t(/*grad_enabled=*/false);
  Expr out = Forward(t, t.Constant(h.h), t.Constant(s.vector.transpose()));
  return t.Value(out);
}

std::vector<Param*> MelDecoder::Params() {
  std::vector<Param*> out;
  for (auto* p : spk_proj.Params()) out.push_back(p);
  for (auto& b : blocks) {
    for (auto* p : b.Params()) out.push_back(p);
  }
  for (auto* p : head.Params()) out.push_back(p);
  return out;
}

}  // namespace nns
