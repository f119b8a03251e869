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
// Variance adaptor (duration/pitch/energy prediction + length regulation)
// and the mel decoder.

#ifndef NNSPEECH_MODEL_SYNTHESIS_HPP_
#define NNSPEECH_MODEL_SYNTHESIS_HPP_

#include <optional>
#include <vector>

#include "data/types.hpp"
#include "model/encoders.hpp"
#include "nn/modules.hpp"

namespace nns {

struct FrameHidden {
  Eigen::MatrixXd h;  // T x D
};

struct ProsodyPrediction {
  Eigen::VectorXd log_durations;
  Eigen::VectorXd pitch;
  Eigen::VectorXd energy;
};

// Uniform quantization range for pitch/energy embeddings; measured on the
// training split and stored in the checkpoint.
struct QuantRange {
  double lo = 0.0;
  double hi = 1.0;

  int Bucket(double v, int bins) const;
};

struct VarianceOutputs {
  Expr frames;         // T x D after length regulation
  Expr log_durations;  // L x 1
  Expr pitch;          // L x 1
  Expr energy;         // L x 1
  std::vector<int32_t> durations;  // frames used for regulation
};

struct VarianceAdaptor {
  Linear in_proj;   // D_z -> D
  Linear spk_proj;  // D_s -> D
  Mlp duration_predictor, pitch_predictor, energy_predictor;
  Embedding pitch_embed, energy_embed;
  int bins = 64;
  QuantRange pitch_range{0.0, 400.0};
  QuantRange energy_range{0.0, 1.0};

  VarianceAdaptor() = default;
  VarianceAdaptor(Eigen::Index d_z, Eigen::Index d_s, Eigen::Index dim,
                  int bins);
  void Init(Rng& rng);

  // Training mode when `targets` is present: ground-truth durations drive
  // length regulation and target pitch/energy drive the embeddings.
  // Inference mode: rounded exp(log_duration) (clamped to >= 1) and the
  // predicted pitch/energy values are used.
  VarianceOutputs Forward(Tape& t, Expr z_in, Expr s,
                          const ProsodyTargets* targets) const;
  std::pair<FrameHidden, ProsodyPrediction> Apply(
      const Eigen::MatrixXd& z_in, const SpeakerEmbedding& s,
      const ProsodyTargets* targets) const;

  std::vector<Param*> Params();
};

// Expansion used by length regulation: frame t maps to its phoneme index.
std::vector<int> ExpandIndex(const std::vector<int32_t>& durations);

struct MelDecoder {
  Linear spk_proj;  // D_s -> D
  std::vector<TransformerBlock> blocks;
  Linear head;      // D -> n_mels

  MelDecoder() = default;
  MelDecoder(Eigen::Index dim, Eigen::Index ffn_dim, Eigen::Index d_s,
             Eigen::Index n_mels, int num_blocks, int num_heads);
  void Init(Rng& rng);

  Expr Forward(Tape& t, Expr frames, Expr s) const;
  Eigen::MatrixXd Apply(const FrameHidden& h, const SpeakerEmbedding& s) const;

  std::vector<Param*> Params();
};

}  // namespace nns

#endif  // NNSPEECH_MODEL_SYNTHESIS_HPP_
