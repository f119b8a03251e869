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

#ifndef NNSPEECH_MODEL_ENCODERS_HPP_
#define NNSPEECH_MODEL_ENCODERS_HPP_

#include <vector>

#include "data/types.hpp"
#include "nn/modules.hpp"

namespace nns {

// Utterance-level summary produced by the reference encoder.
struct RefVector {
  Eigen::VectorXd x;
};

// Per-phoneme hidden states, rows = L.
struct ContentSequence {
  Eigen::MatrixXd c;
};

// Conv stack over mel frames followed by temporal mean pooling to a fixed
// width vector. Convolutions use circular padding, so the pooled output is
// invariant to tiling the input in time; length carries no information by
// construction.
struct ReferenceEncoder {
  Conv1d conv1, conv2, conv3;

  ReferenceEncoder() = default;
  ReferenceEncoder(Eigen::Index n_mels, Eigen::Index mid_channels,
                   Eigen::Index out_dim, int kernel);
  void Init(Rng& rng);

  int ReceptiveField() const { return 3 * (conv1.kernel - 1) + 1; }

  // mel: T x n_mels. Throws if T is below the receptive field.
  Expr Forward(Tape& t, Expr mel) const;
  RefVector Encode(const MelSpectrogram& mel) const;

  std::vector<Param*> Params();
};

// Embedding lookup + sinusoidal positions + self-attention blocks.
struct PhonemeEncoder {
  Embedding embedding;
  std::vector<TransformerBlock> blocks;
  int vocab_size = 0;

  PhonemeEncoder() = default;
  PhonemeEncoder(int vocab, Eigen::Index dim, Eigen::Index ffn_dim,
                 int num_blocks, int num_heads);
  void Init(Rng& rng);

  Expr Forward(Tape& t, const std::vector<int>& ids) const;
  ContentSequence Encode(const PhonemeSequence& ph) const;

  std::vector<Param*> Params();
};

}  // namespace nns

#endif  // NNSPEECH_MODEL_ENCODERS_HPP_
