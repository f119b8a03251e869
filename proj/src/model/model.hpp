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

#ifndef NNSPEECH_MODEL_MODEL_HPP_
#define NNSPEECH_MODEL_MODEL_HPP_

#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "model/encoders.hpp"
#include "model/sgcvae.hpp"
#include "model/synthesis.hpp"
#include "util/kvfile.hpp"

namespace nns {

struct ModelConfig {
  int vocab_size = 24;
  int n_train_speakers = 6;
  int n_mels = 80;
  Eigen::Index d_x = 128;  // reference vector width
  Eigen::Index d_c = 128;  // content width
  Eigen::Index d_z = 64;   // latent width
  Eigen::Index d_s = 256;  // speaker embedding width
  Eigen::Index mlp_hidden = 256;
  Eigen::Index ffn_dim = 256;
  Eigen::Index adaptor_dim = 128;
  Eigen::Index conv_channels = 64;
  int conv_kernel = 5;
  int encoder_blocks = 2;
  int decoder_blocks = 2;
  int attention_heads = 2;
  int prosody_bins = 64;
  AblationFlags flags;

  KvFile ToKv() const;
  static ModelConfig FromKv(const KvFile& kv);
  bool operator==(const ModelConfig&) const;
};

// Owns every trainable parameter. Submodules are public; forwards compose
// on a caller-provided tape (training) or through the domain-level Apply
// helpers (inference/tests).
class Model {
 public:
  explicit Model(const ModelConfig& config);

  void Init(uint64_t seed);

  // Lookup-table speaker embedding (training only). Reads are counted so
  // the zero-shot contract — inference never touches the table — can be
  // asserted.
  SpeakerEmbedding LookupSpeaker(int speaker_index) const;
  Expr BindSpeakerRow(Tape& t, int speaker_index);
  int64_t speaker_table_reads() const { return speaker_table_reads_.load(); }

  // Fixed deterministic order; checkpoint and optimizer rely on it.
  std::vector<Param*> AllParams();
  // Stage 1 excludes the speaker predictor.
  std::vector<Param*> TrainableParams(bool include_speaker_predictor);

  ModelConfig config;
  PhonemeEncoder phoneme_encoder;
  ReferenceEncoder reference_encoder;
  RecognitionNet recognition;
  PriorNet prior;
  SpeakerPredictor speaker_predictor;
  LatentForDecoder latent_for_decoder;
  VarianceAdaptor adaptor;
  MelDecoder decoder;
  Param speaker_table;  // n_train_speakers x d_s

 private:
  mutable std::atomic<int64_t> speaker_table_reads_{0};
};

}  // namespace nns

#endif  // NNSPEECH_MODEL_MODEL_HPP_
