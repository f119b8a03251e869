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

#include "model/encoders.hpp"

#include "util/error.hpp"

namespace nns {

ReferenceEncoder::ReferenceEncoder(Eigen::Index n_mels,
                                   Eigen::Index mid_channels,
                                   Eigen::Index out_dim, int kernel)
    : conv1("ref_enc.conv1", kernel, n_mels, mid_channels),
      conv2("ref_enc.conv2", kernel, mid_channels, mid_channels),
      conv3("ref_enc.conv3", kernel, mid_channels, out_dim) {}

void ReferenceEncoder::Init(Rng& rng) {
  conv1.Init(rng);
  conv2.Init(rng);
  conv3.Init(rng);
}

Expr ReferenceEncoder::Forward(Tape& t, Expr mel) const {
  if (t.Value(mel).rows() < ReceptiveField()) {
    ThrowInvalid("reference mel has fewer frames than the encoder receptive "
                 "field (" +
                 std::to_string(t.Value(mel).rows()) + " < " +
                 std::to_string(ReceptiveField()) + ")");
  }
  Expr h = t.Tanh(conv1.Forward(t, mel));
  h = t.Tanh(conv2.Forward(t, h));
  h = t.Tanh(conv3.Forward(t, h));
  return t.MeanRows(h);
}

RefVector ReferenceEncoder::Encode(const MelSpectrogram& mel) const {
  Tape t(/*grad_enabled=*/false);
  Expr in = t.Constant(mel.frames.cast<double>());
  Expr out = Forward(t, in);
  return RefVector{t.Value(out).row(0).transpose()};
}

std::vector<Param*> ReferenceEncoder::Params() {
  std::vector<Param*> out;
  for (auto* c : {&conv1, &conv2, &conv3}) {
    for (auto* p : c->Params()) out.push_back(p);
  }
  return out;
}

PhonemeEncoder::PhonemeEncoder(int vocab, Eigen::Index dim,
                               Eigen::Index ffn_dim, int num_blocks,
                               int num_heads)
    : embedding("ph_enc.embedding", vocab, dim), vocab_size(vocab) {
  for (int i = 0; i < num_blocks; ++i) {
    blocks.emplace_back("ph_enc.block" + std::to_string(i), dim, ffn_dim,
                        num_heads);
  }
}

void PhonemeEncoder::Init(Rng& rng) {
  embedding.Init(rng);
  for (auto& b : blocks) b.Init(rng);
}

Expr PhonemeEncoder::Forward(Tape& t, const std::vector<int>& ids) const {
  for (int id : ids) {
    if (id < 0 || id >= vocab_size) {
      ThrowInvalid("phoneme id " + std::to_string(id) +
                   " outside vocabulary of size " +
                   std::to_string(vocab_size));
    }
  }
  Expr h = embedding.Forward(t, ids);
  Expr pe = t.Constant(SinusoidalPositions(
      static_cast<Eigen::Index>(ids.size()), t.Value(h).cols()));
  h = t.Add(h, pe);
  for (const auto& b : blocks) h = b.Forward(t, h);
  return h;
}

ContentSequence PhonemeEncoder::Encode(const PhonemeSequence& ph) const {
  Tape t(/*grad_enabled=*/false);
  std::vector<int> ids(ph.ids.begin(), ph.ids.end());
  Expr out = Forward(t, ids);
  return ContentSequence{t.Value(out)};
}

std::vector<Param*> PhonemeEncoder::Params() {
  std::vector<Param*> out;
  for (auto* p : embedding.Params()) out.push_back(p);
  for (auto& b : blocks) {
    for (auto* p : b.Params()) out.push_back(p);
  }
  return out;
}

}  // namespace nns
