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

#include "model/model.hpp"

#include <algorithm>

#include "util/error.hpp"

namespace nns {

KvFile ModelConfig::ToKv() const {
  KvFile kv;
  kv.Set("vocab_size", static_cast<int64_t>(vocab_size));
  kv.Set("n_train_speakers", static_cast<int64_t>(n_train_speakers));
  kv.Set("n_mels", static_cast<int64_t>(n_mels));
  kv.Set("d_x", static_cast<int64_t>(d_x));
  kv.Set("d_c", static_cast<int64_t>(d_c));
  kv.Set("d_z", static_cast<int64_t>(d_z));
  kv.Set("d_s", static_cast<int64_t>(d_s));
  kv.Set("mlp_hidden", static_cast<int64_t>(mlp_hidden));
  kv.Set("ffn_dim", static_cast<int64_t>(ffn_dim));
  kv.Set("adaptor_dim", static_cast<int64_t>(adaptor_dim));
  kv.Set("conv_channels", static_cast<int64_t>(conv_channels));
  kv.Set("conv_kernel", static_cast<int64_t>(conv_kernel));
  kv.Set("encoder_blocks", static_cast<int64_t>(encoder_blocks));
  kv.Set("decoder_blocks", static_cast<int64_t>(decoder_blocks));
  kv.Set("attention_heads", static_cast<int64_t>(attention_heads));
  kv.Set("prosody_bins", static_cast<int64_t>(prosody_bins));
  kv.Set("flag_content_add", static_cast<int64_t>(flags.content_add ? 1 : 0));
  kv.Set("flag_no_speaker_predictor",
         static_cast<int64_t>(flags.no_speaker_predictor ? 1 : 0));
  return kv;
}

ModelConfig ModelConfig::FromKv(const KvFile& kv) {
  ModelConfig c;
  c.vocab_size = static_cast<int>(kv.GetInt("vocab_size", c.vocab_size));
  c.n_train_speakers =
      static_cast<int>(kv.GetInt("n_train_speakers", c.n_train_speakers));
  c.n_mels = static_cast<int>(kv.GetInt("n_mels", c.n_mels));
  c.d_x = kv.GetInt("d_x", c.d_x);
  c.d_c = kv.GetInt("d_c", c.d_c);
  c.d_z = kv.GetInt("d_z", c.d_z);
  c.d_s = kv.GetInt("d_s", c.d_s);
  c.mlp_hidden = kv.GetInt("mlp_hidden", c.mlp_hidden);
  c.ffn_dim = kv.GetInt("ffn_dim", c.ffn_dim);
  c.adaptor_dim = kv.GetInt("adaptor_dim", c.adaptor_dim);
  c.conv_channels = kv.GetInt("conv_channels", c.conv_channels);
  c.conv_kernel = static_cast<int>(kv.GetInt("conv_kernel", c.conv_kernel));
  c.encoder_blocks =
      static_cast<int>(kv.GetInt("encoder_blocks", c.encoder_blocks));
  c.decoder_blocks =
      static_cast<int>(kv.GetInt("decoder_blocks", c.decoder_blocks));
  c.attention_heads =
      static_cast<int>(kv.GetInt("attention_heads", c.attention_heads));
  c.prosody_bins = static_cast<int>(kv.GetInt("prosody_bins", c.prosody_bins));
  c.flags.content_add = kv.GetInt("flag_content_add", 0) != 0;
  c.flags.no_speaker_predictor =
      kv.GetInt("flag_no_speaker_predictor", 0) != 0;
  return c;
}

bool ModelConfig::operator==(const ModelConfig& o) const {
  return ToKv().Serialize() == o.ToKv().Serialize();
}

Model::Model(const ModelConfig& cfg)
    : config(cfg),
      phoneme_encoder(cfg.vocab_size, cfg.d_c, cfg.ffn_dim, cfg.encoder_blocks,
                      cfg.attention_heads),
      reference_encoder(cfg.n_mels, cfg.conv_channels, cfg.d_x,
                        cfg.conv_kernel),
      recognition(cfg.d_x, cfg.d_c, cfg.mlp_hidden, cfg.d_z),
      prior(cfg.d_c, cfg.d_s, cfg.mlp_hidden, cfg.d_z),
      speaker_predictor(cfg.d_z, cfg.mlp_hidden, cfg.d_s),
      latent_for_decoder(cfg.d_c, cfg.d_z),
      adaptor(cfg.d_z, cfg.d_s, cfg.adaptor_dim, cfg.prosody_bins),
      decoder(cfg.adaptor_dim, cfg.ffn_dim, cfg.d_s, cfg.n_mels,
              cfg.decoder_blocks, cfg.attention_heads),
      speaker_table("speaker_table", cfg.n_train_speakers, cfg.d_s) {}

void Model::Init(uint64_t seed) {
  Rng master(seed);
  Rng r = master.Fork(1);
  phoneme_encoder.Init(r);
  r = master.Fork(2);
  reference_encoder.Init(r);
  r = master.Fork(3);
  recognition.Init(r);
  r = master.Fork(4);
  prior.Init(r);
  r = master.Fork(5);
  speaker_predictor.Init(r);
  r = master.Fork(6);
  latent_for_decoder.Init(r);
  r = master.Fork(7);
  adaptor.Init(r);
  r = master.Fork(8);
  decoder.Init(r);
  r = master.Fork(9);
  for (Eigen::Index i = 0; i < speaker_table.value.size(); ++i) {
    speaker_table.value.data()[i] = 0.1 * r.Normal();
  }
}

SpeakerEmbedding Model::LookupSpeaker(int speaker_index) const {
  if (speaker_index < 0 || speaker_index >= config.n_train_speakers) {
    ThrowInvalid("speaker index out of range");
  }
  speaker_table_reads_.fetch_add(1);
  SpeakerEmbedding s;
  s.vector = speaker_table.value.row(speaker_index).transpose();
  s.source = SpeakerSource::kLookup;
  return s;
}

Expr Model::BindSpeakerRow(Tape& t, int speaker_index) {
  if (speaker_index < 0 || speaker_index >= config.n_train_speakers) {
    ThrowInvalid("speaker index out of range");
  }
  speaker_table_reads_.fetch_add(1);
  return t.GatherRows(t.Bind(speaker_table), {speaker_index});
}

std::vector<Param*> Model::AllParams() {
  std::vector<Param*> out;
  auto append = [&out](std::vector<Param*> ps) {
    for (auto* p : ps) out.push_back(p);
  };
  append(phoneme_encoder.Params());
  append(reference_encoder.Params());
  append(recognition.Params());
  append(prior.Params());
  append(speaker_predictor.Params());
  append(latent_for_decoder.Params());
  append(adaptor.Params());
  append(decoder.Params());
  out.push_back(&speaker_table);
  return out;
}

std::vector<Param*> Model::TrainableParams(bool include_speaker_predictor) {
  std::vector<Param*> out;
  auto predictor = speaker_predictor.Params();
  for (auto* p : AllParams()) {
    if (!include_speaker_predictor &&
        std::find(predictor.begin(), predictor.end(), p) != predictor.end()) {
      continue;
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace nns
