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

#include "pipeline/synthesize.hpp"

#include "util/error.hpp"
#include "util/rng.hpp"

namespace nns {

SynthesisResult Synthesize(Model& model, const PhonemeSequence& phonemes,
                           const std::vector<MelSpectrogram>& references,
                           const SynthesizeOptions& options) {
  if (references.empty()) ThrowInvalid("synthesize: need at least one reference");
  const int64_t table_reads_before = model.speaker_table_reads();

  // k-shot averaging of the reference vectors.
  RefVector x_bar;
  std::vector<RefVector> per_ref;
  per_ref.reserve(references.size());
  for (const auto& ref : references) {
    per_ref.push_back(model.reference_encoder.Encode(ref));
  }
  x_bar.x = per_ref.front().x;
  for (size_t i = 1; i < per_ref.size(); ++i) x_bar.x += per_ref[i].x;
  x_bar.x /= static_cast<double>(per_ref.size());

  const ContentSequence c = model.phoneme_encoder.Encode(phonemes);
  const GaussianSequence q = model.recognition.Apply(x_bar, c);

  SynthesisResult result;
  if (options.sample) {
    Rng rng(options.seed);
    result.latent = Reparameterize(q, std::nullopt, &rng,
                                   LatentSource::kRecognition);
  } else {
    const Eigen::MatrixXd zero =
        Eigen::MatrixXd::Zero(q.mu.rows(), q.mu.cols());
    result.latent = Reparameterize(q, zero, nullptr,
                                   LatentSource::kRecognition);
  }

  if (model.config.flags.no_speaker_predictor) {
    result.s_hat.vector = Eigen::VectorXd::Zero(model.config.d_s);
    result.s_hat.source = SpeakerSource::kPredicted;
  } else if (options.average_s_hat && references.size() > 1) {
    // Fidelity mode: each reference runs its own recognition pipeline and
    // the predicted embeddings are averaged.
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(model.config.d_s);
    for (const auto& ref_vec : per_ref) {
      const GaussianSequence qi = model.recognition.Apply(ref_vec, c);
      LatentSequence zi = Reparameterize(
          qi, Eigen::MatrixXd::Zero(qi.mu.rows(), qi.mu.cols()), nullptr,
          LatentSource::kRecognition);
      acc += model.speaker_predictor.Apply(zi).vector;
    }
    result.s_hat.vector = acc / static_cast<double>(per_ref.size());
    result.s_hat.source = SpeakerSource::kAveraged;
  } else {
    result.s_hat = model.speaker_predictor.Apply(result.latent);
  }

  const Eigen::MatrixXd dec_in = model.latent_for_decoder.Apply(
      result.latent, c, model.config.flags);
  auto [frames, prosody] =
      model.adaptor.Apply(dec_in, result.s_hat, /*targets=*/nullptr);
  result.prosody = prosody;

  result.mel.frames =
      model.decoder.Apply(frames, result.s_hat).cast<float>();
  result.mel.config = references.front().config;

  if (model.speaker_table_reads() != table_reads_before) {
    ThrowRuntime("zero-shot contract violated: the speaker lookup table was "
                 "read during synthesis");
  }
  return result;
}

}  // namespace nns
