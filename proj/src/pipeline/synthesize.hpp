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
// Zero-shot inference path: the reference mels are encoded and averaged,
// the recognition network produces the latent, and the decoder is driven
// exclusively by the predicted speaker embedding. The speaker lookup table
// is never read here; that is asserted through the read counter.

#ifndef NNSPEECH_PIPELINE_SYNTHESIZE_HPP_
#define NNSPEECH_PIPELINE_SYNTHESIZE_HPP_

#include <vector>

#include "model/model.hpp"

namespace nns {

struct SynthesizeOptions {
  // Posterior mean by default; `sample` draws reparameterization noise from
  // `seed` and records it.
  bool sample = false;
  uint64_t seed = 0;
  // Average the predicted speaker embedding across per-reference pipelines
  // instead of predicting once from the averaged reference vector.
  bool average_s_hat = false;
};

struct SynthesisResult {
  MelSpectrogram mel;
  SpeakerEmbedding s_hat;
  LatentSequence latent;
  ProsodyPrediction prosody;
};

SynthesisResult Synthesize(Model& model, const PhonemeSequence& phonemes,
                           const std::vector<MelSpectrogram>& references,
                           const SynthesizeOptions& options = {});

}  // namespace nns

#endif  // NNSPEECH_PIPELINE_SYNTHESIZE_HPP_
