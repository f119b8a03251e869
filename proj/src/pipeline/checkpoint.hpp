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
// Versioned checkpoint container: magic "NNSCKPT1", a key-value metadata
// block (model config, quantization ranges, step counter, speaker ids),
// then one float64 NNSPK1 record per parameter in registry order and one
// record for the loss history. Documented in docs/FORMATS.md.

#ifndef NNSPEECH_PIPELINE_CHECKPOINT_HPP_
#define NNSPEECH_PIPELINE_CHECKPOINT_HPP_

#include <memory>
#include <string>
#include <vector>

#include "model/model.hpp"
#include "objective/losses.hpp"

namespace nns {

struct Checkpoint {
  ModelConfig config;
  std::unique_ptr<Model> model;
  int64_t step = 0;
  std::vector<std::string> train_speakers;
  std::vector<LossBreakdown> loss_history;
  QuantRange pitch_range;
  QuantRange energy_range;
};

void SaveCheckpoint(const std::string& path, Model& model, int64_t step,
                    const std::vector<std::string>& train_speakers,
                    const std::vector<LossBreakdown>& history);

// Builds a fresh model from the stored config. Throws on version or shape
// mismatches.
Checkpoint LoadCheckpoint(const std::string& path);

// Loads parameters into an existing model; throws if the stored config does
// not match model.config.
void LoadCheckpointInto(const std::string& path, Model& model);

}  // namespace nns

#endif  // NNSPEECH_PIPELINE_CHECKPOINT_HPP_
