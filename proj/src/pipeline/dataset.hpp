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

#ifndef NNSPEECH_PIPELINE_DATASET_HPP_
#define NNSPEECH_PIPELINE_DATASET_HPP_

#include <string>
#include <vector>

#include "data/types.hpp"
#include "model/synthesis.hpp"
#include "objective/elbo.hpp"

namespace nns {

// In-memory view of a generated corpus. Train-speaker lookup rows are
// assigned by sorted speaker id, so the mapping is deterministic.
struct DatasetItem {
  TrainingExample example;  // speaker_index is -1 outside the train split
  std::string utterance_id;
  std::string speaker_id;
  std::string split;
  std::string mel_path;  // relative to the corpus root
  AudioConfig audio;
};

struct Dataset {
  std::vector<DatasetItem> items;
  std::vector<size_t> train_indices;
  std::vector<size_t> seen_eval_indices;
  std::vector<size_t> unseen_eval_indices;
  std::vector<std::string> train_speakers;  // lookup row -> speaker id
  // Pitch/energy are standardized with train-split statistics before they
  // reach the model (prosody files keep raw Hz/RMS values); the quant
  // ranges below are on the standardized scale.
  double pitch_mean = 0.0, pitch_std = 1.0;
  double energy_mean = 0.0, energy_std = 1.0;
  QuantRange pitch_range;
  QuantRange energy_range;
  AudioConfig audio;
  int vocab_size = 0;
  std::string root_dir;

  static Dataset Load(const CorpusManifest& manifest);
  static Dataset LoadFromDir(const std::string& corpus_dir);

  const DatasetItem& item(size_t i) const { return items[i]; }
};

}  // namespace nns

#endif  // NNSPEECH_PIPELINE_DATASET_HPP_
