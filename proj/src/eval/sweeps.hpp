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
// Experiment sweeps over the synthetic corpus: the KL-weight sweep, the
// adaption-count sweep and the architecture ablations. Every cell reuses
// one corpus and one seed, so rows differ only in the swept parameter.

#ifndef NNSPEECH_EVAL_SWEEPS_HPP_
#define NNSPEECH_EVAL_SWEEPS_HPP_

#include <string>
#include <vector>

#include "eval/mcd.hpp"
#include "model/model.hpp"
#include "pipeline/dataset.hpp"
#include "pipeline/trainer.hpp"

namespace nns {

struct SweepRow {
  std::string param;
  double mean_mcd_db = 0.0;
  double std_mcd_db = 0.0;
  int64_t n = 0;  // utterances; 0 marks a failed (diverged) cell
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

// CSV schema: param,mean_mcd_db,std_mcd_db,n
std::string SweepToCsv(const SweepResult& result);
void WriteSweepCsv(const std::string& path, const SweepResult& result);

// Zero-shot evaluation protocol shared by all sweeps: for each unseen
// speaker, every eval utterance is synthesized from the first k other
// utterances of the same speaker and compared to its ground truth. Speakers
// with at most k utterances are skipped.
struct UnseenEvalStats {
  double mean = 0.0;
  double std_dev = 0.0;
  int64_t n = 0;
  std::vector<double> per_utterance;
};
UnseenEvalStats EvaluateUnseenMcd(Model& model, const Dataset& dataset,
                                  const McdConfig& mcd_config, int k_refs);

// Trains one model per gamma (same seed) and evaluates unseen-speaker MCD.
// A diverged cell is recorded with n = 0 and the sweep continues.
SweepResult SweepGamma(const std::vector<double>& gammas,
                       const TrainConfig& base_config, const Dataset& dataset,
                       const McdConfig& mcd_config);

// Evaluates one trained model with k averaged references per row.
SweepResult SweepAdaption(const std::vector<int>& ks, Model& model,
                          const Dataset& dataset, const McdConfig& mcd_config);

enum class AblationMode { kFull, kContentAdd, kNoSpeakerPredictor };
const char* AblationModeName(AblationMode mode);
AblationMode AblationModeFromName(const std::string& name);

// Trains with the corresponding flag and evaluates unseen-speaker MCD.
SweepRow RunAblation(AblationMode mode, const TrainConfig& base_config,
                     const Dataset& dataset, const McdConfig& mcd_config);

}  // namespace nns

#endif  // NNSPEECH_EVAL_SWEEPS_HPP_
