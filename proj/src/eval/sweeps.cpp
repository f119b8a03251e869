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

#include "eval/sweeps.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "pipeline/synthesize.hpp"
#include "util/error.hpp"

namespace nns {

std::string SweepToCsv(const SweepResult& result) {
  std::string out = "param,mean_mcd_db,std_mcd_db,n\n";
  char buf[160];
  for (const auto& row : result.rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%lld\n", row.param.c_str(),
                  row.mean_mcd_db, row.std_mcd_db,
                  static_cast<long long>(row.n));
    out += buf;
  }
  return out;
}

void WriteSweepCsv(const std::string& path, const SweepResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) ThrowIo("cannot open CSV for writing: " + path);
  out << SweepToCsv(result);
  if (!out) ThrowIo("write failure: " + path);
}

UnseenEvalStats EvaluateUnseenMcd(Model& model, const Dataset& dataset,
                                  const McdConfig& mcd_config, int k_refs) {
  if (k_refs < 1) ThrowInvalid("evaluate: k_refs must be >= 1");

  std::map<std::string, std::vector<size_t>> per_speaker;
  for (size_t idx : dataset.unseen_eval_indices) {
    per_speaker[dataset.items[idx].speaker_id].push_back(idx);
  }

  UnseenEvalStats stats;
  for (const auto& [speaker, indices] : per_speaker) {
    if (static_cast<int>(indices.size()) <= k_refs) {
      std::fprintf(stderr,
                   "warning: speaker %s has %zu utterances, needs more than "
                   "%d; skipped\n",
                   speaker.c_str(), indices.size(), k_refs);
      continue;
    }
    for (size_t target_pos = 0; target_pos < indices.size(); ++target_pos) {
      const DatasetItem& target = dataset.items[indices[target_pos]];

      std::vector<MelSpectrogram> refs;
      for (size_t p = 0; p < indices.size() && static_cast<int>(refs.size()) <
                         k_refs; ++p) {
        if (p == target_pos) continue;
        const DatasetItem& ref_item = dataset.items[indices[p]];
        MelSpectrogram ref;
        ref.frames = ref_item.example.mel.cast<float>();
        ref.config = ref_item.audio;
        refs.push_back(std::move(ref));
      }

      PhonemeSequence ph;
      ph.ids.assign(target.example.phoneme_ids.begin(),
                    target.example.phoneme_ids.end());
      const SynthesisResult syn = Synthesize(model, ph, refs);

      MelSpectrogram truth;
      truth.frames = target.example.mel.cast<float>();
      truth.config = target.audio;
      stats.per_utterance.push_back(Mcd(truth, syn.mel, mcd_config));
    }
  }
  stats.n = static_cast<int64_t>(stats.per_utterance.size());
  if (stats.n == 0) ThrowRuntime("evaluate: no unseen utterances evaluated");
  double sum = 0.0, sum_sq = 0.0;
  for (double v : stats.per_utterance) {
    sum += v;
    sum_sq += v * v;
  }
  stats.mean = sum / static_cast<double>(stats.n);
  stats.std_dev = std::sqrt(
      std::max(0.0, sum_sq / static_cast<double>(stats.n) -
                        stats.mean * stats.mean));
  return stats;
}

namespace {

std::string FormatGamma(double gamma) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%g", gamma);
  return buf;
}

SweepRow TrainAndEvaluate(const TrainConfig& config, const Dataset& dataset,
                          const McdConfig& mcd_config,
                          const std::string& param_name) {
  SweepRow row;
  row.param = param_name;
  try {
    Model model(config.model);
    model.Init(config.seed);
    Train(model, config, dataset, /*out_dir=*/"");
    const UnseenEvalStats stats =
        EvaluateUnseenMcd(model, dataset, mcd_config, /*k_refs=*/1);
    row.mean_mcd_db = stats.mean;
    row.std_mcd_db = stats.std_dev;
    row.n = stats.n;
  } catch (const Error& e) {
    std::fprintf(stderr, "sweep cell %s failed: %s\n", param_name.c_str(),
                 e.what());
    row.mean_mcd_db = std::nan("");
    row.std_mcd_db = std::nan("");
    row.n = 0;
  }
  return row;
}

}  // namespace

SweepResult SweepGamma(const std::vector<double>& gammas,
                       const TrainConfig& base_config, const Dataset& dataset,
                       const McdConfig& mcd_config) {
  for (double g : gammas) {
    if (!(g > 0.0)) ThrowInvalid("sweep gamma: values must be positive");
  }
  SweepResult result;
  for (double gamma : gammas) {
    TrainConfig config = base_config;
    config.gamma = gamma;
    result.rows.push_back(
        TrainAndEvaluate(config, dataset, mcd_config, FormatGamma(gamma)));
  }
  return result;
}

SweepResult SweepAdaption(const std::vector<int>& ks, Model& model,
                          const Dataset& dataset,
                          const McdConfig& mcd_config) {
  for (int k : ks) {
    if (k < 1) ThrowInvalid("sweep adaption: k must be >= 1");
  }
  SweepResult result;
  for (int k : ks) {
    SweepRow row;
    row.param = std::to_string(k);
    const UnseenEvalStats stats =
        EvaluateUnseenMcd(model, dataset, mcd_config, k);
    row.mean_mcd_db = stats.mean;
    row.std_mcd_db = stats.std_dev;
    row.n = stats.n;
    result.rows.push_back(std::move(row));
  }
  return result;
}

const char* AblationModeName(AblationMode mode) {
  switch (mode) {
    case AblationMode::kFull: return "full";
    case AblationMode::kContentAdd: return "content_add";
    case AblationMode::kNoSpeakerPredictor: return "no_spk_pred";
  }
  return "full";
}

AblationMode AblationModeFromName(const std::string& name) {
  if (name == "full") return AblationMode::kFull;
  if (name == "content_add") return AblationMode::kContentAdd;
  if (name == "no_spk_pred") return AblationMode::kNoSpeakerPredictor;
  ThrowInvalid("unknown ablation mode: " + name);
}

SweepRow RunAblation(AblationMode mode, const TrainConfig& base_config,
                     const Dataset& dataset, const McdConfig& mcd_config) {
  TrainConfig config = base_config;
  config.model.flags.content_add = mode == AblationMode::kContentAdd;
  config.model.flags.no_speaker_predictor =
      mode == AblationMode::kNoSpeakerPredictor;
  return TrainAndEvaluate(config, dataset, mcd_config, AblationModeName(mode));
}

}  // namespace nns
