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

#include "pipeline/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "data/matio.hpp"
#include "util/error.hpp"

namespace nns {

namespace fs = std::filesystem;

Dataset Dataset::Load(const CorpusManifest& manifest) {
  auto report = Validate(manifest, /*check_files=*/false);
  if (!report.ok()) ThrowInvalid("invalid manifest: " + report.issues[0]);

  Dataset ds;
  ds.root_dir = manifest.root_dir;

  std::set<std::string> train_speaker_set;
  for (const auto& e : manifest.entries) {
    if (e.split == "train") train_speaker_set.insert(e.speaker_id);
  }
  ds.train_speakers.assign(train_speaker_set.begin(), train_speaker_set.end());
  std::map<std::string, int> speaker_row;
  for (size_t i = 0; i < ds.train_speakers.size(); ++i) {
    speaker_row[ds.train_speakers[i]] = static_cast<int>(i);
  }

  int32_t max_id = 0;

  for (const auto& e : manifest.entries) {
    DatasetItem item;
    item.utterance_id = e.utterance_id;
    item.speaker_id = e.speaker_id;
    item.split = e.split;
    item.mel_path = e.mel_path;

    const MelSpectrogram mel =
        LoadMel((fs::path(manifest.root_dir) / e.mel_path).string());
    item.audio = mel.config;
    item.example.mel = mel.frames.cast<double>();
    item.example.phoneme_ids.assign(e.phoneme_ids.begin(),
                                    e.phoneme_ids.end());
    item.example.prosody =
        LoadProsody((fs::path(manifest.root_dir) / e.prosody_path).string());
    auto it = speaker_row.find(e.speaker_id);
    item.example.speaker_index = it == speaker_row.end() ? -1 : it->second;

    for (int32_t id : e.phoneme_ids) max_id = std::max(max_id, id);

    const size_t idx = ds.items.size();
    if (e.split == "train") {
      ds.train_indices.push_back(idx);
    } else if (e.split == "seen-eval") {
      ds.seen_eval_indices.push_back(idx);
    } else {
      ds.unseen_eval_indices.push_back(idx);
    }
    ds.items.push_back(std::move(item));
  }
  if (ds.items.empty()) ThrowInvalid("manifest has no entries");
  ds.audio = ds.items.front().audio;

  // Vocabulary size from the symbol table when present, else from the ids.
  ds.vocab_size = max_id + 1;
  {
    std::ifstream sym(fs::path(manifest.root_dir) / "symbols.txt");
    if (sym) {
      int count = 0;
      std::string line;
      while (std::getline(sym, line)) {
        if (!line.empty()) ++count;
      }
      ds.vocab_size = std::max(ds.vocab_size, count);
    }
  }

  // Standardize pitch/energy with train-split statistics and quantize on
  // the standardized scale.
  {
    double p_sum = 0.0, p_sq = 0.0, e_sum = 0.0, e_sq = 0.0;
    int64_t n = 0;
    for (size_t idx : ds.train_indices) {
      const auto& pr = ds.items[idx].example.prosody;
      for (size_t i = 0; i < pr.pitch.size(); ++i) {
        p_sum += pr.pitch[i];
        p_sq += static_cast<double>(pr.pitch[i]) * pr.pitch[i];
        e_sum += pr.energy[i];
        e_sq += static_cast<double>(pr.energy[i]) * pr.energy[i];
        ++n;
      }
    }
    if (n > 0) {
      ds.pitch_mean = p_sum / static_cast<double>(n);
      ds.energy_mean = e_sum / static_cast<double>(n);
      ds.pitch_std = std::sqrt(std::max(
          1e-12, p_sq / static_cast<double>(n) - ds.pitch_mean * ds.pitch_mean));
      ds.energy_std = std::sqrt(std::max(
          1e-12,
          e_sq / static_cast<double>(n) - ds.energy_mean * ds.energy_mean));
    }
    double p_lo = 0.0, p_hi = 0.0, e_lo = 0.0, e_hi = 0.0;
    bool first = true;
    for (auto& item : ds.items) {
      auto& pr = item.example.prosody;
      for (size_t i = 0; i < pr.pitch.size(); ++i) {
        pr.pitch[i] = static_cast<float>(
            (pr.pitch[i] - ds.pitch_mean) / ds.pitch_std);
        pr.energy[i] = static_cast<float>(
            (pr.energy[i] - ds.energy_mean) / ds.energy_std);
      }
    }
    for (size_t idx : ds.train_indices) {
      const auto& pr = ds.items[idx].example.prosody;
      for (size_t i = 0; i < pr.pitch.size(); ++i) {
        if (first) {
          p_lo = p_hi = pr.pitch[i];
          e_lo = e_hi = pr.energy[i];
          first = false;
        } else {
          p_lo = std::min(p_lo, static_cast<double>(pr.pitch[i]));
          p_hi = std::max(p_hi, static_cast<double>(pr.pitch[i]));
          e_lo = std::min(e_lo, static_cast<double>(pr.energy[i]));
          e_hi = std::max(e_hi, static_cast<double>(pr.energy[i]));
        }
      }
    }
    const double p_pad = 0.05 * (p_hi - p_lo);
    const double e_pad = 0.05 * (e_hi - e_lo);
    ds.pitch_range = QuantRange{p_lo - p_pad, p_hi + p_pad};
    ds.energy_range = QuantRange{e_lo - e_pad, e_hi + e_pad};
  }
  return ds;
}

Dataset Dataset::LoadFromDir(const std::string& corpus_dir) {
  return Load(LoadManifest((fs::path(corpus_dir) / "manifest.txt").string()));
}

}  // namespace nns
