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

#include "nnspeech/nnspeech.h"

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "corpus/corpus.hpp"
#include "data/matio.hpp"
#include "eval/mcd.hpp"
#include "eval/sweeps.hpp"
#include "pipeline/checkpoint.hpp"
#include "pipeline/dataset.hpp"
#include "pipeline/synthesize.hpp"
#include "pipeline/trainer.hpp"
#include "util/error.hpp"

namespace {

thread_local std::string g_last_error;

nns_status ToStatus(const nns::Error& e) {
  g_last_error = e.what();
  switch (e.kind()) {
    case nns::ErrorKind::kInvalidArgument: return NNS_ERR_INVALID_ARGUMENT;
    case nns::ErrorKind::kIo: return NNS_ERR_IO;
    case nns::ErrorKind::kRuntime: return NNS_ERR_RUNTIME;
  }
  return NNS_ERR_RUNTIME;
}

template <typename Fn>
nns_status Guard(Fn&& fn) {
  try {
    fn();
    return NNS_OK;
  } catch (const nns::Error& e) {
    return ToStatus(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return NNS_ERR_RUNTIME;
  }
}

nns_status RequireArg(bool ok, const char* message) {
  if (ok) return NNS_OK;
  g_last_error = message;
  return NNS_ERR_INVALID_ARGUMENT;
}

// Loads a training config file with optional override lines.
nns::TrainConfig LoadTrainConfig(const char* config_path,
                                 const char* extra_config) {
  nns::KvFile kv = nns::KvFile::Load(config_path);
  if (extra_config != nullptr && extra_config[0] != '\0') {
    for (const auto& [k, v] : nns::KvFile::Parse(extra_config).entries()) {
      kv.Set(k, v);
    }
  }
  return nns::TrainConfig::FromKv(kv);
}

void BindDataset(nns::TrainConfig& config, const nns::Dataset& dataset) {
  config.model.vocab_size = dataset.vocab_size;
  config.model.n_train_speakers =
      static_cast<int>(dataset.train_speakers.size());
  config.model.n_mels = dataset.audio.n_mels;
}

}  // namespace

struct nns_model {
  nns::Checkpoint checkpoint;
};

extern "C" {

const char* nns_last_error(void) { return g_last_error.c_str(); }

const char* nns_version(void) { return "nnspeech 1.0.0"; }

nns_status nns_corpus_generate(const char* spec_path, const char* out_dir) {
  if (auto s = RequireArg(spec_path && out_dir, "null argument")) return s;
  return Guard([&] {
    const nns::CorpusSpec spec =
        nns::CorpusSpec::FromKv(nns::KvFile::Load(spec_path));
    nns::GenerateCorpus(spec, out_dir);
  });
}

nns_status nns_train(const char* config_path, const char* corpus_dir,
                     const char* out_dir, const char* extra_config) {
  if (auto s = RequireArg(config_path && corpus_dir && out_dir,
                          "null argument")) {
    return s;
  }
  return Guard([&] {
    nns::TrainConfig config = LoadTrainConfig(config_path, extra_config);
    const nns::Dataset dataset = nns::Dataset::LoadFromDir(corpus_dir);
    BindDataset(config, dataset);
    nns::Model model(config.model);
    model.Init(config.seed);
    nns::Train(model, config, dataset, out_dir);
  });
}

nns_status nns_model_load(const char* checkpoint_path, nns_model** out_model) {
  if (auto s = RequireArg(checkpoint_path && out_model, "null argument")) {
    return s;
  }
  return Guard([&] {
    auto handle = std::make_unique<nns_model>();
    handle->checkpoint = nns::LoadCheckpoint(checkpoint_path);
    *out_model = handle.release();
  });
}

void nns_model_free(nns_model* model) { delete model; }

nns_status nns_model_step(const nns_model* model, int64_t* out_step) {
  if (auto s = RequireArg(model && out_step, "null argument")) return s;
  *out_step = model->checkpoint.step;
  return NNS_OK;
}

nns_status nns_model_vocab_size(const nns_model* model, int32_t* out_vocab) {
  if (auto s = RequireArg(model && out_vocab, "null argument")) return s;
  *out_vocab = model->checkpoint.config.vocab_size;
  return NNS_OK;
}

nns_status nns_model_synthesize(nns_model* model, const int32_t* phoneme_ids,
                                size_t n_phonemes,
                                const char* const* reference_mel_paths,
                                size_t n_references,
                                const nns_synthesize_options* options,
                                const char* out_mel_path) {
  if (auto s = RequireArg(model && phoneme_ids && reference_mel_paths &&
                              out_mel_path,
                          "null argument")) {
    return s;
  }
  if (auto s = RequireArg(n_phonemes > 0, "phoneme sequence is empty")) {
    return s;
  }
  if (auto s = RequireArg(n_references > 0, "no reference mels given")) {
    return s;
  }
  return Guard([&] {
    nns::PhonemeSequence ph;
    ph.ids.assign(phoneme_ids, phoneme_ids + n_phonemes);
    std::vector<nns::MelSpectrogram> refs;
    refs.reserve(n_references);
    for (size_t i = 0; i < n_references; ++i) {
      refs.push_back(nns::LoadMel(reference_mel_paths[i]));
    }
    nns::SynthesizeOptions opts;
    if (options != nullptr) {
      opts.sample = options->sample != 0;
      opts.seed = options->seed;
      opts.average_s_hat = options->average_s_hat != 0;
    }
    const nns::SynthesisResult result =
        nns::Synthesize(*model->checkpoint.model, ph, refs, opts);
    nns::SaveMel(out_mel_path, result.mel);
  });
}

nns_status nns_eval_mcd(const char* ref_mel_path, const char* syn_mel_path,
                        const nns_mcd_options* options, double* out_mcd_db) {
  if (auto s = RequireArg(ref_mel_path && syn_mel_path && out_mcd_db,
                          "null argument")) {
    return s;
  }
  return Guard([&] {
    nns::McdConfig cfg;
    if (options != nullptr) {
      if (options->n_cepstra > 0) cfg.n_cepstra = options->n_cepstra;
      cfg.alignment = options->use_dtw != 0
                          ? nns::McdConfig::Alignment::kDtw
                          : nns::McdConfig::Alignment::kNone;
      if (options->dtw_band_fraction > 0.0) {
        cfg.dtw_band_fraction = options->dtw_band_fraction;
      }
    }
    *out_mcd_db =
        nns::Mcd(nns::LoadMel(ref_mel_path), nns::LoadMel(syn_mel_path), cfg);
  });
}

nns_status nns_mel_info(const char* mel_path, int64_t* out_frames,
                        int64_t* out_bands) {
  if (auto s = RequireArg(mel_path && out_frames && out_bands,
                          "null argument")) {
    return s;
  }
  return Guard([&] {
    const nns::MelSpectrogram mel = nns::LoadMel(mel_path);
    *out_frames = mel.frames.rows();
    *out_bands = mel.frames.cols();
  });
}

nns_status nns_sweep_gamma(const char* config_path, const char* corpus_dir,
                           const double* gammas, size_t n_gammas,
                           const char* extra_config,
                           const char* out_csv_path) {
  if (auto s = RequireArg(config_path && corpus_dir && gammas && out_csv_path,
                          "null argument")) {
    return s;
  }
  if (auto s = RequireArg(n_gammas > 0, "gamma grid is empty")) return s;
  return Guard([&] {
    nns::TrainConfig config = LoadTrainConfig(config_path, extra_config);
    const nns::Dataset dataset = nns::Dataset::LoadFromDir(corpus_dir);
    BindDataset(config, dataset);
    const std::vector<double> grid(gammas, gammas + n_gammas);
    const nns::SweepResult result =
        nns::SweepGamma(grid, config, dataset, nns::McdConfig{});
    nns::WriteSweepCsv(out_csv_path, result);
  });
}

nns_status nns_sweep_adaption(const char* checkpoint_path,
                              const char* corpus_dir, const int32_t* ks,
                              size_t n_ks, const char* out_csv_path) {
  if (auto s = RequireArg(checkpoint_path && corpus_dir && ks && out_csv_path,
                          "null argument")) {
    return s;
  }
  if (auto s = RequireArg(n_ks > 0, "k grid is empty")) return s;
  return Guard([&] {
    nns::Checkpoint ckpt = nns::LoadCheckpoint(checkpoint_path);
    const nns::Dataset dataset = nns::Dataset::LoadFromDir(corpus_dir);
    std::vector<int> grid(ks, ks + n_ks);
    const nns::SweepResult result =
        nns::SweepAdaption(grid, *ckpt.model, dataset, nns::McdConfig{});
    nns::WriteSweepCsv(out_csv_path, result);
  });
}

nns_status nns_ablate(const char* const* modes, size_t n_modes,
                      const char* config_path, const char* corpus_dir,
                      const char* extra_config, const char* out_csv_path) {
  if (auto s = RequireArg(modes && config_path && corpus_dir && out_csv_path,
                          "null argument")) {
    return s;
  }
  if (auto s = RequireArg(n_modes > 0, "mode list is empty")) return s;
  return Guard([&] {
    nns::TrainConfig config = LoadTrainConfig(config_path, extra_config);
    const nns::Dataset dataset = nns::Dataset::LoadFromDir(corpus_dir);
    BindDataset(config, dataset);
    nns::SweepResult result;
    for (size_t i = 0; i < n_modes; ++i) {
      const nns::AblationMode mode = nns::AblationModeFromName(modes[i]);
      result.rows.push_back(
          nns::RunAblation(mode, config, dataset, nns::McdConfig{}));
    }
    nns::WriteSweepCsv(out_csv_path, result);
  });
}

}  // extern "C"
