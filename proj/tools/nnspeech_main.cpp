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
// Command-line front end. Everything goes through the C API in
// include/nnspeech/nnspeech.h; this file does argument parsing and file
// plumbing only.
//
// Exit codes: 0 success, 1 validation/usage error, 2 runtime failure.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nnspeech/nnspeech.h"

namespace {

namespace fs = std::filesystem;

int StatusToExit(nns_status s) {
  switch (s) {
    case NNS_OK: return 0;
    case NNS_ERR_INVALID_ARGUMENT: return 1;
    case NNS_ERR_IO: return 2;
    case NNS_ERR_RUNTIME: return 2;
  }
  return 2;
}

int Fail(nns_status s) {
  std::fprintf(stderr, "error: %s\n", nns_last_error());
  return StatusToExit(s);
}

std::vector<int32_t> ReadPhonemeFile(const std::string& path, bool* ok) {
  *ok = true;
  std::ifstream in(path);
  if (!in) {
    std::fprintf(stderr, "error: cannot open phoneme file: %s\n",
                 path.c_str());
    *ok = false;
    return {};
  }
  std::vector<int32_t> ids;
  int64_t v;
  while (in >> v) ids.push_back(static_cast<int32_t>(v));
  if (ids.empty()) {
    std::fprintf(stderr, "error: phoneme file is empty: %s\n", path.c_str());
    *ok = false;
  }
  return ids;
}

std::string SeedOverride(bool has_seed, uint64_t seed) {
  if (!has_seed) return "";
  std::ostringstream out;
  out << "seed = " << seed << "\n";
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nnspeech: speaker-guided conditional-VAE text-to-mel tools"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  uint64_t seed = 0;
  bool has_seed = false;
  app.add_option("--seed", seed, "Override the config seed")
      ->each([&](const std::string&) { has_seed = true; });

  // corpus generate
  auto* corpus = app.add_subcommand("corpus", "Synthetic corpus commands");
  corpus->require_subcommand(1);
  auto* corpus_gen =
      corpus->add_subcommand("generate", "Generate a synthetic corpus");
  std::string corpus_spec, corpus_out;
  corpus_gen->add_option("--spec", corpus_spec, "Corpus spec file")
      ->required();
  corpus_gen->add_option("--out", corpus_out, "Output directory")->required();

  // train
  auto* train = app.add_subcommand("train", "Train a model on a corpus");
  std::string train_config, train_corpus, train_out;
  train->add_option("--config", train_config, "Training config file")
      ->required();
  train->add_option("--corpus", train_corpus, "Corpus directory")->required();
  train->add_option("--out", train_out, "Output directory")->required();

  // synthesize
  auto* synth = app.add_subcommand(
      "synthesize", "Zero-shot synthesis from reference mels");
  std::string synth_ckpt, synth_phonemes, synth_out;
  std::vector<std::string> synth_refs;
  bool synth_sample = false, synth_avg_shat = false;
  synth->add_option("--checkpoint", synth_ckpt, "Model checkpoint")
      ->required();
  synth->add_option("--phonemes", synth_phonemes,
                    "Text file of whitespace-separated phoneme ids")
      ->required();
  synth->add_option("--ref", synth_refs,
                    "Reference mel file (repeat for k-shot)")
      ->required();
  synth->add_option("--out", synth_out, "Output mel file")->required();
  synth->add_flag("--sample", synth_sample,
                  "Sample the latent instead of using the posterior mean");
  synth->add_flag("--avg-shat", synth_avg_shat,
                  "Average predicted speaker embeddings across references");

  // eval mcd
  auto* eval = app.add_subcommand("eval", "Objective evaluation");
  eval->require_subcommand(1);
  auto* eval_mcd = eval->add_subcommand("mcd", "Mel-cepstral distortion");
  std::string mcd_ref, mcd_syn;
  int mcd_cepstra = 13;
  bool mcd_no_dtw = false;
  eval_mcd->add_option("--ref", mcd_ref, "Reference mel file")->required();
  eval_mcd->add_option("--syn", mcd_syn, "Synthesized mel file")->required();
  eval_mcd->add_option("--cepstra", mcd_cepstra, "Cepstral order");
  eval_mcd->add_flag("--no-dtw", mcd_no_dtw, "Disable DTW alignment");

  // sweep gamma | adaption
  auto* sweep = app.add_subcommand("sweep", "Experiment sweeps");
  sweep->require_subcommand(1);
  auto* sweep_gamma =
      sweep->add_subcommand("gamma", "KL-weight sweep (trains per value)");
  std::string sg_config, sg_corpus, sg_out;
  std::vector<double> sg_gammas{0.05, 0.005, 0.0005};
  sweep_gamma->add_option("--config", sg_config, "Training config file")
      ->required();
  sweep_gamma->add_option("--corpus", sg_corpus, "Corpus directory")
      ->required();
  sweep_gamma->add_option("--out", sg_out, "Output directory")->required();
  sweep_gamma->add_option("--gammas", sg_gammas,
                          "Gamma grid (default 0.05 0.005 0.0005)");

  auto* sweep_adapt = sweep->add_subcommand(
      "adaption", "Adaption-count sweep on a trained checkpoint");
  std::string sa_ckpt, sa_corpus, sa_out;
  std::vector<int32_t> sa_ks{1, 2, 3, 4};
  sweep_adapt->add_option("--checkpoint", sa_ckpt, "Model checkpoint")
      ->required();
  sweep_adapt->add_option("--corpus", sa_corpus, "Corpus directory")
      ->required();
  sweep_adapt->add_option("--out", sa_out, "Output directory")->required();
  sweep_adapt->add_option("--k", sa_ks, "Reference counts (default 1 2 3 4)");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Architecture ablations");
  std::string ab_config, ab_corpus, ab_out;
  std::vector<std::string> ab_modes{"content_add", "no_spk_pred", "full"};
  ablate->add_option("--config", ab_config, "Training config file")
      ->required();
  ablate->add_option("--corpus", ab_corpus, "Corpus directory")->required();
  ablate->add_option("--out", ab_out, "Output directory")->required();
  ablate->add_option("--modes", ab_modes,
                     "Modes to run (content_add no_spk_pred full)");

  if (argc <= 1) {
    std::fprintf(stderr, "%s\n", app.help().c_str());
    return 1;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::printf("%s\n", app.help().c_str());
    return 0;
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "%s\n%s\n", e.what(), app.help().c_str());
    return 1;
  }

  const std::string seed_extra = SeedOverride(has_seed, seed);

  if (corpus_gen->parsed()) {
    const nns_status s =
        nns_corpus_generate(corpus_spec.c_str(), corpus_out.c_str());
    if (s != NNS_OK) return Fail(s);
    std::printf("corpus written to %s\n", corpus_out.c_str());
    return 0;
  }

  if (train->parsed()) {
    const nns_status s =
        nns_train(train_config.c_str(), train_corpus.c_str(),
                  train_out.c_str(), seed_extra.empty() ? nullptr
                                                        : seed_extra.c_str());
    if (s != NNS_OK) return Fail(s);
    std::printf("training complete; checkpoints under %s\n",
                train_out.c_str());
    return 0;
  }

  if (synth->parsed()) {
    bool ok;
    const std::vector<int32_t> ids = ReadPhonemeFile(synth_phonemes, &ok);
    if (!ok) return 1;
    nns_model* model = nullptr;
    nns_status s = nns_model_load(synth_ckpt.c_str(), &model);
    if (s != NNS_OK) return Fail(s);
    std::vector<const char*> refs;
    refs.reserve(synth_refs.size());
    for (const auto& r : synth_refs) refs.push_back(r.c_str());
    nns_synthesize_options opts{};
    opts.sample = synth_sample ? 1 : 0;
    opts.seed = seed;
    opts.average_s_hat = synth_avg_shat ? 1 : 0;
    s = nns_model_synthesize(model, ids.data(), ids.size(), refs.data(),
                             refs.size(), &opts, synth_out.c_str());
    nns_model_free(model);
    if (s != NNS_OK) return Fail(s);
    int64_t frames = 0, bands = 0;
    if (nns_mel_info(synth_out.c_str(), &frames, &bands) == NNS_OK) {
      std::printf("wrote %s (%lld frames x %lld bands)\n", synth_out.c_str(),
                  static_cast<long long>(frames),
                  static_cast<long long>(bands));
    }
    return 0;
  }

  if (eval_mcd->parsed()) {
    nns_mcd_options opts{};
    opts.n_cepstra = mcd_cepstra;
    opts.use_dtw = mcd_no_dtw ? 0 : 1;
    opts.dtw_band_fraction = 0.1;
    double mcd = 0.0;
    const nns_status s =
        nns_eval_mcd(mcd_ref.c_str(), mcd_syn.c_str(), &opts, &mcd);
    if (s != NNS_OK) return Fail(s);
    std::printf("mcd_db=%.6f\n", mcd);
    return 0;
  }

  if (sweep_gamma->parsed()) {
    std::error_code ec;
    fs::create_directories(sg_out, ec);
    const std::string csv = (fs::path(sg_out) / "sweep_gamma.csv").string();
    const nns_status s = nns_sweep_gamma(
        sg_config.c_str(), sg_corpus.c_str(), sg_gammas.data(),
        sg_gammas.size(), seed_extra.empty() ? nullptr : seed_extra.c_str(),
        csv.c_str());
    if (s != NNS_OK) return Fail(s);
    std::printf("wrote %s\n", csv.c_str());
    return 0;
  }

  if (sweep_adapt->parsed()) {
    std::error_code ec;
    fs::create_directories(sa_out, ec);
    const std::string csv = (fs::path(sa_out) / "sweep_adaption.csv").string();
    const nns_status s =
        nns_sweep_adaption(sa_ckpt.c_str(), sa_corpus.c_str(), sa_ks.data(),
                           sa_ks.size(), csv.c_str());
    if (s != NNS_OK) return Fail(s);
    std::printf("wrote %s\n", csv.c_str());
    return 0;
  }

  if (ablate->parsed()) {
    std::error_code ec;
    fs::create_directories(ab_out, ec);
    const std::string csv = (fs::path(ab_out) / "ablation.csv").string();
    std::vector<const char*> modes;
    modes.reserve(ab_modes.size());
    for (const auto& m : ab_modes) modes.push_back(m.c_str());
    const nns_status s = nns_ablate(
        modes.data(), modes.size(), ab_config.c_str(), ab_corpus.c_str(),
        seed_extra.empty() ? nullptr : seed_extra.c_str(), csv.c_str());
    if (s != NNS_OK) return Fail(s);
    std::printf("wrote %s\n", csv.c_str());
    return 0;
  }

  std::fprintf(stderr, "%s\n", app.help().c_str());
  return 1;
}
