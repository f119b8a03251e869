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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "corpus/corpus.hpp"
#include "pipeline/checkpoint.hpp"
#include "pipeline/dataset.hpp"
#include "pipeline/synthesize.hpp"
#include "pipeline/trainer.hpp"
#include "testutil.hpp"
#include "util/error.hpp"

using namespace nns;
namespace fs = std::filesystem;

namespace {

// One shared toy corpus for the whole suite.
const Dataset& ToyDataset() {
  static const Dataset dataset = [] {
    CorpusSpec spec;
    spec.n_speakers = 4;
    spec.utterances_per_speaker = 6;
    spec.phoneme_vocab_size = 12;
    spec.seed = 11;
    spec.unseen_speaker_fraction = 0.25;
    const std::string dir = nns::test::TempDir("pipeline_corpus");
    GenerateCorpus(spec, dir);
    return Dataset::LoadFromDir(dir);
  }();
  return dataset;
}

TrainConfig ToyTrainConfig(const Dataset& ds) {
  TrainConfig cfg;
  cfg.stage1_steps = 3;
  cfg.stage2_steps = 3;
  cfg.batch_size = 4;
  cfg.seed = 5;
  cfg.model.vocab_size = ds.vocab_size;
  cfg.model.n_train_speakers = static_cast<int>(ds.train_speakers.size());
  cfg.model.n_mels = ds.audio.n_mels;
  // Desk-scale-but-smaller dims keep this suite fast.
  cfg.model.d_x = 16;
  cfg.model.d_c = 16;
  cfg.model.d_z = 8;
  cfg.model.d_s = 16;
  cfg.model.mlp_hidden = 24;
  cfg.model.ffn_dim = 24;
  cfg.model.adaptor_dim = 16;
  cfg.model.conv_channels = 12;
  cfg.model.prosody_bins = 16;
  return cfg;
}

MelSpectrogram ItemMel(const DatasetItem& item) {
  MelSpectrogram mel;
  mel.frames = item.example.mel.cast<float>();
  mel.config = item.audio;
  return mel;
}

}  // namespace

TEST_CASE("smoke training: loss decreases over 50 steps") {
  const Dataset& ds = ToyDataset();
  TrainConfig cfg = ToyTrainConfig(ds);
  cfg.stage1_steps = 25;
  cfg.stage2_steps = 25;
  // A 50-step toy run needs its warmup inside the run.
  cfg.warmup_steps = 5;
  cfg.learning_rate = 1e-3;
  Model model(cfg.model);
  model.Init(cfg.seed);
  const TrainResult result = Train(model, cfg, ds, "");
  REQUIRE(result.history.size() == 50);

  double tail = 0.0;
  for (size_t i = 45; i < 50; ++i) tail += result.history[i].total;
  tail /= 5.0;
  CHECK(tail < result.history.front().total);
  for (const auto& h : result.history) CHECK(std::isfinite(h.total));
}

TEST_CASE("stage 1 freezes the speaker predictor exactly") {
  const Dataset& ds = ToyDataset();
  TrainConfig cfg = ToyTrainConfig(ds);
  Model model(cfg.model);
  model.Init(cfg.seed);

  // Gradient norm of the speaker loss path is exactly zero in stage 1.
  const DatasetItem& item = ds.items[ds.train_indices[0]];
  Eigen::MatrixXd eps(
      static_cast<Eigen::Index>(item.example.phoneme_ids.size()),
      cfg.model.d_z);
  Rng rng(3);
  rng.NormalFill(eps.data(), static_cast<size_t>(eps.size()));
  for (auto* p : model.AllParams()) p->ZeroGrad();
  TrainStepExample(model, item.example, cfg.weights(),
                   /*include_speaker_loss=*/false, eps, 1.0,
                   /*do_backward=*/true);
  for (auto* p : model.speaker_predictor.Params()) {
    CHECK(p->grad.cwiseAbs().maxCoeff() == 0.0);
  }
  // With the speaker loss included the same path is live.
  for (auto* p : model.AllParams()) p->ZeroGrad();
  TrainStepExample(model, item.example, cfg.weights(), true, eps, 1.0, true);
  double norm = 0.0;
  for (auto* p : model.speaker_predictor.Params()) {
    norm += p->grad.squaredNorm();
  }
  CHECK(norm > 0.0);
}

TEST_CASE("stage boundary changes only the intended parameter groups") {
  const Dataset& ds = ToyDataset();
  TrainConfig cfg = ToyTrainConfig(ds);
  Model model(cfg.model);
  model.Init(cfg.seed);

  std::vector<Mat> predictor_before;
  for (auto* p : model.speaker_predictor.Params()) {
    predictor_before.push_back(p->value);
  }
  Mat table_before = model.speaker_table.value;

  int64_t boundary_checked = 0;
  Train(model, cfg, ds, "",
        [&](int64_t step, const LossBreakdown&) {
          if (step == cfg.stage1_steps) {
            // End of stage 1: the frozen predictor is bitwise untouched,
            // while trained groups have moved.
            auto params = model.speaker_predictor.Params();
            for (size_t i = 0; i < params.size(); ++i) {
              CHECK((params[i]->value - predictor_before[i]).cwiseAbs()
                        .maxCoeff() == 0.0);
            }
            CHECK((model.speaker_table.value - table_before).cwiseAbs()
                      .maxCoeff() > 0.0);
            ++boundary_checked;
          }
        });
  CHECK(boundary_checked == 1);

  // After stage 2 the predictor has moved too.
  double moved = 0.0;
  auto params = model.speaker_predictor.Params();
  for (size_t i = 0; i < params.size(); ++i) {
    moved += (params[i]->value - predictor_before[i]).cwiseAbs().maxCoeff();
  }
  CHECK(moved > 0.0);
}

TEST_CASE("fixed seed reproduces the loss history bitwise") {
  const Dataset& ds = ToyDataset();
  TrainConfig cfg = ToyTrainConfig(ds);
  cfg.stage1_steps = 8;
  cfg.stage2_steps = 8;

  const std::string dir_a = nns::test::TempDir("pipeline_det_a");
  const std::string dir_b = nns::test::TempDir("pipeline_det_b");

  Model model_a(cfg.model);
  model_a.Init(cfg.seed);
  const TrainResult ra = Train(model_a, cfg, ds, dir_a);

  Model model_b(cfg.model);
  model_b.Init(cfg.seed);
  const TrainResult rb = Train(model_b, cfg, ds, dir_b);

  REQUIRE(ra.history.size() == rb.history.size());
  for (size_t i = 0; i < ra.history.size(); ++i) {
    CHECK(ra.history[i].total == rb.history[i].total);  // bitwise
    CHECK(ra.history[i].mel == rb.history[i].mel);
  }

  // Log files byte-identical.
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  };
  CHECK(slurp(dir_a + "/train_log.txt") == slurp(dir_b + "/train_log.txt"));
}

TEST_CASE("checkpoint: round trip, step counter, mismatch error") {
  const Dataset& ds = ToyDataset();
  TrainConfig cfg = ToyTrainConfig(ds);
  const std::string dir = nns::test::TempDir("pipeline_ckpt");

  Model model(cfg.model);
  model.Init(cfg.seed);
  const TrainResult result = Train(model, cfg, ds, dir);
  REQUIRE(!result.final_checkpoint.empty());

  const Checkpoint loaded = LoadCheckpoint(result.final_checkpoint);
  CHECK(loaded.step == cfg.total_steps());
  CHECK(loaded.train_speakers == ds.train_speakers);
  CHECK(loaded.loss_history.size() == result.history.size());

  // Forward passes agree bitwise after the round trip.
  const DatasetItem& item = ds.items[ds.unseen_eval_indices[0]];
  PhonemeSequence ph;
  ph.ids.assign(item.example.phoneme_ids.begin(),
                item.example.phoneme_ids.end());
  const std::vector<MelSpectrogram> refs{ItemMel(item)};
  const SynthesisResult a = Synthesize(model, ph, refs);
  const SynthesisResult b = Synthesize(*loaded.model, ph, refs);
  REQUIRE(a.mel.frames.rows() == b.mel.frames.rows());
  CHECK(std::memcmp(a.mel.frames.data(), b.mel.frames.data(),
                    sizeof(float) * a.mel.frames.size()) == 0);

  // Mismatched config is an explicit error.
  TrainConfig other = cfg;
  other.model.d_z = cfg.model.d_z * 2;
  Model wrong(other.model);
  CHECK_THROWS_WITH_AS(
      LoadCheckpointInto(result.final_checkpoint, wrong),
      doctest::Contains("config"), Error);

  // Intermediate checkpoints record their own step.
  Model step_model(cfg.model);
  step_model.Init(1);
  SaveCheckpoint(dir + "/step3.nnsckpt", step_model, 3, ds.train_speakers, {});
  CHECK(LoadCheckpoint(dir + "/step3.nnsckpt").step == 3);
}

TEST_CASE("synthesize: k-shot averaging contracts") {
  const Dataset& ds = ToyDataset();
  TrainConfig cfg = ToyTrainConfig(ds);
  Model model(cfg.model);
  model.Init(cfg.seed);
  model.adaptor.pitch_range = ds.pitch_range;
  model.adaptor.energy_range = ds.energy_range;

  const DatasetItem& item = ds.items[ds.unseen_eval_indices[0]];
  const DatasetItem& other = ds.items[ds.unseen_eval_indices[1]];
  PhonemeSequence ph;
  ph.ids.assign(item.example.phoneme_ids.begin(),
                item.example.phoneme_ids.end());

  CHECK_THROWS_AS(Synthesize(model, ph, {}), Error);

  // k = 2 with identical references equals k = 1.
  const SynthesisResult one = Synthesize(model, ph, {ItemMel(item)});
  const SynthesisResult two =
      Synthesize(model, ph, {ItemMel(item), ItemMel(item)});
  CHECK((one.mel.frames - two.mel.frames).cwiseAbs().maxCoeff() < 1e-6f);

  // Averaging contract: the recognition input is the mean of the
  // per-reference encoder outputs.
  const SynthesisResult mixed =
      Synthesize(model, ph, {ItemMel(item), ItemMel(other)});
  RefVector manual;
  manual.x = 0.5 * (model.reference_encoder.Encode(ItemMel(item)).x +
                    model.reference_encoder.Encode(ItemMel(other)).x);
  const ContentSequence c = model.phoneme_encoder.Encode(ph);
  const GaussianSequence q = model.recognition.Apply(manual, c);
  CHECK((mixed.latent.z - q.mu).cwiseAbs().maxCoeff() < 1e-12);

  // Posterior-mean mode records zero noise; sampling records its draw.
  CHECK(one.latent.eps.cwiseAbs().maxCoeff() == 0.0);
  SynthesizeOptions sample_opts;
  sample_opts.sample = true;
  sample_opts.seed = 9;
  const SynthesisResult sampled = Synthesize(model, ph, {ItemMel(item)},
                                             sample_opts);
  CHECK(sampled.latent.eps.cwiseAbs().maxCoeff() > 0.0);
  const SynthesisResult sampled_again = Synthesize(model, ph, {ItemMel(item)},
                                                   sample_opts);
  CHECK((sampled.latent.eps - sampled_again.latent.eps).cwiseAbs()
            .maxCoeff() == 0.0);  // seed recorded and reproducible

  // avg-shat mode averages the predicted embeddings across references.
  SynthesizeOptions avg_opts;
  avg_opts.average_s_hat = true;
  const SynthesisResult avg = Synthesize(
      model, ph, {ItemMel(item), ItemMel(other)}, avg_opts);
  CHECK(avg.s_hat.source == SpeakerSource::kAveraged);
}

TEST_CASE("zero-shot contract: synthesis never reads the lookup table") {
  const Dataset& ds = ToyDataset();
  TrainConfig cfg = ToyTrainConfig(ds);
  Model model(cfg.model);
  model.Init(cfg.seed);

  const DatasetItem& item = ds.items[ds.unseen_eval_indices[0]];
  PhonemeSequence ph;
  ph.ids.assign(item.example.phoneme_ids.begin(),
                item.example.phoneme_ids.end());

  const int64_t before = model.speaker_table_reads();
  const SynthesisResult result = Synthesize(model, ph, {ItemMel(item)});
  CHECK(model.speaker_table_reads() == before);
  CHECK(result.s_hat.source == SpeakerSource::kPredicted);
  CHECK(result.mel.frames.cols() == cfg.model.n_mels);

  // Training does read it.
  (void)model.LookupSpeaker(0);
  CHECK(model.speaker_table_reads() == before + 1);
}

TEST_CASE("training aborts with the offending step on divergence") {
  const Dataset& ds = ToyDataset();
  TrainConfig cfg = ToyTrainConfig(ds);
  cfg.learning_rate = 1e18;  // guaranteed blow-up
  cfg.warmup_steps = 1;
  cfg.stage1_steps = 30;
  cfg.stage2_steps = 30;
  Model model(cfg.model);
  model.Init(cfg.seed);
  CHECK_THROWS_WITH_AS(Train(model, cfg, ds, ""),
                       doctest::Contains("step"), Error);
}

TEST_CASE("train config round trips through its file form") {
  const Dataset& ds = ToyDataset();
  TrainConfig cfg = ToyTrainConfig(ds);
  cfg.gamma = 0.005;
  cfg.seed = 17;
  const TrainConfig parsed =
      TrainConfig::FromKv(KvFile::Parse(cfg.ToKv().Serialize()));
  CHECK(parsed.stage1_steps == cfg.stage1_steps);
  CHECK(parsed.gamma == doctest::Approx(cfg.gamma));
  CHECK(parsed.seed == cfg.seed);
  CHECK(parsed.model == cfg.model);
}
