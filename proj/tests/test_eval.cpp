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

#include <cmath>

#include "corpus/corpus.hpp"
#include "eval/mcd.hpp"
#include "eval/sweeps.hpp"
#include "pipeline/dataset.hpp"
#include "testutil.hpp"
#include "util/error.hpp"

using namespace nns;

namespace {

Eigen::MatrixXd RandomLogMel(Rng& rng, Eigen::Index frames, Eigen::Index m) {
  Eigen::MatrixXd x(frames, m);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.Normal();
  return x;
}

// Independent cepstra implementation for the oracle comparison.
Eigen::MatrixXd OracleCepstra(const Eigen::MatrixXd& log_mel, int k_max) {
  const Eigen::Index T = log_mel.rows();
  const Eigen::Index M = log_mel.cols();
  Eigen::MatrixXd out(T, k_max);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (int k = 1; k <= k_max; ++k) {
      double acc = 0.0;
      for (Eigen::Index m = 0; m < M; ++m) {
        acc += log_mel(t, m) *
               std::cos(M_PI * (static_cast<double>(m) + 0.5) * k /
                        static_cast<double>(M));
      }
      out(t, k - 1) = acc * std::sqrt(2.0 / static_cast<double>(M));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("mcd identities") {
  Rng rng(3);
  const Eigen::MatrixXd x = RandomLogMel(rng, 12, 20);
  McdConfig cfg;
  cfg.alignment = McdConfig::Alignment::kNone;
  CHECK(Mcd(x, x, cfg) == 0.0);
  cfg.alignment = McdConfig::Alignment::kDtw;
  CHECK(Mcd(x, x, cfg) == 0.0);
}

TEST_CASE("single frame, unit difference in one cepstral coefficient") {
  // Perturbing the log-mel frame by the k-th orthonormal DCT basis vector
  // moves exactly that cepstral coefficient by 1.
  const Eigen::Index M = 20;
  McdConfig cfg;
  cfg.n_cepstra = 13;
  cfg.alignment = McdConfig::Alignment::kNone;

  Rng rng(5);
  Eigen::MatrixXd a = RandomLogMel(rng, 1, M);
  Eigen::MatrixXd b = a;
  const int k = 4;
  const double norm = std::sqrt(2.0 / static_cast<double>(M));
  for (Eigen::Index m = 0; m < M; ++m) {
    b(0, m) += norm * std::cos(M_PI * (static_cast<double>(m) + 0.5) * k /
                               static_cast<double>(M));
  }
  const double expected = 10.0 / std::log(10.0) * std::sqrt(2.0);
  CHECK(Mcd(a, b, cfg) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(expected == doctest::Approx(6.1415).epsilon(1e-4));
}

TEST_CASE("mcd matches a naive double-loop oracle without alignment") {
  Rng rng(7);
  McdConfig cfg;
  cfg.alignment = McdConfig::Alignment::kNone;
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd a = RandomLogMel(rng, 9, 24);
    const Eigen::MatrixXd b = RandomLogMel(rng, 9, 24);
    const Eigen::MatrixXd ca = OracleCepstra(a, cfg.n_cepstra);
    const Eigen::MatrixXd cb = OracleCepstra(b, cfg.n_cepstra);
    double acc = 0.0;
    for (Eigen::Index t = 0; t < 9; ++t) {
      double frame = 0.0;
      for (int kk = 0; kk < cfg.n_cepstra; ++kk) {
        frame += (ca(t, kk) - cb(t, kk)) * (ca(t, kk) - cb(t, kk));
      }
      acc += std::sqrt(frame);
    }
    const double oracle = 10.0 / std::log(10.0) * std::sqrt(2.0) * acc / 9.0;
    CHECK(std::abs(Mcd(a, b, cfg) - oracle) < 1e-9);
  }
}

TEST_CASE("mcd symmetry and nonnegativity without alignment") {
  Rng rng(9);
  McdConfig cfg;
  cfg.alignment = McdConfig::Alignment::kNone;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd a = RandomLogMel(rng, 6, 16);
    const Eigen::MatrixXd b = RandomLogMel(rng, 6, 16);
    const double ab = Mcd(a, b, cfg);
    const double ba = Mcd(b, a, cfg);
    CHECK(ab >= 0.0);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
  }
}

TEST_CASE("dtw alignment handles length mismatch") {
  Rng rng(11);
  const Eigen::MatrixXd a = RandomLogMel(rng, 10, 16);
  // b doubles every frame of a: content identical under alignment.
  Eigen::MatrixXd b(20, 16);
  for (Eigen::Index t = 0; t < 10; ++t) {
    b.row(2 * t) = a.row(t);
    b.row(2 * t + 1) = a.row(t);
  }
  McdConfig dtw;
  dtw.alignment = McdConfig::Alignment::kDtw;
  CHECK(Mcd(a, b, dtw) == doctest::Approx(0.0).epsilon(1e-12));

  McdConfig none;
  none.alignment = McdConfig::Alignment::kNone;
  CHECK_THROWS_AS(Mcd(a, b, none), Error);

  // Different content stays positive under DTW.
  const Eigen::MatrixXd c = RandomLogMel(rng, 14, 16);
  CHECK(Mcd(a, c, dtw) > 0.0);
}

TEST_CASE("mcd requires matching audio configs") {
  Rng rng(13);
  MelSpectrogram a, b;
  a.config.n_mels = 16;
  b.config = a.config;
  b.config.sample_rate = 16000;
  a.frames = RandomLogMel(rng, 4, 16).cast<float>();
  b.frames = a.frames;
  CHECK_THROWS_AS(Mcd(a, b, McdConfig{}), Error);
}

TEST_CASE("csv schema") {
  SweepResult result;
  result.rows.push_back(SweepRow{"0.05", 8.9, 0.49, 16});
  result.rows.push_back(SweepRow{"0.0005", 8.38, 0.53, 16});
  const std::string csv = SweepToCsv(result);
  CHECK(csv.find("param,mean_mcd_db,std_mcd_db,n\n") == 0);
  CHECK(csv.find("0.05,8.900000,0.490000,16\n") != std::string::npos);
  CHECK(csv.find("0.0005,8.380000,0.530000,16\n") != std::string::npos);
}

namespace {

struct SweepFixture {
  std::string corpus_dir;
  Dataset dataset;
  TrainConfig config;

  SweepFixture() {
    CorpusSpec spec;
    spec.n_speakers = 4;
    spec.utterances_per_speaker = 6;
    spec.phoneme_vocab_size = 10;
    spec.seed = 19;
    spec.unseen_speaker_fraction = 0.25;
    corpus_dir = nns::test::TempDir("eval_sweep_corpus");
    GenerateCorpus(spec, corpus_dir);
    dataset = Dataset::LoadFromDir(corpus_dir);

    config.stage1_steps = 10;
    config.stage2_steps = 20;
    config.batch_size = 4;
    config.seed = 3;
    config.model.vocab_size = dataset.vocab_size;
    config.model.n_train_speakers =
        static_cast<int>(dataset.train_speakers.size());
    config.model.n_mels = dataset.audio.n_mels;
    config.model.d_x = 16;
    config.model.d_c = 16;
    config.model.d_z = 8;
    config.model.d_s = 16;
    config.model.mlp_hidden = 24;
    config.model.ffn_dim = 24;
    config.model.adaptor_dim = 16;
    config.model.conv_channels = 12;
    config.model.prosody_bins = 16;
  }
};

}  // namespace

TEST_CASE("sweeps: row structure, determinism, consistency") {
  SweepFixture fx;

  SUBCASE("gamma grid produces one row per value; duplicates identical") {
    const SweepResult result = SweepGamma({0.05, 0.005, 0.05}, fx.config,
                                          fx.dataset, McdConfig{});
    REQUIRE(result.rows.size() == 3);
    CHECK(result.rows[0].param == "0.05");
    CHECK(result.rows[1].param == "0.005");
    for (const auto& row : result.rows) CHECK(row.n > 0);
    // Same gamma, same seed -> identical cells.
    CHECK(result.rows[0].mean_mcd_db == result.rows[2].mean_mcd_db);
    CHECK(result.rows[0].std_mcd_db == result.rows[2].std_mcd_db);

    CHECK_THROWS_AS(
        SweepGamma({-0.1}, fx.config, fx.dataset, McdConfig{}), Error);
  }

  SUBCASE("adaption sweep: k=1 row equals a direct evaluation") {
    Model model(fx.config.model);
    model.Init(fx.config.seed);
    Train(model, fx.config, fx.dataset, "");

    const SweepResult sweep =
        SweepAdaption({1, 2}, model, fx.dataset, McdConfig{});
    REQUIRE(sweep.rows.size() == 2);
    const UnseenEvalStats direct =
        EvaluateUnseenMcd(model, fx.dataset, McdConfig{}, 1);
    CHECK(sweep.rows[0].mean_mcd_db == direct.mean);
    CHECK(sweep.rows[0].n == direct.n);
  }

  SUBCASE("ablation: full mode equals a plain train+evaluate run") {
    const SweepRow full =
        RunAblation(AblationMode::kFull, fx.config, fx.dataset, McdConfig{});
    Model model(fx.config.model);
    model.Init(fx.config.seed);
    Train(model, fx.config, fx.dataset, "");
    const UnseenEvalStats direct =
        EvaluateUnseenMcd(model, fx.dataset, McdConfig{}, 1);
    CHECK(full.param == "full");
    CHECK(full.mean_mcd_db == direct.mean);

    const SweepRow content = RunAblation(AblationMode::kContentAdd, fx.config,
                                         fx.dataset, McdConfig{});
    const SweepRow nospk = RunAblation(AblationMode::kNoSpeakerPredictor,
                                       fx.config, fx.dataset, McdConfig{});
    CHECK(content.param == "content_add");
    CHECK(nospk.param == "no_spk_pred");
    CHECK(content.n > 0);
    CHECK(nospk.n > 0);
  }

  SUBCASE("csv outputs are deterministic functions of seed and config") {
    const SweepResult a =
        SweepGamma({0.005}, fx.config, fx.dataset, McdConfig{});
    const SweepResult b =
        SweepGamma({0.005}, fx.config, fx.dataset, McdConfig{});
    CHECK(SweepToCsv(a) == SweepToCsv(b));
  }
}
