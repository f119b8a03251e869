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

#include "model/synthesis.hpp"
#include "testutil.hpp"
#include "util/error.hpp"

using namespace nns;

namespace {

SpeakerEmbedding RandomSpeaker(Rng& rng, Eigen::Index d) {
  SpeakerEmbedding s;
  s.vector.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) s.vector(i) = rng.Normal();
  return s;
}

Eigen::MatrixXd RandomMatrix(Rng& rng, Eigen::Index r, Eigen::Index c,
                             double scale = 1.0) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = scale * rng.Normal();
  }
  return m;
}

}  // namespace

TEST_CASE("length regulation expands each position in order") {
  const std::vector<int32_t> durations = {2, 3, 1};
  const std::vector<int> idx = ExpandIndex(durations);
  CHECK(idx == std::vector<int>{0, 0, 1, 1, 1, 2});
}

TEST_CASE("ground-truth durations drive the frame count") {
  Rng rng(3);
  VarianceAdaptor adaptor(4, 6, 8, 16);
  adaptor.Init(rng);
  adaptor.pitch_range = QuantRange{-2.0, 2.0};
  adaptor.energy_range = QuantRange{-2.0, 2.0};

  ProsodyTargets targets;
  targets.durations = {2, 3};
  targets.pitch = {0.5f, -0.5f};
  targets.energy = {0.1f, 0.2f};

  const Eigen::MatrixXd z_in = RandomMatrix(rng, 2, 4);
  const SpeakerEmbedding s = RandomSpeaker(rng, 6);
  auto [frames, pred] = adaptor.Apply(z_in, s, &targets);
  CHECK(frames.h.rows() == 5);
  CHECK(frames.h.cols() == 8);
  CHECK(pred.log_durations.size() == 2);
}

TEST_CASE("zero adaptor predicts one frame per phoneme at inference") {
  Rng rng(5);
  VarianceAdaptor adaptor(4, 6, 8, 16);
  for (auto* p : adaptor.Params()) p->value.setZero();
  adaptor.pitch_range = QuantRange{-2.0, 2.0};
  adaptor.energy_range = QuantRange{-2.0, 2.0};

  const Eigen::MatrixXd z_in = RandomMatrix(rng, 3, 4);
  const SpeakerEmbedding s = RandomSpeaker(rng, 6);
  auto [frames, pred] = adaptor.Apply(z_in, s, nullptr);
  CHECK(pred.log_durations.cwiseAbs().maxCoeff() == 0.0);
  // round(exp(0)) = 1 frame per position.
  CHECK(frames.h.rows() == 3);
}

TEST_CASE("duplicating a phoneme position duplicates its frame block") {
  Rng rng(7);
  VarianceAdaptor adaptor(4, 6, 8, 16);
  adaptor.Init(rng);
  adaptor.pitch_range = QuantRange{-2.0, 2.0};
  adaptor.energy_range = QuantRange{-2.0, 2.0};

  ProsodyTargets targets;
  targets.durations = {2, 3};
  targets.pitch = {0.5f, -0.5f};
  targets.energy = {0.1f, 0.2f};
  Eigen::MatrixXd z_in = RandomMatrix(rng, 2, 4);
  const SpeakerEmbedding s = RandomSpeaker(rng, 6);
  auto [base, base_pred] = adaptor.Apply(z_in, s, &targets);

  // Duplicate position 1.
  ProsodyTargets dup = targets;
  dup.durations = {2, 3, 3};
  dup.pitch = {0.5f, -0.5f, -0.5f};
  dup.energy = {0.1f, 0.2f, 0.2f};
  Eigen::MatrixXd z_dup(3, 4);
  z_dup.row(0) = z_in.row(0);
  z_dup.row(1) = z_in.row(1);
  z_dup.row(2) = z_in.row(1);
  auto [expanded, dup_pred] = adaptor.Apply(z_dup, s, &dup);

  REQUIRE(expanded.h.rows() == 8);
  // Original block (frames 2..4) appears again as frames 5..7.
  CHECK((expanded.h.middleRows(2, 3) - base.h.middleRows(2, 3)).norm() <
        1e-12);
  CHECK((expanded.h.middleRows(5, 3) - expanded.h.middleRows(2, 3)).norm() <
        1e-12);
}

TEST_CASE("decoder shape contract and zero head") {
  Rng rng(9);
  MelDecoder decoder(8, 16, 6, 10, 2, 2);
  decoder.Init(rng);

  FrameHidden h{RandomMatrix(rng, 5, 8)};
  const SpeakerEmbedding s = RandomSpeaker(rng, 6);
  const Eigen::MatrixXd mel = decoder.Apply(h, s);
  CHECK(mel.rows() == 5);
  CHECK(mel.cols() == 10);

  decoder.head.weight.value.setZero();
  decoder.head.bias.value.setZero();
  const Eigen::MatrixXd zero_mel = decoder.Apply(h, s);
  CHECK(zero_mel.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("speaker embedding changes the decoded mel") {
  Rng rng(11);
  MelDecoder decoder(8, 16, 6, 10, 2, 2);
  decoder.Init(rng);
  FrameHidden h{RandomMatrix(rng, 5, 8)};
  const SpeakerEmbedding a = RandomSpeaker(rng, 6);
  const SpeakerEmbedding b = RandomSpeaker(rng, 6);
  const Eigen::MatrixXd mel_a = decoder.Apply(h, a);
  const Eigen::MatrixXd mel_b = decoder.Apply(h, b);
  CHECK((mel_a - mel_b).cwiseAbs().mean() > 0.0);
}

TEST_CASE("end-to-end shape: output frames equal the duration sum") {
  Rng rng(13);
  VarianceAdaptor adaptor(4, 6, 8, 16);
  adaptor.Init(rng);
  adaptor.pitch_range = QuantRange{-2.0, 2.0};
  adaptor.energy_range = QuantRange{-2.0, 2.0};
  MelDecoder decoder(8, 16, 6, 10, 2, 2);
  decoder.Init(rng);

  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index L = 1 + static_cast<Eigen::Index>(rng.UniformInt(6));
    ProsodyTargets targets;
    int64_t total = 0;
    for (Eigen::Index i = 0; i < L; ++i) {
      const int32_t d = 1 + static_cast<int32_t>(rng.UniformInt(5));
      targets.durations.push_back(d);
      targets.pitch.push_back(static_cast<float>(rng.Normal()));
      targets.energy.push_back(static_cast<float>(rng.Normal()));
      total += d;
    }
    const Eigen::MatrixXd z_in = RandomMatrix(rng, L, 4);
    const SpeakerEmbedding s = RandomSpeaker(rng, 6);
    auto [frames, pred] = adaptor.Apply(z_in, s, &targets);
    const Eigen::MatrixXd mel = decoder.Apply(frames, s);
    CHECK(mel.rows() == total);
  }
}

TEST_CASE("full synthesis path gradient check") {
  Rng rng(15);
  VarianceAdaptor adaptor(4, 6, 8, 16);
  adaptor.Init(rng);
  adaptor.pitch_range = QuantRange{-2.0, 2.0};
  adaptor.energy_range = QuantRange{-2.0, 2.0};
  MelDecoder decoder(8, 16, 6, 10, 2, 2);
  decoder.Init(rng);

  ProsodyTargets targets;
  targets.durations = {2, 1, 3};
  targets.pitch = {0.5f, -0.5f, 0.2f};
  targets.energy = {0.1f, 0.2f, -0.3f};
  const Eigen::MatrixXd z_in = RandomMatrix(rng, 3, 4, 0.7);
  const Eigen::MatrixXd s_in = RandomMatrix(rng, 1, 6, 0.7);
  const Eigen::MatrixXd mel_target = RandomMatrix(rng, 6, 10, 0.5);

  auto forward = [&](bool backward) {
    Tape t(backward);
    VarianceOutputs var =
        adaptor.Forward(t, t.Constant(z_in), t.Constant(s_in), &targets);
    Expr mel = decoder.Forward(t, var.frames, t.Constant(s_in));
    Expr loss = t.Add(
        t.Mse(mel, t.Constant(mel_target)),
        t.Add(t.MeanAll(t.Mul(var.log_durations, var.log_durations)),
              t.Add(t.MeanAll(t.Mul(var.pitch, var.pitch)),
                    t.MeanAll(t.Mul(var.energy, var.energy)))));
    if (backward) {
      t.Backward(loss);
      t.AccumulateParamGrads();
    }
    return t.ScalarValue(loss);
  };

  std::vector<Param*> params;
  for (auto* p : adaptor.Params()) params.push_back(p);
  for (auto* p : decoder.Params()) params.push_back(p);

  auto res = nns::test::CheckGradients(
      params, [&] { return forward(false); },
      [&] {
        nns::test::ZeroGrads(params);
        forward(true);
        return nns::test::CollectGrads(params);
      },
      rng, 3);
  CHECK(res.max_rel_error < 1e-4);
  CHECK(res.checks >= 20);
}
