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

#include "model/encoders.hpp"
#include "testutil.hpp"
#include "util/error.hpp"

using namespace nns;

namespace {

MelSpectrogram RandomMel(Rng& rng, Eigen::Index frames, int n_mels = 20) {
  MelSpectrogram mel;
  mel.config.n_mels = n_mels;
  mel.frames.resize(frames, n_mels);
  for (Eigen::Index i = 0; i < mel.frames.size(); ++i) {
    mel.frames.data()[i] = static_cast<float>(rng.Normal());
  }
  return mel;
}

}  // namespace

TEST_CASE("reference encoder: fixed-width output for any frame count") {
  Rng rng(3);
  ReferenceEncoder enc(20, 16, 24, 5);
  enc.Init(rng);
  for (Eigen::Index frames : {13, 40, 111}) {
    const MelSpectrogram mel = RandomMel(rng, frames);
    const RefVector v = enc.Encode(mel);
    CHECK(v.x.size() == 24);
    CHECK(v.x.array().isFinite().all());
  }
}

TEST_CASE("reference encoder: tiling the input leaves the summary unchanged") {
  Rng rng(5);
  ReferenceEncoder enc(20, 16, 24, 5);
  enc.Init(rng);
  const MelSpectrogram mel = RandomMel(rng, 50);
  MelSpectrogram tiled;
  tiled.config = mel.config;
  tiled.frames.resize(100, 20);
  tiled.frames.topRows(50) = mel.frames;
  tiled.frames.bottomRows(50) = mel.frames;

  const RefVector a = enc.Encode(mel);
  const RefVector b = enc.Encode(tiled);
  CHECK((a.x - b.x).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("reference encoder: zero mel with zero biases gives a zero vector") {
  Rng rng(7);
  ReferenceEncoder enc(20, 16, 24, 5);
  enc.Init(rng);  // weights random, biases zero by default
  MelSpectrogram mel;
  mel.config.n_mels = 20;
  mel.frames = Eigen::MatrixXf::Zero(30, 20);
  const RefVector v = enc.Encode(mel);
  CHECK(v.x.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("reference encoder: too few frames is an error") {
  Rng rng(9);
  ReferenceEncoder enc(20, 16, 24, 5);
  enc.Init(rng);
  CHECK(enc.ReceptiveField() == 13);
  const MelSpectrogram mel = RandomMel(rng, 12);
  CHECK_THROWS_AS(enc.Encode(mel), Error);
}

TEST_CASE("phoneme encoder: shape and purity") {
  Rng rng(11);
  PhonemeEncoder enc(10, 16, 32, 2, 2);
  enc.Init(rng);

  PhonemeSequence one;
  one.ids = {3};
  const ContentSequence c1 = enc.Encode(one);
  CHECK(c1.c.rows() == 1);
  CHECK(c1.c.cols() == 16);

  PhonemeSequence seq;
  seq.ids = {1, 4, 2, 7};
  const ContentSequence a = enc.Encode(seq);
  const ContentSequence b = enc.Encode(seq);
  CHECK((a.c - b.c).norm() == 0.0);  // identical params, identical output

  PhonemeSequence oov;
  oov.ids = {1, 10};
  CHECK_THROWS_AS(enc.Encode(oov), Error);
}

TEST_CASE("phoneme encoder: context mixes beyond the position signal") {
  Rng rng(13);
  PhonemeEncoder enc(10, 16, 32, 2, 2);
  enc.Init(rng);
  PhonemeSequence s1, s2;
  s1.ids = {5, 1, 2};
  s2.ids = {5, 2, 1};  // same first symbol and position, permuted context
  const ContentSequence a = enc.Encode(s1);
  const ContentSequence b = enc.Encode(s2);
  // Row 0 has the same symbol and the same position signal; any difference
  // comes from attention over the permuted neighbors.
  CHECK((a.c.row(0) - b.c.row(0)).norm() > 1e-6);
}

TEST_CASE("encoder jacobian-vector products match finite differences") {
  Rng rng(17);

  SUBCASE("reference encoder") {
    ReferenceEncoder enc(12, 10, 8, 5);
    enc.Init(rng);
    Mat mel_in(20, 12);
    for (Eigen::Index i = 0; i < mel_in.size(); ++i) {
      mel_in.data()[i] = 0.5 * rng.Normal();
    }
    Mat w(1, 8);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.Normal();

    auto params = enc.Params();
    auto forward = [&](bool backward) {
      Tape t(backward);
      Expr out = enc.Forward(t, t.Constant(mel_in));
      Expr s = t.SumAll(t.Mul(out, t.Constant(w)));
      if (backward) {
        t.Backward(s);
        t.AccumulateParamGrads();
      }
      return t.ScalarValue(s);
    };
    auto res = nns::test::CheckGradients(
        params, [&] { return forward(false); },
        [&] {
          nns::test::ZeroGrads(params);
          forward(true);
          return nns::test::CollectGrads(params);
        },
        rng, 4);
    CHECK(res.max_rel_error < 1e-4);
    CHECK(res.checks >= 20);
  }

  SUBCASE("phoneme encoder") {
    PhonemeEncoder enc(8, 12, 24, 2, 2);
    enc.Init(rng);
    const std::vector<int> ids = {1, 5, 2, 7, 3};
    Mat w(5, 12);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.Normal();

    auto params = enc.Params();
    auto forward = [&](bool backward) {
      Tape t(backward);
      Expr out = enc.Forward(t, ids);
      Expr s = t.SumAll(t.Mul(out, t.Constant(w)));
      if (backward) {
        t.Backward(s);
        t.AccumulateParamGrads();
      }
      return t.ScalarValue(s);
    };
    auto res = nns::test::CheckGradients(
        params, [&] { return forward(false); },
        [&] {
          nns::test::ZeroGrads(params);
          forward(true);
          return nns::test::CollectGrads(params);
        },
        rng, 4);
    CHECK(res.max_rel_error < 1e-4);
    CHECK(res.checks >= 20);
  }
}
