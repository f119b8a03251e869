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

#include "ad/tape.hpp"
#include "nn/modules.hpp"
#include "testutil.hpp"

using namespace nns;
using nns::test::CheckGradients;
using nns::test::CollectGrads;
using nns::test::ZeroGrads;

namespace {

// Runs one op through a weighted-sum head so the output is scalar, then
// checks the gradient numerically.
void CheckOp(const std::function<Expr(Tape&, Expr)>& op, Eigen::Index rows,
             Eigen::Index cols, uint64_t seed, double tol = 1e-6) {
  Rng rng(seed);
  Param input("input", rows, cols);
  for (Eigen::Index i = 0; i < input.value.size(); ++i) {
    input.value.data()[i] = rng.Normal();
  }
  Mat weights(0, 0);

  auto forward = [&](bool backward) {
    Tape t(backward);
    Expr x = t.Bind(input);
    Expr y = op(t, x);
    if (weights.size() == 0) {
      weights.resize(t.Value(y).rows(), t.Value(y).cols());
      Rng wrng(seed + 1);
      for (Eigen::Index i = 0; i < weights.size(); ++i) {
        weights.data()[i] = wrng.Normal();
      }
    }
    Expr out = t.SumAll(t.Mul(y, t.Constant(weights)));
    if (backward) {
      t.Backward(out);
      t.AccumulateParamGrads();
    }
    return t.ScalarValue(out);
  };

  std::vector<Param*> params{&input};
  auto res = CheckGradients(
      params, [&] { return forward(false); },
      [&] {
        ZeroGrads(params);
        forward(true);
        return CollectGrads(params);
      },
      rng, 6);
  CHECK(res.max_rel_error < tol);
}

}  // namespace

TEST_CASE("elementwise and reduction op gradients") {
  CheckOp([](Tape& t, Expr x) { return t.Tanh(x); }, 4, 5, 11);
  CheckOp([](Tape& t, Expr x) { return t.Exp(t.Scale(x, 0.3)); }, 3, 4, 12);
  CheckOp([](Tape& t, Expr x) { return t.Gelu(x); }, 5, 3, 13);
  CheckOp([](Tape& t, Expr x) { return t.Mul(x, t.Tanh(x)); }, 4, 4, 14);
  CheckOp([](Tape& t, Expr x) { return t.MeanRows(x); }, 6, 3, 15);
  CheckOp([](Tape& t, Expr x) { return t.MeanAll(x); }, 4, 7, 16);
  CheckOp([](Tape& t, Expr x) { return t.AddScalar(t.Scale(x, -2.0), 1.0); },
          3, 3, 17);
}

TEST_CASE("matmul, transpose, softmax gradients") {
  CheckOp(
      [](Tape& t, Expr x) {
        return t.MatMul(x, t.Transpose(x));  // x x^T, nonlinear in x
      },
      4, 3, 21);
  CheckOp([](Tape& t, Expr x) { return t.SoftmaxRows(x); }, 5, 6, 22);
  CheckOp(
      [](Tape& t, Expr x) {
        Expr sm = t.SoftmaxRows(t.Scale(x, 0.7));
        return t.MatMul(sm, x);
      },
      4, 4, 23);
}

TEST_CASE("shape op gradients") {
  CheckOp([](Tape& t, Expr x) { return t.SliceCols(x, 1, 2); }, 4, 5, 31);
  CheckOp([](Tape& t, Expr x) { return t.SliceRows(x, 1, 2); }, 5, 4, 32);
  CheckOp(
      [](Tape& t, Expr x) {
        return t.ConcatCols(t.Tanh(x), t.SliceCols(x, 0, 2));
      },
      4, 4, 33);
  CheckOp(
      [](Tape& t, Expr x) {
        return t.GatherRows(x, std::vector<int>{0, 2, 2, 1});
      },
      4, 3, 34);
  CheckOp([](Tape& t, Expr x) { return t.Im2ColCircular(x, 5); }, 7, 3, 35);
  CheckOp(
      [](Tape& t, Expr x) {
        return t.AddRowVector(t.Tanh(x), t.SliceRows(x, 0, 1));
      },
      5, 4, 36);
  CheckOp(
      [](Tape& t, Expr x) {
        return t.RepeatRow(t.MeanRows(x), 6);
      },
      3, 4, 37);
}

TEST_CASE("layer norm gradient") {
  Rng rng(41);
  Param x("x", 5, 8), gain("gain", 1, 8), bias("bias", 1, 8);
  nns::test::RandomizeParams({&x, &gain, &bias}, rng, 1.0);

  auto forward = [&](bool backward) {
    Tape t(backward);
    Expr y = t.LayerNormRows(t.Bind(x), t.Bind(gain), t.Bind(bias));
    Expr out = t.MeanAll(t.Mul(y, t.Tanh(y)));
    if (backward) {
      t.Backward(out);
      t.AccumulateParamGrads();
    }
    return t.ScalarValue(out);
  };
  std::vector<Param*> params{&x, &gain, &bias};
  auto res = CheckGradients(
      params, [&] { return forward(false); },
      [&] {
        ZeroGrads(params);
        forward(true);
        return CollectGrads(params);
      },
      rng, 6);
  CHECK(res.max_rel_error < 1e-6);
}

TEST_CASE("clamp passes gradient strictly inside the range only") {
  Tape t(true);
  Mat v(1, 4);
  v << -3.0, -0.5, 0.5, 3.0;
  Expr x = t.Leaf(v, true);
  Expr y = t.Clamp(x, -1.0, 1.0);
  Expr out = t.SumAll(y);
  t.Backward(out);
  const Mat& g = t.Grad(x);
  CHECK(g(0, 0) == 0.0);
  CHECK(g(0, 1) == 1.0);
  CHECK(g(0, 2) == 1.0);
  CHECK(g(0, 3) == 0.0);
  CHECK(t.Value(y)(0, 0) == -1.0);
  CHECK(t.Value(y)(0, 3) == 1.0);
}

TEST_CASE("gradient accumulates across shared subexpressions") {
  // f(x) = sum(x*x) + sum(x) -> df/dx = 2x + 1.
  Tape t(true);
  Mat v(2, 2);
  v << 1.0, -2.0, 0.5, 3.0;
  Expr x = t.Leaf(v, true);
  Expr out = t.Add(t.SumAll(t.Mul(x, x)), t.SumAll(x));
  t.Backward(out);
  const Mat expected = (2.0 * v).array() + 1.0;
  CHECK((t.Grad(x) - expected).norm() == doctest::Approx(0.0));
}

TEST_CASE("transformer block and conv modules backprop correctly") {
  Rng rng(51);
  TransformerBlock block("blk", 8, 16, 2);
  block.Init(rng);
  Conv1d conv("conv", 5, 6, 4);
  conv.Init(rng);

  Mat input(7, 8);
  for (Eigen::Index i = 0; i < input.size(); ++i) {
    input.data()[i] = 0.5 * rng.Normal();
  }
  Mat conv_input(9, 6);
  for (Eigen::Index i = 0; i < conv_input.size(); ++i) {
    conv_input.data()[i] = 0.5 * rng.Normal();
  }

  auto run = [&](auto&& fwd, std::vector<Param*> params, uint64_t seed) {
    Rng local(seed);
    auto loss = [&] {
      Tape t(false);
      return fwd(t, false);
    };
    auto grads = [&] {
      ZeroGrads(params);
      Tape t(true);
      fwd(t, true);
      return CollectGrads(params);
    };
    auto res = CheckGradients(params, loss, grads, local, 4);
    CHECK(res.max_rel_error < 1e-6);
  };

  run(
      [&](Tape& t, bool backward) {
        Expr y = block.Forward(t, t.Constant(input));
        Expr out = t.MeanAll(t.Mul(y, y));
        if (backward) {
          t.Backward(out);
          t.AccumulateParamGrads();
        }
        return t.ScalarValue(out);
      },
      block.Params(), 52);

  run(
      [&](Tape& t, bool backward) {
        Expr y = t.Tanh(conv.Forward(t, t.Constant(conv_input)));
        Expr out = t.MeanAll(t.Mul(y, y));
        if (backward) {
          t.Backward(out);
          t.AccumulateParamGrads();
        }
        return t.ScalarValue(out);
      },
      conv.Params(), 53);
}

TEST_CASE("adam converges on a quadratic") {
  Param p("p", 1, 1);
  p.value(0, 0) = 0.0;
  Adam opt(AdamConfig{0.1, 0.9, 0.98, 1e-9});
  for (int i = 0; i < 1000; ++i) {
    p.grad(0, 0) = 2.0 * (p.value(0, 0) - 3.0);
    opt.Step({&p}, 0.1);
  }
  CHECK(p.value(0, 0) == doctest::Approx(3.0).epsilon(1e-3));
}
