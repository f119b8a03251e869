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

#ifndef NNSPEECH_NN_MODULES_HPP_
#define NNSPEECH_NN_MODULES_HPP_

#include <string>
#include <vector>

#include "ad/tape.hpp"
#include "util/rng.hpp"

namespace nns {

using ad::Expr;
using ad::Mat;
using ad::Param;
using ad::Tape;

// Uniform(-limit, limit) with limit = sqrt(1 / fan_in); biases stay zero
// unless initialized explicitly.
void InitUniform(Param& p, Rng& rng, Eigen::Index fan_in);

struct Linear {
  Param weight;  // in x out
  Param bias;    // 1 x out

  Linear() = default;
  Linear(const std::string& name, Eigen::Index in, Eigen::Index out);
  void Init(Rng& rng);
  Expr Forward(Tape& t, Expr x) const;
  std::vector<Param*> Params();
};

// Fixed-depth MLP: `hidden` tanh layers followed by a linear head.
struct Mlp {
  std::vector<Linear> layers;

  Mlp() = default;
  Mlp(const std::string& name, Eigen::Index in,
      const std::vector<Eigen::Index>& hidden, Eigen::Index out);
  void Init(Rng& rng);
  Expr Forward(Tape& t, Expr x) const;
  std::vector<Param*> Params();
};

// 1-D convolution over rows (time) with circular padding, expressed as
// im2col + matmul. Circular padding makes the temporal mean of the features
// exactly invariant to tiling the input, which the pooled reference encoder
// relies on.
struct Conv1d {
  int kernel = 5;
  Param weight;  // (kernel * in) x out
  Param bias;    // 1 x out

  Conv1d() = default;
  Conv1d(const std::string& name, int kernel, Eigen::Index in,
         Eigen::Index out);
  void Init(Rng& rng);
  Expr Forward(Tape& t, Expr x) const;
  std::vector<Param*> Params();
};

struct LayerNorm {
  Param gain;  // 1 x dim
  Param bias;  // 1 x dim

  LayerNorm() = default;
  explicit LayerNorm(const std::string& name, Eigen::Index dim);
  Expr Forward(Tape& t, Expr x) const;
  std::vector<Param*> Params();
};

// Pre-norm transformer block: x + Attn(LN(x)), then x + FFN(LN(x)). The
// feed-forward uses GELU so the whole block is smooth, which keeps
// finite-difference gradient checks tight.
struct TransformerBlock {
  int num_heads = 2;
  Eigen::Index dim = 0;
  LayerNorm ln_attn;
  Linear wq, wk, wv, wo;
  LayerNorm ln_ffn;
  Linear ffn1, ffn2;

  TransformerBlock() = default;
  TransformerBlock(const std::string& name, Eigen::Index dim,
                   Eigen::Index ffn_dim, int num_heads);
  void Init(Rng& rng);
  Expr Forward(Tape& t, Expr x) const;
  std::vector<Param*> Params();
};

struct Embedding {
  Param table;  // vocab x dim

  Embedding() = default;
  Embedding(const std::string& name, Eigen::Index vocab, Eigen::Index dim);
  void Init(Rng& rng);
  Expr Forward(Tape& t, const std::vector<int>& ids) const;
  std::vector<Param*> Params();
};

// Standard sinusoidal positional signal, rows = length, cols = dim.
Mat SinusoidalPositions(Eigen::Index length, Eigen::Index dim);

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-9;
};

class Adam {
 public:
  explicit Adam(AdamConfig config) : config_(config) {}

  // Applies one update to `params` from their accumulated grads with the
  // given effective learning rate, then advances the step counter.
  void Step(const std::vector<Param*>& params, double lr);
  int64_t step_count() const { return step_; }

 private:
  AdamConfig config_;
  int64_t step_ = 0;
};

}  // namespace nns

#endif  // NNSPEECH_NN_MODULES_HPP_
