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

#include "nn/modules.hpp"

#include <cmath>

#include "util/error.hpp"

namespace nns {

void InitUniform(Param& p, Rng& rng, Eigen::Index fan_in) {
  const double limit = std::sqrt(1.0 / static_cast<double>(fan_in));
  for (Eigen::Index i = 0; i < p.value.size(); ++i) {
    p.value.data()[i] = rng.UniformRange(-limit, limit);
  }
}

Linear::Linear(const std::string& name, Eigen::Index in, Eigen::Index out)
    : weight(name + ".weight", in, out), bias(name + ".bias", 1, out) {}

void Linear::Init(Rng& rng) { InitUniform(weight, rng, weight.value.rows()); }

Expr Linear::Forward(Tape& t, Expr x) const {
  // Params are logically read-only here; Bind copies values onto the tape.
  auto& self = const_cast<Linear&>(*this);
  return t.AddRowVector(t.MatMul(x, t.Bind(self.weight)), t.Bind(self.bias));
}

std::vector<Param*> Linear::Params() { return {&weight, &bias}; }

Mlp::Mlp(const std::string& name, Eigen::Index in,
         const std::vector<Eigen::Index>& hidden, Eigen::Index out) {
  Eigen::Index prev = in;
  for (size_t i = 0; i < hidden.size(); ++i) {
    layers.emplace_back(name + ".h" + std::to_string(i), prev, hidden[i]);
    prev = hidden[i];
  }
  layers.emplace_back(name + ".out", prev, out);
}

void Mlp::Init(Rng& rng) {
  for (auto& l : layers) l.Init(rng);
}

Expr Mlp::Forward(Tape& t, Expr x) const {
  Expr h = x;
  for (size_t i = 0; i + 1 < layers.size(); ++i) {
    h = t.Tanh(layers[i].Forward(t, h));
  }
  return layers.back().Forward(t, h);
}

std::vector<Param*> Mlp::Params() {
  std::vector<Param*> out;
  for (auto& l : layers) {
    for (auto* p : l.Params()) out.push_back(p);
  }
  return out;
}

Conv1d::Conv1d(const std::string& name, int kernel, Eigen::Index in,
               Eigen::Index out)
    : kernel(kernel),
      weight(name + ".weight", kernel * in, out),
      bias(name + ".bias", 1, out) {}

void Conv1d::Init(Rng& rng) { InitUniform(weight, rng, weight.value.rows()); }

Expr Conv1d::Forward(Tape& t, Expr x) const {
  auto& self = const_cast<Conv1d&>(*this);
  Expr cols = t.Im2ColCircular(x, kernel);
  return t.AddRowVector(t.MatMul(cols, t.Bind(self.weight)),
                        t.Bind(self.bias));
}

std::vector<Param*> Conv1d::Params() { return {&weight, &bias}; }

LayerNorm::LayerNorm(const std::string& name, Eigen::Index dim)
    : gain(name + ".gain", 1, dim), bias(name + ".bias", 1, dim) {
  gain.value.setOnes();
}

Expr LayerNorm::Forward(Tape& t, Expr x) const {
  auto& self = const_cast<LayerNorm&>(*this);
  return t.LayerNormRows(x, t.Bind(self.gain), t.Bind(self.bias));
}

std::vector<Param*> LayerNorm::Params() { return {&gain, &bias}; }

TransformerBlock::TransformerBlock(const std::string& name, Eigen::Index dim,
                                   Eigen::Index ffn_dim, int num_heads)
    : num_heads(num_heads),
      dim(dim),
      ln_attn(name + ".ln_attn", dim),
      wq(name + ".wq", dim, dim),
      wk(name + ".wk", dim, dim),
      wv(name + ".wv", dim, dim),
      wo(name + ".wo", dim, dim),
      ln_ffn(name + ".ln_ffn", dim),
      ffn1(name + ".ffn1", dim, ffn_dim),
      ffn2(name + ".ffn2", ffn_dim, dim) {
  if (dim % num_heads != 0) {
    ThrowInvalid("attention dim must be divisible by head count");
  }
}

void TransformerBlock::Init(Rng& rng) {
  wq.Init(rng);
  wk.Init(rng);
  wv.Init(rng);
  wo.Init(rng);
  ffn1.Init(rng);
  ffn2.Init(rng);
}

Expr TransformerBlock::Forward(Tape& t, Expr x) const {
  const Eigen::Index head_dim = dim / num_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  Expr xn = ln_attn.Forward(t, x);
  Expr q = wq.Forward(t, xn);
  Expr k = wk.Forward(t, xn);
  Expr v = wv.Forward(t, xn);

  Expr heads;
  for (int h = 0; h < num_heads; ++h) {
    const Eigen::Index off = h * head_dim;
    Expr qh = t.SliceCols(q, off, head_dim);
    Expr kh = t.SliceCols(k, off, head_dim);
    Expr vh = t.SliceCols(v, off, head_dim);
    Expr scores = t.Scale(t.MatMul(qh, t.Transpose(kh)), scale);
    Expr attn = t.SoftmaxRows(scores);
    Expr oh = t.MatMul(attn, vh);
    heads = h == 0 ? oh : t.ConcatCols(heads, oh);
  }
  Expr x2 = t.Add(x, wo.Forward(t, heads));

  Expr x2n = ln_ffn.Forward(t, x2);
  Expr ff = ffn2.Forward(t, t.Gelu(ffn1.Forward(t, x2n)));
  return t.Add(x2, ff);
}

std::vector<Param*> TransformerBlock::Params() {
  std::vector<Param*> out;
  for (auto* m : {&wq, &wk, &wv, &wo, &ffn1, &ffn2}) {
    for (auto* p : m->Params()) out.push_back(p);
  }
  for (auto* p : ln_attn.Params()) out.push_back(p);
  for (auto* p : ln_ffn.Params()) out.push_back(p);
  return out;
}

Embedding::Embedding(const std::string& name, Eigen::Index vocab,
                     Eigen::Index dim)
    : table(name + ".table", vocab, dim) {}

void Embedding::Init(Rng& rng) { InitUniform(table, rng, table.value.cols()); }

Expr Embedding::Forward(Tape& t, const std::vector<int>& ids) const {
  auto& self = const_cast<Embedding&>(*this);
  return t.GatherRows(t.Bind(self.table), ids);
}

std::vector<Param*> Embedding::Params() { return {&table}; }

Mat SinusoidalPositions(Eigen::Index length, Eigen::Index dim) {
  Mat pe(length, dim);
  for (Eigen::Index pos = 0; pos < length; ++pos) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double exponent =
          static_cast<double>(2 * (i / 2)) / static_cast<double>(dim);
      const double angle =
          static_cast<double>(pos) / std::pow(10000.0, exponent);
      pe(pos, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return pe;
}

void Adam::Step(const std::vector<Param*>& params, double lr) {
  ++step_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  for (Param* p : params) {
    p->adam_m = config_.beta1 * p->adam_m + (1.0 - config_.beta1) * p->grad;
    p->adam_v =
        (config_.beta2 * p->adam_v.array() +
         (1.0 - config_.beta2) * p->grad.array().square())
            .matrix();
    const auto m_hat = p->adam_m.array() / bc1;
    const auto v_hat = p->adam_v.array() / bc2;
    p->value.array() -= lr * m_hat / (v_hat.sqrt() + config_.eps);
  }
}

}  // namespace nns
