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
// Minimal reverse-mode automatic differentiation over dense double
// matrices. One Tape per forward pass; nodes are created in topological
// order, so Backward() is a single reverse sweep. All model forwards are
// expressed through this tape, which is what the finite-difference suites
// verify.

#ifndef NNSPEECH_AD_TAPE_HPP_
#define NNSPEECH_AD_TAPE_HPP_

#include <Eigen/Core>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace nns::ad {

using Mat = Eigen::MatrixXd;

class Tape;

struct Expr {
  Tape* tape = nullptr;
  int id = -1;
  bool valid() const { return tape != nullptr && id >= 0; }
};

// Named trainable tensor with optimizer state.
struct Param {
  std::string name;
  Mat value;
  Mat grad;
  Mat adam_m;
  Mat adam_v;

  Param() = default;
  Param(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)),
        value(Mat::Zero(rows, cols)),
        grad(Mat::Zero(rows, cols)),
        adam_m(Mat::Zero(rows, cols)),
        adam_v(Mat::Zero(rows, cols)) {}

  void ZeroGrad() { grad.setZero(); }
};

class Tape {
 public:
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  bool grad_enabled() const { return grad_enabled_; }

  // Leaves.
  Expr Constant(Mat value);
  Expr Leaf(Mat value, bool requires_grad);
  // Copies the parameter value onto the tape and remembers the binding;
  // AccumulateParamGrads() later adds the leaf gradient into param.grad.
  Expr Bind(Param& param);

  const Mat& Value(Expr e) const;
  const Mat& Grad(Expr e) const;

  // Elementwise and shape ops.
  Expr Add(Expr a, Expr b);
  Expr Sub(Expr a, Expr b);
  Expr Mul(Expr a, Expr b);
  Expr Scale(Expr a, double s);
  Expr AddScalar(Expr a, double c);
  Expr MatMul(Expr a, Expr b);
  Expr Transpose(Expr a);
  Expr Tanh(Expr a);
  Expr Exp(Expr a);
  Expr Gelu(Expr a);
  Expr Clamp(Expr a, double lo, double hi);
  Expr SoftmaxRows(Expr a);
  Expr AddRowVector(Expr a, Expr row);   // a: L x D, row: 1 x D
  Expr RepeatRow(Expr row, Eigen::Index n);
  Expr ConcatCols(Expr a, Expr b);
  Expr SliceCols(Expr a, Eigen::Index start, Eigen::Index n);
  Expr SliceRows(Expr a, Eigen::Index start, Eigen::Index n);
  Expr MeanRows(Expr a);                 // L x D -> 1 x D
  Expr MeanAll(Expr a);                  // -> 1 x 1
  Expr SumAll(Expr a);                   // -> 1 x 1
  Expr GatherRows(Expr table, const std::vector<int>& rows);
  // Circular im2col for 1-D convolution over rows: output row t is the
  // concatenation over kernel taps of input row (t + k - K/2) mod T.
  Expr Im2ColCircular(Expr x, int kernel);
  Expr LayerNormRows(Expr x, Expr gain, Expr bias, double eps = 1e-6);

  // Mean squared error over all entries, composed from primitives.
  Expr Mse(Expr a, Expr b) { return MeanAll(Mul(Sub(a, b), Sub(a, b))); }

  double ScalarValue(Expr e) const;

  // Reverse sweep from a 1x1 scalar node.
  void Backward(Expr scalar_output);
  void AccumulateParamGrads();

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat val;
    Mat grad;
    bool requires_grad = false;
    bool grad_ready = false;
    std::function<void(Tape&)> backprop;  // null for leaves/constants
  };

  int NewNode(Mat val, bool requires_grad,
              std::function<void(Tape&)> backprop);
  bool Requires(Expr e) const { return nodes_[static_cast<size_t>(e.id)].requires_grad; }
  Mat& GradRef(int id);
  void AddGrad(int id, const Mat& g);

  std::vector<Node> nodes_;
  std::vector<std::pair<Param*, int>> bindings_;
  bool grad_enabled_;
};

}  // namespace nns::ad

#endif  // NNSPEECH_AD_TAPE_HPP_
