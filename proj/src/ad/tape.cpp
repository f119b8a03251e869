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

#include "ad/tape.hpp"

#include <cmath>

#include "util/error.hpp"

namespace nns::ad {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

void CheckSameShape(const Mat& a, const Mat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    ThrowInvalid(std::string(op) + ": dimension mismatch (" +
                 std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                 " vs " + std::to_string(b.rows()) + "x" +
                 std::to_string(b.cols()) + ")");
  }
}

}  // namespace

int Tape::NewNode(Mat val, bool requires_grad,
                  std::function<void(Tape&)> backprop) {
  Node n;
  n.val = std::move(val);
  n.requires_grad = requires_grad && grad_enabled_;
  if (n.requires_grad) n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

Mat& Tape::GradRef(int id) {
  Node& n = nodes_[static_cast<size_t>(id)];
  if (!n.grad_ready) {
    n.grad = Mat::Zero(n.val.rows(), n.val.cols());
    n.grad_ready = true;
  }
  return n.grad;
}

void Tape::AddGrad(int id, const Mat& g) {
  if (!nodes_[static_cast<size_t>(id)].requires_grad) return;
  GradRef(id) += g;
}

Expr Tape::Constant(Mat value) {
  return Expr{this, NewNode(std::move(value), false, nullptr)};
}

Expr Tape::Leaf(Mat value, bool requires_grad) {
  return Expr{this, NewNode(std::move(value), requires_grad, nullptr)};
}

Expr Tape::Bind(Param& param) {
  Expr e = Leaf(param.value, true);
  bindings_.emplace_back(&param, e.id);
  return e;
}

const Mat& Tape::Value(Expr e) const {
  return nodes_[static_cast<size_t>(e.id)].val;
}

const Mat& Tape::Grad(Expr e) const {
  const Node& n = nodes_[static_cast<size_t>(e.id)];
  static const Mat kEmpty;
  return n.grad_ready ? n.grad : kEmpty;
}

double Tape::ScalarValue(Expr e) const {
  const Mat& v = Value(e);
  if (v.rows() != 1 || v.cols() != 1) ThrowInvalid("expected a 1x1 node");
  return v(0, 0);
}

Expr Tape::Add(Expr a, Expr b) {
  CheckSameShape(Value(a), Value(b), "Add");
  const int ia = a.id, ib = b.id;
  const int self =
      NewNode(Value(a) + Value(b), Requires(a) || Requires(b), nullptr);
  if (nodes_[static_cast<size_t>(self)].requires_grad) {
    nodes_[static_cast<size_t>(self)].backprop = [self, ia, ib](Tape& t) {
      const Mat& g = t.nodes_[static_cast<size_t>(self)].grad;
      t.AddGrad(ia, g);
      t.AddGrad(ib, g);
    };
  }
  return Expr{this, self};
}

Expr Tape::Sub(Expr a, Expr b) {
  CheckSameShape(Value(a), Value(b), "Sub");
  const int ia = a.id, ib = b.id;
  const int self = NewNode(Value(a) - Value(b), Requires(a) || Requires(b),
                           nullptr);
  if (nodes_[static_cast<size_t>(self)].requires_grad) {
    nodes_[static_cast<size_t>(self)].backprop = [self, ia, ib](Tape& t) {
      const Mat& g = t.nodes_[static_cast<size_t>(self)].grad;
      t.AddGrad(ia, g);
      if (t.nodes_[static_cast<size_t>(ib)].requires_grad) {
        t.GradRef(ib) -= g;
      }
    };
  }
  return Expr{this, self};
}

Expr Tape::Mul(Expr a, Expr b) {
  CheckSameShape(Value(a), Value(b), "Mul");
  const int ia = a.id, ib = b.id;
  const int self = NewNode(Value(a).cwiseProduct(Value(b)),
                           Requires(a) || Requires(b), nullptr);
  if (nodes_[static_cast<size_t>(self)].requires_grad) {
    nodes_[static_cast<size_t>(self)].backprop = [self, ia, ib](Tape& t) {
      const Mat& g = t.nodes_[static_cast<size_t>(self)].grad;
      t.AddGrad(ia, g.cwiseProduct(t.nodes_[static_cast<size_t>(ib)].val));
      t.AddGrad(ib, g.cwiseProduct(t.nodes_[static_cast<size_t>(ia)].val));
    };
  }
  return Expr{this, self};
}

Expr Tape::Scale(Expr a, double s) {
  const int ia = a.id;
  const int self = NewNode(Value(a) * s, Requires(a), nullptr);
  if (nodes_[static_cast<size_t>(self)].requires_grad) {
    nodes_[static_cast<size_t>(self)].backprop = [self, ia, s](Tape& t) {
      t.AddGrad(ia, t.nodes_[static_cast<size_t>(self)].grad * s);
    };
  }
  return Expr{this, self};
}

Expr Tape::AddScalar(Expr a, double c) {
  const int ia = a.id;
  const int self = NewNode(Value(a).array() + c, Requires(a), nullptr);
  if (nodes_[static_cast<size_t>(self)].requires_grad) {
    nodes_[static_cast<size_t>(self)].backprop = [self, ia](Tape& t) {
      t.AddGrad(ia, t.nodes_[static_cast<size_t>(self)].grad);
    };
  }
  return Expr{this, self};
}

Expr Tape::MatMul(Expr a, Expr b) {
  if (Value(a).cols() != Value(b).rows()) {
    ThrowInvalid("MatMul: inner dimension mismatch");
  }
  const int ia = a.id, ib = b.id;
  const int self =
      NewNode(Value(a) * Value(b), Requires(a) || Requires(b), nullptr);
  if (nodes_[static_cast<size_t>(self)].requires_grad) {
    nodes_[static_cast<size_t>(self)].backprop = [self, ia, ib](Tape& t) {
      const Mat& g = t.nodes_[static_cast<size_t>(self)].grad;
      if (t.nodes_[static_cast<size_t>(ia)].requires_grad) {
        t.GradRef(ia).noalias() +=
            g * t.nodes_[static_cast<size_t>(ib)].val.transpose();
      }
      if (t.nodes_[static_cast<size_t>(ib)].requires_grad) {
        t.GradRef(ib).noalias() +=
            t.nodes_[static_cast<size_t>(ia)].val.transpose() * g;
      }
    };
  }
  return Expr{this, self};
}

Expr Tape::Transpose(Expr a) {
  const int ia = a.id;
  const int self = NewNode(Value(a).transpose(), Requires(a), nullptr);
  if (nodes_[static_cast<size_t>(self)].requires_grad) {
    nodes_[static_cast<size_t>(self)].backprop = [self, ia](Tape& t) {
      t.AddGrad(ia, t.nodes_[static_cast<size_t>(self)].grad.transpose());
    };
  }
  return Expr{this, self};
}

Expr Tape::Tanh(Expr a) {
  const int ia = a.id;
  const int self =
      NewNode(Value(a).array().tanh().matrix(), Requires(a), nullptr);
  if (nodes_[static_cast<size_t>(self)].requires_grad) {
    nodes_[static_cast<size_t>(self)].backprop = [self, ia](Tape& t) {
      const Mat& y = t.nodes_[static_cast<size_t>(self)].val;
      const Mat& g = t.nodes_[static_cast<size_t>(self)].grad;
      t.AddGrad(ia, (g.array() * (1.0 - y.array().square())).matrix());
    };
  }
  return Expr{this, self};
}

Expr Tape::Exp(Expr a) {
  const int ia = a.id;
  const int self =
      NewNode(Value(a).array().exp().matrix(), Requires(a), nullptr);
  if (nodes_[static_cast<size_t>(self)].requires_grad) {
    nodes_[static_cast<size_t>(self)].backprop = [self, ia](Tape& t) {
      const Mat& y = t.nodes_[static_cast<size_t>(self)].val;
      const Mat& g = t.nodes_[static_cast<size_t>(self)].grad;
      t.AddGrad(ia, g.cwiseProduct(y));
    };
  }
  return Expr{this, self};
}

Expr Tape::Gelu(Expr a) {
  const int ia = a.id;
  Mat y = Value(a);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double x = y.data()[i];
    y.data()[i] = 0.5 * x * (1.0 + std::erf(x * kInvSqrt2));
  }
  const int self = NewNode(std::move(y), Requires(a), nullptr);
  if (nodes_[static_cast<size_t>(self)].requires_grad) {
    nodes_[static_cast<size_t>(self)].backprop = [self, ia](Tape& t) {
      const Mat& x = t.nodes_[static_cast<size_t>(ia)].val;
      const Mat& g = t.nodes_[static_cast<size_t>(self)].grad;
      Mat dx(x.rows(), x.cols());
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double v = x.data()[i];
        const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
        const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
        dx.data()[i] = g.data()[i] * (cdf + v * pdf);
      }
      t.AddGrad(ia, dx);
    };
  }
  return Expr{this, self};
}

Expr Tape::Clamp(Expr a, double lo, double hi) {
  const int ia = a.id;
  const int self = NewNode(Value(a).array().min(hi).max(lo).matrix(),
                           Requires(a), nullptr);
  if (nodes_[static_cast<size_t>(self)].requires_grad) {
    nodes_[static_cast<size_t>(self)].backprop = [self, ia, lo, hi](Tape& t) {
      const Mat& x = t.nodes_[static_cast<size_t>(ia)].val;
      const Mat& g = t.nodes_[static_cast<size_t>(self)].grad;
      Mat dx = Mat::Zero(x.rows(), x.cols());
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x.data()[i] > lo && x.data()[i] < hi) dx.data()[i] = g.data()[i];
      }
      t.AddGrad(ia, dx);
    };
  }
  return Expr{this, self};
}

Expr Tape::SoftmaxRows(Expr a) {
  Mat y = Value(a);
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    const double m = y.row(r).maxCoeff();
    y.row(r) = (y.row(r).array() - m).exp();
    y.row(r) /= y.row(r).sum();
  }
  const int ia = a.id;
  const int self = NewNode(std::move(y), Requires(a), nullptr);
  if (nodes_[static_cast<size_t>(self)].requires_grad) {
    nodes_[static_cast<size_t>(self)].backprop = [self, ia](Tape& t) {
      const Mat& out = t.nodes_[static_cast<size_t>(self)].val;
      const Mat& g = t.nodes_[static_cast<size_t>(self)].grad;
      Mat dx(out.rows(), out.cols());
      for (Eigen::Index r = 0; r < out.rows(); ++r) {
        const double dot = g.row(r).cwiseProduct(out.row(r)).sum();
        dx.row(r) = (out.row(r).array() * (g.row(r).array() - dot)).matrix();
      }
      t.AddGrad(ia, dx);
    };
  }
  return Expr{this, self};
}

Expr Tape::AddRowVector(Expr a, Expr row) {
  if (Value(row).rows() != 1 || Value(row).cols() != Value(a).cols()) {
    ThrowInvalid("AddRowVector: dimension mismatch");
  }
  const int ia = a.id, ir = row.id;
  Mat v = Value(a);
  v.rowwise() += Value(row).row(0);
  const int self = NewNode(std::move(v), Requires(a) || Requires(row), nullptr);
  if (nodes_[static_cast<size_t>(self)].requires_grad) {
    nodes_[static_cast<size_t>(self)].backprop = [self, ia, ir](Tape& t) {
      const Mat& g = t.nodes_[static_cast<size_t>(self)].grad;
      t.AddGrad(ia, g);
      if (t.nodes_[static_cast<size_t>(ir)].requires_grad) {
        t.GradRef(ir).row(0) += g.colwise().sum();
      }
    };
  }
  return Expr{this, self};
}

Expr Tape::RepeatRow(Expr row, Eigen::Index n) {
  if (Value(row).rows() != 1) ThrowInvalid("RepeatRow: expected a row vector");
  const int ir = row.id;
  Mat v(n, Value(row).cols());
  v.rowwise() = Value(row).row(0);
  const int self = NewNode(std::move(v), Requires(row), nullptr);
  if (nodes_[static_cast<size_t>(self)].requires_grad) {
    nodes_[static_cast<size_t>(self)].backprop = [self, ir](Tape& t) {
      const Mat& g = t.nodes_[static_cast<size_t>(self)].grad;
      t.GradRef(ir).row(0) += g.colwise().sum();
    };
  }
  return Expr{this, self};
}

Expr Tape::ConcatCols(Expr a, Expr b) {
  if (Value(a).rows() != Value(b).rows()) {
    ThrowInvalid("ConcatCols: row count mismatch");
  }
  const int ia = a.id, ib = b.id;
  const Eigen::Index ca = Value(a).cols(), cb = Value(b).cols();
  Mat v(Value(a).rows(), ca + cb);
  v.leftCols(ca) = Value(a);
  v.rightCols(cb) = Value(b);
  const int self = NewNode(std::move(v), Requires(a) || Requires(b), nullptr);
  if (nodes_[static_cast<size_t>(self)].requires_grad) {
    nodes_[static_cast<size_t>(self)].backprop = [self, ia, ib, ca,
                                                  cb](Tape& t) {
      const Mat& g = t.nodes_[static_cast<size_t>(self)].grad;
      t.AddGrad(ia, g.leftCols(ca));
      t.AddGrad(ib, g.rightCols(cb));
    };
  }
  return Expr{this, self};
}

Expr Tape::SliceCols(Expr a, Eigen::Index start, Eigen::Index n) {
  if (start < 0 || start + n > Value(a).cols()) {
    ThrowInvalid("SliceCols: out of range");
  }
  const int ia = a.id;
  const int self =
      NewNode(Value(a).middleCols(start, n), Requires(a), nullptr);
  if (nodes_[static_cast<size_t>(self)].requires_grad) {
    nodes_[static_cast<size_t>(self)].backprop = [self, ia, start,
                                                  n](Tape& t) {
      const Mat& g = t.nodes_[static_cast<size_t>(self)].grad;
      t.GradRef(ia).middleCols(start, n) += g;
    };
  }
  return Expr{this, self};
}

Expr Tape::SliceRows(Expr a, Eigen::Index start, Eigen::Index n) {
  if (start < 0 || start + n > Value(a).rows()) {
    ThrowInvalid("SliceRows: out of range");
  }
  const int ia = a.id;
  const int self =
      NewNode(Value(a).middleRows(start, n), Requires(a), nullptr);
  if (nodes_[static_cast<size_t>(self)].requires_grad) {
    nodes_[static_cast<size_t>(self)].backprop = [self, ia, start,
                                                  n](Tape& t) {
      const Mat& g = t.nodes_[static_cast<size_t>(self)].grad;
      t.GradRef(ia).middleRows(start, n) += g;
    };
  }
  return Expr{this, self};
}

Expr Tape::MeanRows(Expr a) {
  const int ia = a.id;
  const Eigen::Index rows = Value(a).rows();
  Mat v = Value(a).colwise().mean();
  const int self = NewNode(std::move(v), Requires(a), nullptr);
  if (nodes_[static_cast<size_t>(self)].requires_grad) {
    nodes_[static_cast<size_t>(self)].backprop = [self, ia, rows](Tape& t) {
      const Mat& g = t.nodes_[static_cast<size_t>(self)].grad;
      Mat dx(rows, g.cols());
      dx.rowwise() = g.row(0) / static_cast<double>(rows);
      t.AddGrad(ia, dx);
    };
  }
  return Expr{this, self};
}

Expr Tape::MeanAll(Expr a) {
  const int ia = a.id;
  const double inv = 1.0 / static_cast<double>(Value(a).size());
  Mat v(1, 1);
  v(0, 0) = Value(a).sum() * inv;
  const int self = NewNode(std::move(v), Requires(a), nullptr);
  if (nodes_[static_cast<size_t>(self)].requires_grad) {
    nodes_[static_cast<size_t>(self)].backprop = [self, ia, inv](Tape& t) {
      const Mat& x = t.nodes_[static_cast<size_t>(ia)].val;
      const double g = t.nodes_[static_cast<size_t>(self)].grad(0, 0);
      t.AddGrad(ia, Mat::Constant(x.rows(), x.cols(), g * inv));
    };
  }
  return Expr{this, self};
}

Expr Tape::SumAll(Expr a) {
  const int ia = a.id;
  Mat v(1, 1);
  v(0, 0) = Value(a).sum();
  const int self = NewNode(std::move(v), Requires(a), nullptr);
  if (nodes_[static_cast<size_t>(self)].requires_grad) {
    nodes_[static_cast<size_t>(self)].backprop = [self, ia](Tape& t) {
      const Mat& x = t.nodes_[static_cast<size_t>(ia)].val;
      const double g = t.nodes_[static_cast<size_t>(self)].grad(0, 0);
      t.AddGrad(ia, Mat::Constant(x.rows(), x.cols(), g));
    };
  }
  return Expr{this, self};
}

Expr Tape::GatherRows(Expr table, const std::vector<int>& rows) {
  const Mat& tb = Value(table);
  Mat v(static_cast<Eigen::Index>(rows.size()), tb.cols());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= tb.rows()) {
      ThrowInvalid("GatherRows: index out of range");
    }
    v.row(static_cast<Eigen::Index>(i)) = tb.row(rows[i]);
  }
  const int it = table.id;
  const int self = NewNode(std::move(v), Requires(table), nullptr);
  if (nodes_[static_cast<size_t>(self)].requires_grad) {
    std::vector<int> idx = rows;
    nodes_[static_cast<size_t>(self)].backprop = [self, it,
                                                  idx = std::move(idx)](Tape& t) {
      const Mat& g = t.nodes_[static_cast<size_t>(self)].grad;
      Mat& dt = t.GradRef(it);
      for (size_t i = 0; i < idx.size(); ++i) {
        dt.row(idx[i]) += g.row(static_cast<Eigen::Index>(i));
      }
    };
  }
  return Expr{this, self};
}

Expr Tape::Im2ColCircular(Expr x, int kernel) {
  const Mat& in = Value(x);
  const Eigen::Index T = in.rows();
  const Eigen::Index C = in.cols();
  if (T < 1) ThrowInvalid("Im2ColCircular: empty input");
  const int half = kernel / 2;
  Mat v(T, kernel * C);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (int k = 0; k < kernel; ++k) {
      Eigen::Index src = (t + k - half) % T;
      if (src < 0) src += T;
      v.block(t, static_cast<Eigen::Index>(k) * C, 1, C) = in.row(src);
    }
  }
  const int ix = x.id;
  const int self = NewNode(std::move(v), Requires(x), nullptr);
  if (nodes_[static_cast<size_t>(self)].requires_grad) {
    nodes_[static_cast<size_t>(self)].backprop = [self, ix, kernel, half, T,
                                                  C](Tape& t) {
      const Mat& g = t.nodes_[static_cast<size_t>(self)].grad;
      Mat& dx = t.GradRef(ix);
      for (Eigen::Index tt = 0; tt < T; ++tt) {
        for (int k = 0; k < kernel; ++k) {
          Eigen::Index src = (tt + k - half) % T;
          if (src < 0) src += T;
          dx.row(src) += g.block(tt, static_cast<Eigen::Index>(k) * C, 1, C);
        }
      }
    };
  }
  return Expr{this, self};
}

Expr Tape::LayerNormRows(Expr x, Expr gain, Expr bias, double eps) {
  const Mat& in = Value(x);
  const Eigen::Index D = in.cols();
  if (Value(gain).rows() != 1 || Value(gain).cols() != D ||
      Value(bias).rows() != 1 || Value(bias).cols() != D) {
    ThrowInvalid("LayerNormRows: gain/bias must be 1 x D");
  }
  Mat y(in.rows(), D);
  for (Eigen::Index r = 0; r < in.rows(); ++r) {
    const double m = in.row(r).mean();
    const double var = (in.row(r).array() - m).square().mean();
    const double s = std::sqrt(var + eps);
    y.row(r) = (((in.row(r).array() - m) / s) * Value(gain).row(0).array() +
                Value(bias).row(0).array())
                   .matrix();
  }
  const int ix = x.id, ig = gain.id, ib = bias.id;
  const int self = NewNode(std::move(y),
                           Requires(x) || Requires(gain) || Requires(bias),
                           nullptr);
  if (nodes_[static_cast<size_t>(self)].requires_grad) {
    nodes_[static_cast<size_t>(self)].backprop = [self, ix, ig, ib,
                                                  eps](Tape& t) {
      const Mat& in = t.nodes_[static_cast<size_t>(ix)].val;
      const Mat& gn = t.nodes_[static_cast<size_t>(ig)].val;
      const Mat& g = t.nodes_[static_cast<size_t>(self)].grad;
      const Eigen::Index D = in.cols();
      Mat dx = Mat::Zero(in.rows(), D);
      Eigen::RowVectorXd dgain = Eigen::RowVectorXd::Zero(D);
      Eigen::RowVectorXd dbias = Eigen::RowVectorXd::Zero(D);
      using RowArr = Eigen::Array<double, 1, Eigen::Dynamic>;
      for (Eigen::Index r = 0; r < in.rows(); ++r) {
        const double m = in.row(r).mean();
        const double var = (in.row(r).array() - m).square().mean();
        const double s = std::sqrt(var + eps);
        const RowArr xhat = (in.row(r).array() - m) / s;
        const RowArr dxhat = g.row(r).array() * gn.row(0).array();
        dgain.array() += g.row(r).array() * xhat;
        dbias.array() += g.row(r).array();
        const double mean_dxhat = dxhat.mean();
        const double mean_dxhat_xhat = (dxhat * xhat).mean();
        dx.row(r) =
            ((dxhat - mean_dxhat - xhat * mean_dxhat_xhat) / s).matrix();
      }
      t.AddGrad(ix, dx);
      if (t.nodes_[static_cast<size_t>(ig)].requires_grad) {
        t.GradRef(ig).row(0) += dgain;
      }
      if (t.nodes_[static_cast<size_t>(ib)].requires_grad) {
        t.GradRef(ib).row(0) += dbias;
      }
    };
  }
  return Expr{this, self};
}

void Tape::Backward(Expr scalar_output) {
  const Mat& out = Value(scalar_output);
  if (out.rows() != 1 || out.cols() != 1) {
    ThrowInvalid("Backward: output must be a 1x1 scalar");
  }
  if (!grad_enabled_) ThrowInvalid("Backward: tape built without gradients");
  GradRef(scalar_output.id)(0, 0) = 1.0;
  for (int i = scalar_output.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<size_t>(i)];
    if (n.grad_ready && n.backprop) n.backprop(*this);
  }
}

void Tape::AccumulateParamGrads() {
  for (auto& [param, id] : bindings_) {
    const Node& n = nodes_[static_cast<size_t>(id)];
    if (n.grad_ready) param->grad += n.grad;
  }
}

}  // namespace nns::ad
