// Copyright 2026 The burmese-aec Authors
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

#ifndef AEC_AUTOGRAD_H_
#define AEC_AUTOGRAD_H_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace aec::noise {
class Rng;
}

namespace aec::nn {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// A trainable tensor with its gradient and Adam moments.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix adam_m;
  Matrix adam_v;

  Parameter() = default;
  Parameter(std::string n, int rows, int cols)
      : name(std::move(n)),
        value(Matrix::Zero(rows, cols)),
        grad(Matrix::Zero(rows, cols)),
        adam_m(Matrix::Zero(rows, cols)),
        adam_v(Matrix::Zero(rows, cols)) {}
};

struct Var {
  int id = -1;
};

// Reverse-mode tape over row-major matrices. Every op appends a node; when
// recording is off only values are computed. Parameter gradients accumulate
// into Parameter::grad during Backward().
class Tape {
 public:
  explicit Tape(bool record = true) : record_(record) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }

  Var Constant(Matrix value);
  // Gradients reach p only while recording.
  Var Param(const Parameter& p);

  const Matrix& value(Var v) const;
  // Empty for parameter leaves, whose gradient goes to Parameter::grad.
  const Matrix& grad(Var v) const { return nodes_[v.id].grad; }

  Var MatMul(Var a, Var b);
  Var MatMulTransposed(Var a, Var b);  // a * b^T
  Var Add(Var a, Var b);
  Var AddRowBroadcast(Var a, Var row);  // row is 1 x cols
  Var Scale(Var a, double s);
  Var Tanh(Var a);
  Var Relu(Var a);
  // Row-wise normalization with learned gain and bias (both 1 x cols).
  Var LayerNorm(Var x, Var gain, Var bias, double eps = 1e-6);
  // Row-wise softmax of x + mask, where mask holds 0 or -infinity.
  Var SoftmaxRows(Var x, const Matrix& mask);
  // Rows of the parameter table selected by ids.
  Var Gather(const Parameter& table, std::span<const int> ids);
  Var ConcatCols(std::span<const Var> parts);
  Var SliceCols(Var a, int start, int width);
  Var Mean(std::span<const Var> parts);
  // Inverted dropout; identity when p == 0.
  Var Dropout(Var a, double p, noise::Rng& rng);

  // Sum over rows t with targets[t] != ignore of
  //   -sum_v q_t(v) log softmax(logits_t)(v),
  // q_t = (1 - smoothing) onehot(targets[t]) + smoothing / V. Returns 1x1.
  Var SmoothedCrossEntropy(Var logits, std::span<const int> targets,
                           int ignore, double smoothing);

  // Sum over rows r with a non-zero reference row of
  //   -sum_i reference(r, i) log(max(probs(r, i), floor)). Returns 1x1.
  Var ReferenceCrossEntropy(Var probs, const Matrix& reference,
                            double floor = 1e-9);

  // Seeds d(loss) = scale for a 1x1 node and runs the tape backwards.
  void Backward(Var loss, double scale = 1.0);

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    const Matrix* ref = nullptr;  // parameter value, not copied
    Matrix grad;
    std::function<void()> backward;
    Parameter* param = nullptr;
  };

  Var Push(Matrix value);
  Matrix& GradOf(int id);

  bool record_;
  std::vector<Node> nodes_;
};

}  // namespace aec::nn

#endif  // AEC_AUTOGRAD_H_
