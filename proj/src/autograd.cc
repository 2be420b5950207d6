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

#include "aec/autograd.h"

#include <cmath>
#include <limits>

#include "aec/common.h"
#include "aec/errorsim.h"

namespace aec::nn {

namespace {

void CheckSameShape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::kDimMismatch, std::string(op) + ": shape mismatch");
  }
}

}  // namespace

Var Tape::Push(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Matrix& Tape::value(Var v) const {
  const Node& n = nodes_[v.id];
  return n.ref != nullptr ? *n.ref : n.value;
}

Matrix& Tape::GradOf(int id) {
  Node& n = nodes_[id];
  if (n.param != nullptr) return n.param->grad;
  if (n.grad.size() == 0) {
    const Matrix& v = n.ref != nullptr ? *n.ref : n.value;
    n.grad = Matrix::Zero(v.rows(), v.cols());
  }
  return n.grad;
}

Var Tape::Constant(Matrix value) { return Push(std::move(value)); }

Var Tape::Param(const Parameter& p) {
  Node n;
  n.ref = &p.value;
  if (record_) n.param = const_cast<Parameter*>(&p);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::MatMul(Var a, Var b) {
  if (value(a).cols() != value(b).rows()) {
    throw Error(ErrorKind::kDimMismatch, "MatMul: inner dimensions differ");
  }
  Var out = Push(value(a) * value(b));
  if (record_) {
    nodes_[out.id].backward = [this, a, b, out] {
      const Matrix& g = nodes_[out.id].grad;
      GradOf(a.id).noalias() += g * value(b).transpose();
      GradOf(b.id).noalias() += value(a).transpose() * g;
    };
  }
  return out;
}

Var Tape::MatMulTransposed(Var a, Var b) {
  if (value(a).cols() != value(b).cols()) {
    throw Error(ErrorKind::kDimMismatch, "MatMulTransposed: widths differ");
  }
  Var out = Push(value(a) * value(b).transpose());
  if (record_) {
    nodes_[out.id].backward = [this, a, b, out] {
      const Matrix& g = nodes_[out.id].grad;
      GradOf(a.id).noalias() += g * value(b);
      GradOf(b.id).noalias() += g.transpose() * value(a);
    };
  }
  return out;
}

Var Tape::Add(Var a, Var b) {
  CheckSameShape(value(a), value(b), "Add");
  Var out = Push(value(a) + value(b));
  if (record_) {
    nodes_[out.id].backward = [this, a, b, out] {
      const Matrix& g = nodes_[out.id].grad;
      GradOf(a.id) += g;
      GradOf(b.id) += g;
    };
  }
  return out;
}

Var Tape::AddRowBroadcast(Var a, Var row) {
  if (value(row).rows() != 1 || value(row).cols() != value(a).cols()) {
    throw Error(ErrorKind::kDimMismatch, "AddRowBroadcast: bad bias shape");
  }
  Matrix v = value(a);
  v.rowwise() += value(row).row(0);
  Var out = Push(std::move(v));
  if (record_) {
    nodes_[out.id].backward = [this, a, row, out] {
      const Matrix& g = nodes_[out.id].grad;
      GradOf(a.id) += g;
      GradOf(row.id) += g.colwise().sum();
    };
  }
  return out;
}

Var Tape::Scale(Var a, double s) {
  Var out = Push(value(a) * s);
  if (record_) {
    nodes_[out.id].backward = [this, a, s, out] {
      GradOf(a.id) += nodes_[out.id].grad * s;
    };
  }
  return out;
}

Var Tape::Tanh(Var a) {
  Var out = Push(value(a).array().tanh().matrix());
  if (record_) {
    nodes_[out.id].backward = [this, a, out] {
      const Matrix& y = nodes_[out.id].value;
      GradOf(a.id).array() +=
          nodes_[out.id].grad.array() * (1.0 - y.array().square());
    };
  }
  return out;
}

Var Tape::Relu(Var a) {
  Var out = Push(value(a).cwiseMax(0.0));
  if (record_) {
    nodes_[out.id].backward = [this, a, out] {
      GradOf(a.id).array() +=
          nodes_[out.id].grad.array() *
          (value(a).array() > 0.0).cast<double>();
    };
  }
  return out;
}

Var Tape::LayerNorm(Var x, Var gain, Var bias, double eps) {
  const Matrix& xv = value(x);
  const Eigen::Index rows = xv.rows();
  const Eigen::Index cols = xv.cols();
  if (value(gain).cols() != cols || value(bias).cols() != cols) {
    throw Error(ErrorKind::kDimMismatch, "LayerNorm: parameter width");
  }
  Matrix xhat(rows, cols);
  Eigen::VectorXd inv_std(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double mean = xv.row(r).mean();
    const double var = (xv.row(r).array() - mean).square().mean();
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (xv.row(r).array() - mean) * inv_std[r];
  }
  Matrix y = xhat;
  y.array().rowwise() *= value(gain).row(0).array();
  y.rowwise() += value(bias).row(0);
  Var out = Push(std::move(y));
  if (record_) {
    nodes_[out.id].backward = [this, x, gain, bias, out, xhat = std::move(xhat),
                               inv_std = std::move(inv_std)] {
      const Matrix& g = nodes_[out.id].grad;
      GradOf(gain.id) += (g.array() * xhat.array()).colwise().sum().matrix();
      GradOf(bias.id) += g.colwise().sum();
      Matrix dxhat = g;
      dxhat.array().rowwise() *= value(gain).row(0).array();
      Matrix& gx = GradOf(x.id);
      const double n = static_cast<double>(dxhat.cols());
      for (Eigen::Index r = 0; r < dxhat.rows(); ++r) {
        const double mean_d = dxhat.row(r).sum() / n;
        const double mean_dx = dxhat.row(r).dot(xhat.row(r)) / n;
        gx.row(r).array() += inv_std[r] * (dxhat.row(r).array() - mean_d -
                                           xhat.row(r).array() * mean_dx);
      }
    };
  }
  return out;
}

Var Tape::SoftmaxRows(Var x, const Matrix& mask) {
  Matrix y = value(x);
  if (mask.size() > 0) {
    CheckSameShape(y, mask, "SoftmaxRows");
    y += mask;
  }
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    const double mx = y.row(r).maxCoeff();
    if (!std::isfinite(mx)) {
      throw Error(ErrorKind::kInternal, "softmax row fully masked");
    }
    // Vectorized exp clamps -inf to a denormal; masked entries must be 0.
    for (Eigen::Index c = 0; c < y.cols(); ++c) {
      y(r, c) = std::isinf(y(r, c)) ? 0.0 : std::exp(y(r, c) - mx);
    }
    y.row(r) /= y.row(r).sum();
  }
  Var out = Push(std::move(y));
  if (record_) {
    nodes_[out.id].backward = [this, x, out] {
      const Matrix& yv = nodes_[out.id].value;
      const Matrix& g = nodes_[out.id].grad;
      const Eigen::VectorXd dot = (g.array() * yv.array()).rowwise().sum();
      Matrix d = g;
      d.colwise() -= dot;
      GradOf(x.id).array() += yv.array() * d.array();
    };
  }
  return out;
}

Var Tape::Gather(const Parameter& table, std::span<const int> ids) {
  Matrix v(static_cast<Eigen::Index>(ids.size()), table.value.cols());
  for (size_t k = 0; k < ids.size(); ++k) {
    if (ids[k] < 0 || ids[k] >= table.value.rows()) {
      throw Error(ErrorKind::kDimMismatch,
                  "Gather: id " + std::to_string(ids[k]) + " outside " +
                      table.name);
    }
    v.row(static_cast<Eigen::Index>(k)) = table.value.row(ids[k]);
  }
  Var out = Push(std::move(v));
  if (record_) {
    Parameter* p = const_cast<Parameter*>(&table);
    std::vector<int> rows(ids.begin(), ids.end());
    nodes_[out.id].backward = [this, p, rows = std::move(rows), out] {
      const Matrix& g = nodes_[out.id].grad;
      for (size_t k = 0; k < rows.size(); ++k) {
        p->grad.row(rows[k]) += g.row(static_cast<Eigen::Index>(k));
      }
    };
  }
  return out;
}

Var Tape::ConcatCols(std::span<const Var> parts) {
  Eigen::Index rows = parts.empty() ? 0 : value(parts[0]).rows();
  Eigen::Index cols = 0;
  for (Var p : parts) {
    if (value(p).rows() != rows) {
      throw Error(ErrorKind::kDimMismatch, "ConcatCols: row counts differ");
    }
    cols += value(p).cols();
  }
  Matrix v(rows, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    v.middleCols(at, value(p).cols()) = value(p);
    at += value(p).cols();
  }
  Var out = Push(std::move(v));
  if (record_) {
    std::vector<Var> saved(parts.begin(), parts.end());
    nodes_[out.id].backward = [this, saved = std::move(saved), out] {
      const Matrix& g = nodes_[out.id].grad;
      Eigen::Index at = 0;
      for (Var p : saved) {
        const Eigen::Index w = value(p).cols();
        GradOf(p.id) += g.middleCols(at, w);
        at += w;
      }
    };
  }
  return out;
}

Var Tape::SliceCols(Var a, int start, int width) {
  if (start < 0 || width < 0 || start + width > value(a).cols()) {
    throw Error(ErrorKind::kDimMismatch, "SliceCols: out of range");
  }
  Var out = Push(value(a).middleCols(start, width));
  if (record_) {
    nodes_[out.id].backward = [this, a, start, width, out] {
      GradOf(a.id).middleCols(start, width) += nodes_[out.id].grad;
    };
  }
  return out;
}

Var Tape::Mean(std::span<const Var> parts) {
  if (parts.empty()) throw Error(ErrorKind::kDimMismatch, "Mean of nothing");
  Matrix v = value(parts[0]);
  for (size_t k = 1; k < parts.size(); ++k) {
    CheckSameShape(v, value(parts[k]), "Mean");
    v += value(parts[k]);
  }
  const double inv = 1.0 / static_cast<double>(parts.size());
  v *= inv;
  Var out = Push(std::move(v));
  if (record_) {
    std::vector<Var> saved(parts.begin(), parts.end());
    nodes_[out.id].backward = [this, saved = std::move(saved), inv, out] {
      for (Var p : saved) GradOf(p.id) += nodes_[out.id].grad * inv;
    };
  }
  return out;
}

Var Tape::Dropout(Var a, double p, noise::Rng& rng) {
  if (p <= 0.0) return a;
  const double keep_scale = 1.0 / (1.0 - p);
  Matrix mask(value(a).rows(), value(a).cols());
  for (Eigen::Index k = 0; k < mask.size(); ++k) {
    mask.data()[k] = rng.Uniform() < p ? 0.0 : keep_scale;
  }
  Var out = Push(value(a).cwiseProduct(mask));
  if (record_) {
    nodes_[out.id].backward = [this, a, out, mask = std::move(mask)] {
      GradOf(a.id) += nodes_[out.id].grad.cwiseProduct(mask);
    };
  }
  return out;
}

Var Tape::SmoothedCrossEntropy(Var logits, std::span<const int> targets,
                               int ignore, double smoothing) {
  const Matrix& x = value(logits);
  if (static_cast<Eigen::Index>(targets.size()) != x.rows()) {
    throw Error(ErrorKind::kDimMismatch,
                "SmoothedCrossEntropy: one target per row expected");
  }
  const Eigen::Index vocab = x.cols();
  const double off = smoothing / static_cast<double>(vocab);
  Matrix probs(x.rows(), vocab);
  double loss = 0.0;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mx = x.row(r).maxCoeff();
    const double lse = mx + std::log((x.row(r).array() - mx).exp().sum());
    probs.row(r) = (x.row(r).array() - lse).exp().matrix();
    const int t = targets[r];
    if (t == ignore) continue;
    if (t < 0 || t >= vocab) {
      throw Error(ErrorKind::kDimMismatch, "target id outside vocabulary");
    }
    // -sum_v q(v) (x_v - lse)
    loss -= (1.0 - smoothing) * (x(r, t) - lse);
    if (smoothing > 0.0) loss -= off * (x.row(r).sum() - vocab * lse);
  }
  Matrix v(1, 1);
  v(0, 0) = loss;
  Var out = Push(std::move(v));
  if (record_) {
    std::vector<int> saved(targets.begin(), targets.end());
    nodes_[out.id].backward = [this, logits, out, ignore, smoothing, off,
                               saved = std::move(saved),
                               probs = std::move(probs)] {
      const double g = nodes_[out.id].grad(0, 0);
      Matrix& gx = GradOf(logits.id);
      for (Eigen::Index r = 0; r < probs.rows(); ++r) {
        const int t = saved[r];
        if (t == ignore) continue;
        gx.row(r) += g * probs.row(r);
        gx(r, t) -= g * (1.0 - smoothing);
        if (smoothing > 0.0) gx.row(r).array() -= g * off;
      }
    };
  }
  return out;
}

Var Tape::ReferenceCrossEntropy(Var probs, const Matrix& reference,
                                double floor) {
  const Matrix& p = value(probs);
  CheckSameShape(p, reference, "ReferenceCrossEntropy");
  double loss = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double q = reference.data()[k];
    if (q != 0.0) loss -= q * std::log(std::max(p.data()[k], floor));
  }
  Matrix v(1, 1);
  v(0, 0) = loss;
  Var out = Push(std::move(v));
  if (record_) {
    nodes_[out.id].backward = [this, probs, out, reference, floor] {
      const double g = nodes_[out.id].grad(0, 0);
      const Matrix& pv = value(probs);
      Matrix& gp = GradOf(probs.id);
      for (Eigen::Index k = 0; k < pv.size(); ++k) {
        const double q = reference.data()[k];
        if (q != 0.0 && pv.data()[k] > floor) {
          gp.data()[k] -= g * q / pv.data()[k];
        }
      }
    };
  }
  return out;
}

void Tape::Backward(Var loss, double scale) {
  if (!record_) {
    throw Error(ErrorKind::kInternal, "Backward on a non-recording tape");
  }
  if (value(loss).size() != 1) {
    throw Error(ErrorKind::kDimMismatch, "Backward needs a scalar loss");
  }
  GradOf(loss.id)(0, 0) += scale;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0 || !n.backward) continue;
    n.backward();
  }
}

}  // namespace aec::nn
