// Copyright 2026 The Spanedit Authors.
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

#include "spanedit/autodiff.h"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace spanedit::autodiff {
namespace {

thread_local bool grad_enabled = true;

void CheckSameShape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(
        std::string(op) + ": shape mismatch " + std::to_string(a.rows()) +
        "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
        "x" + std::to_string(b.cols()));
  }
}

Matrix SoftmaxOf(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double m = x.row(r).maxCoeff();
    out.row(r) = (x.row(r).array() - m).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

}  // namespace

Matrix Tensor::grad() const {
  if (node_->grad.size() == 0) {
    return Matrix::Zero(node_->value.rows(), node_->value.cols());
  }
  return node_->grad;
}

Tensor Tensor::Constant(Matrix value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  return Tensor(std::move(node));
}

Tensor Tensor::Parameter(Matrix value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = true;
  return Tensor(std::move(node));
}

void Tensor::Backward(double seed) const {
  if (node_->value.size() != 1) {
    throw std::invalid_argument("Backward() needs a 1x1 tensor");
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS; `order` ends up parents-before-children.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  node_->EnsureGrad()(0, 0) += seed;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward && n->grad.size() != 0) n->backward(*n);
  }
}

Tensor MakeResult(Matrix value, std::vector<Tensor> parents,
                  std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  if (grad_enabled) {
    bool any = false;
    for (const auto& p : parents) any = any || p.requires_grad();
    if (any) {
      node->requires_grad = true;
      node->parents.reserve(parents.size());
      for (auto& p : parents) node->parents.push_back(p.node());
      node->backward = std::move(backward);
    }
  }
  return Tensor(std::move(node));
}

bool GradEnabled() { return grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(grad_enabled) { grad_enabled = false; }
NoGradGuard::~NoGradGuard() { grad_enabled = previous_; }

Tensor MatMul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("MatMul: inner dimensions differ");
  }
  return MakeResult(a.value() * b.value(), {a, b}, [](Node& n) {
    Node& pa = *n.parents[0];
    Node& pb = *n.parents[1];
    if (pa.requires_grad) pa.EnsureGrad().noalias() += n.grad * pb.value.transpose();
    if (pb.requires_grad) pb.EnsureGrad().noalias() += pa.value.transpose() * n.grad;
  });
}

Tensor MatMulTransposed(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("MatMulTransposed: column counts differ");
  }
  return MakeResult(a.value() * b.value().transpose(), {a, b}, [](Node& n) {
    Node& pa = *n.parents[0];
    Node& pb = *n.parents[1];
    if (pa.requires_grad) pa.EnsureGrad().noalias() += n.grad * pb.value;
    if (pb.requires_grad) pb.EnsureGrad().noalias() += n.grad.transpose() * pa.value;
  });
}

Tensor Add(const Tensor& a, const Tensor& b) {
  CheckSameShape(a.value(), b.value(), "Add");
  return MakeResult(a.value() + b.value(), {a, b}, [](Node& n) {
    for (auto& p : n.parents) {
      if (p->requires_grad) p->EnsureGrad() += n.grad;
    }
  });
}

Tensor AddRow(const Tensor& a, const Tensor& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw std::invalid_argument("AddRow: row must be 1 x cols(a)");
  }
  Matrix v = a.value();
  v.rowwise() += row.value().row(0);
  return MakeResult(std::move(v), {a, row}, [](Node& n) {
    Node& pa = *n.parents[0];
    Node& pr = *n.parents[1];
    if (pa.requires_grad) pa.EnsureGrad() += n.grad;
    if (pr.requires_grad) pr.EnsureGrad() += n.grad.colwise().sum();
  });
}

Tensor AddConstant(const Tensor& a, const Matrix& c) {
  CheckSameShape(a.value(), c, "AddConstant");
  return MakeResult(a.value() + c, {a}, [](Node& n) {
    n.parents[0]->EnsureGrad() += n.grad;
  });
}

Tensor Scale(const Tensor& a, double s) {
  return MakeResult(a.value() * s, {a}, [s](Node& n) {
    n.parents[0]->EnsureGrad() += n.grad * s;
  });
}

Tensor Relu(const Tensor& a) {
  return MakeResult(a.value().cwiseMax(0.0), {a}, [](Node& n) {
    Node& p = *n.parents[0];
    p.EnsureGrad().array() +=
        n.grad.array() * (p.value.array() > 0.0).cast<double>();
  });
}

Tensor LayerNorm(const Tensor& a, const Tensor& gain, const Tensor& bias,
                 double eps) {
  const Matrix& x = a.value();
  const Eigen::Index rows = x.rows(), cols = x.cols();
  Matrix xhat(rows, cols);
  Eigen::VectorXd inv_std(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (x.row(r).array() - mean) * inv_std(r);
  }
  Matrix y = xhat;
  y.array().rowwise() *= gain.value().row(0).array();
  y.rowwise() += bias.value().row(0);
  return MakeResult(
      std::move(y), {a, gain, bias},
      [xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& n) {
        Node& px = *n.parents[0];
        Node& pg = *n.parents[1];
        Node& pb = *n.parents[2];
        if (pg.requires_grad) {
          pg.EnsureGrad() += (n.grad.array() * xhat.array()).colwise().sum().matrix();
        }
        if (pb.requires_grad) pb.EnsureGrad() += n.grad.colwise().sum();
        if (px.requires_grad) {
          Matrix dxhat = n.grad;
          dxhat.array().rowwise() *= pg.value.row(0).array();
          Matrix& gx = px.EnsureGrad();
          for (Eigen::Index r = 0; r < dxhat.rows(); ++r) {
            const double m1 = dxhat.row(r).mean();
            const double m2 = (dxhat.row(r).array() * xhat.row(r).array()).mean();
            gx.row(r).array() +=
                inv_std(r) * (dxhat.row(r).array() - m1 - xhat.row(r).array() * m2);
          }
        }
      });
}

Tensor SoftmaxRows(const Tensor& a) {
  Matrix p = SoftmaxOf(a.value());
  return MakeResult(p, {a}, [p](Node& n) {
    Matrix& g = n.parents[0]->EnsureGrad();
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      const double dot = n.grad.row(r).dot(p.row(r));
      g.row(r).array() += p.row(r).array() * (n.grad.row(r).array() - dot);
    }
  });
}

Matrix LogSoftmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    const double lse = m + std::log((logits.row(r).array() - m).exp().sum());
    out.row(r) = logits.row(r).array() - lse;
  }
  return out;
}

Tensor LogSoftmaxRows(const Tensor& a) {
  Matrix out = LogSoftmax(a.value());
  Matrix p = out.array().exp();
  return MakeResult(std::move(out), {a}, [p = std::move(p)](Node& n) {
    Matrix& g = n.parents[0]->EnsureGrad();
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      const double total = n.grad.row(r).sum();
      g.row(r) += n.grad.row(r) - p.row(r) * total;
    }
  });
}

Tensor ConcatCols(std::span<const Tensor> parts) {
  if (parts.empty()) throw std::invalid_argument("ConcatCols: no inputs");
  const Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw std::invalid_argument("ConcatCols: row mismatch");
    cols += p.cols();
  }
  Matrix v(rows, cols);
  std::vector<Eigen::Index> offsets;
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    v.middleCols(off, p.cols()) = p.value();
    offsets.push_back(off);
    off += p.cols();
  }
  return MakeResult(std::move(v), {parts.begin(), parts.end()},
                    [offsets = std::move(offsets)](Node& n) {
                      for (std::size_t k = 0; k < n.parents.size(); ++k) {
                        Node& p = *n.parents[k];
                        if (!p.requires_grad) continue;
                        p.EnsureGrad() += n.grad.middleCols(offsets[k], p.value.cols());
                      }
                    });
}

Tensor ConcatRows(std::span<const Tensor> parts) {
  if (parts.empty()) throw std::invalid_argument("ConcatRows: no inputs");
  const Eigen::Index cols = parts[0].cols();
  Eigen::Index rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) throw std::invalid_argument("ConcatRows: column mismatch");
    rows += p.rows();
  }
  Matrix v(rows, cols);
  std::vector<Eigen::Index> offsets;
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    v.middleRows(off, p.rows()) = p.value();
    offsets.push_back(off);
    off += p.rows();
  }
  return MakeResult(std::move(v), {parts.begin(), parts.end()},
                    [offsets = std::move(offsets)](Node& n) {
                      for (std::size_t k = 0; k < n.parents.size(); ++k) {
                        Node& p = *n.parents[k];
                        if (!p.requires_grad) continue;
                        p.EnsureGrad() += n.grad.middleRows(offsets[k], p.value.rows());
                      }
                    });
}

Tensor SliceCols(const Tensor& a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || start + count > a.cols()) {
    throw std::invalid_argument("SliceCols: out of range");
  }
  return MakeResult(a.value().middleCols(start, count), {a},
                    [start, count](Node& n) {
                      n.parents[0]->EnsureGrad().middleCols(start, count) += n.grad;
                    });
}

Tensor SliceRows(const Tensor& a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || start + count > a.rows()) {
    throw std::invalid_argument("SliceRows: out of range");
  }
  return MakeResult(a.value().middleRows(start, count), {a},
                    [start, count](Node& n) {
                      n.parents[0]->EnsureGrad().middleRows(start, count) += n.grad;
                    });
}

Tensor GatherRows(const Tensor& table, std::span<const int> indices) {
  Matrix v(static_cast<Eigen::Index>(indices.size()), table.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= table.rows()) {
      throw std::out_of_range("GatherRows: index " + std::to_string(indices[i]) +
                              " outside table of " + std::to_string(table.rows()) +
                              " rows");
    }
    v.row(static_cast<Eigen::Index>(i)) = table.value().row(indices[i]);
  }
  std::vector<int> idx(indices.begin(), indices.end());
  return MakeResult(std::move(v), {table}, [idx = std::move(idx)](Node& n) {
    Matrix& g = n.parents[0]->EnsureGrad();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      g.row(idx[i]) += n.grad.row(static_cast<Eigen::Index>(i));
    }
  });
}

Tensor CrossEntropy(const Tensor& logits, std::span<const int> targets) {
  if (static_cast<Eigen::Index>(targets.size()) != logits.rows() ||
      targets.empty()) {
    throw std::invalid_argument("CrossEntropy: one target per row required");
  }
  Matrix logp = LogSoftmax(logits.value());
  double total = 0.0;
  for (std::size_t r = 0; r < targets.size(); ++r) {
    if (targets[r] < 0 || targets[r] >= logits.cols()) {
      throw std::out_of_range("CrossEntropy: target " + std::to_string(targets[r]) +
                              " outside " + std::to_string(logits.cols()) +
                              " classes");
    }
    total -= logp(static_cast<Eigen::Index>(r), targets[r]);
  }
  const double rows = static_cast<double>(targets.size());
  Matrix value(1, 1);
  value(0, 0) = total / rows;
  std::vector<int> tgt(targets.begin(), targets.end());
  return MakeResult(std::move(value), {logits},
                    [logp = std::move(logp), tgt = std::move(tgt), rows](Node& n) {
                      Matrix d = logp.array().exp();
                      for (std::size_t r = 0; r < tgt.size(); ++r) {
                        d(static_cast<Eigen::Index>(r), tgt[r]) -= 1.0;
                      }
                      n.parents[0]->EnsureGrad() += d * (n.grad(0, 0) / rows);
                    });
}

Matrix CausalMask(Eigen::Index queries, Eigen::Index keys,
                  Eigen::Index offset) {
  Matrix m = Matrix::Zero(queries, keys);
  const double neg_inf = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < queries; ++i) {
    for (Eigen::Index j = i + offset + 1; j < keys; ++j) m(i, j) = neg_inf;
  }
  return m;
}

}  // namespace spanedit::autodiff
