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

// Minimal reverse-mode differentiation over row-major double matrices.
//
// Every op returns a Tensor holding its value and, while gradients are
// enabled and some input requires them, a closure that propagates the
// output gradient back to its inputs. Tensor::Backward() on a 1x1 result
// runs the closures in reverse topological order and accumulates into the
// leaf parameters. Graph nodes are reference counted and die with the last
// Tensor that reaches them.

#ifndef SPANEDIT_AUTODIFF_H_
#define SPANEDIT_AUTODIFF_H_

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace spanedit::autodiff {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic, Eigen::RowMajor>;

struct Node {
  Matrix value;
  Matrix grad;  // empty until the first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  Matrix& EnsureGrad() {
    if (grad.size() == 0) grad = Matrix::Zero(value.rows(), value.cols());
    return grad;
  }
};

class Tensor {
 public:
  Tensor() = default;

  static Tensor Constant(Matrix value);
  // A leaf that accumulates gradients.
  static Tensor Parameter(Matrix value);

  bool defined() const { return node_ != nullptr; }
  const Matrix& value() const { return node_->value; }
  Matrix& mutable_value() { return node_->value; }
  // Zero matrix when no gradient has reached this tensor.
  Matrix grad() const;
  void ZeroGrad() { node_->grad.resize(0, 0); }
  bool requires_grad() const { return node_->requires_grad; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  double scalar() const { return node_->value(0, 0); }

  // Seeds d(this)/d(this) = `seed` for a 1x1 tensor and back-propagates.
  void Backward(double seed = 1.0) const;

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  friend Tensor MakeResult(Matrix, std::vector<Tensor>,
                           std::function<void(Node&)>);

  std::shared_ptr<Node> node_;
};

// Builds an op result. Parents and the closure are dropped when gradients
// are disabled or no parent requires them.
Tensor MakeResult(Matrix value, std::vector<Tensor> parents,
                  std::function<void(Node&)> backward);

bool GradEnabled();

// Disables graph recording on this thread for the guard's lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

Tensor MatMul(const Tensor& a, const Tensor& b);
// a * b^T
Tensor MatMulTransposed(const Tensor& a, const Tensor& b);
Tensor Add(const Tensor& a, const Tensor& b);
// Adds the 1 x n `row` to every row of `a`.
Tensor AddRow(const Tensor& a, const Tensor& row);
// Adds a constant matrix (no gradient), e.g. an attention mask.
Tensor AddConstant(const Tensor& a, const Matrix& c);
Tensor Scale(const Tensor& a, double s);
Tensor Relu(const Tensor& a);
// Row-wise layer normalisation with 1 x n gain and bias.
Tensor LayerNorm(const Tensor& a, const Tensor& gain, const Tensor& bias,
                 double eps = 1e-5);
Tensor SoftmaxRows(const Tensor& a);
Tensor LogSoftmaxRows(const Tensor& a);
Tensor ConcatCols(std::span<const Tensor> parts);
Tensor ConcatRows(std::span<const Tensor> parts);
Tensor SliceCols(const Tensor& a, Eigen::Index start, Eigen::Index count);
Tensor SliceRows(const Tensor& a, Eigen::Index start, Eigen::Index count);
Tensor GatherRows(const Tensor& table, std::span<const int> indices);
// Mean over rows of -log softmax(logits)[row, target]; 1x1 result.
Tensor CrossEntropy(const Tensor& logits, std::span<const int> targets);

// x W + b
inline Tensor Linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  return AddRow(MatMul(x, w), b);
}

// Row-wise log-softmax of a plain matrix.
Matrix LogSoftmax(const Matrix& logits);

// Additive mask: 0 where key column j <= query row i + offset, -inf
// otherwise. `offset` shifts the visible window for a suffix of queries.
Matrix CausalMask(Eigen::Index queries, Eigen::Index keys,
                  Eigen::Index offset = 0);

}  // namespace spanedit::autodiff

#endif  // SPANEDIT_AUTODIFF_H_
