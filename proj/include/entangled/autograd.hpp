#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "entangled/graph.hpp"

/// Minimal reverse-mode differentiation over dense matrices. Each op
/// records its inputs and a closure that pushes the output gradient back.
namespace entangled::ad {

struct Node {
  Matrix value;
  Matrix grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  void accumulate(const Matrix& g);
};

class Var {
public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  const Matrix& value() const { return node_->value; }
  /// Zero matrix of the value's shape when nothing flowed back.
  Matrix grad() const;
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  bool requires_grad() const { return node_->requires_grad; }
  const std::shared_ptr<Node>& node() const { return node_; }

private:
  std::shared_ptr<Node> node_;
};

Var constant(Matrix value);
Var parameter(Matrix value);

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
/// Adds a 1 x d row to every row of a.
Var add_row(const Var& a, const Var& row);
Var scale(const Var& a, double s);
Var hadamard(const Var& a, const Var& b);
Var relu(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var transpose(const Var& a);
/// Divides each row by its Euclidean norm (rows of norm < 1e-12 are left as is).
Var row_normalize(const Var& a);
/// Row-wise softmax with the row maximum subtracted first.
Var softmax_rows(const Var& a);
/// 1 x d mean over rows.
Var mean_rows(const Var& a);
/// n x 1 sum over columns.
Var sum_cols(const Var& a);
/// 1 x 1 sum of all entries.
Var sum(const Var& a);
Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index width);
Var concat_cols(std::span<const Var> parts);
Var gather_rows(const Var& a, std::span<const std::size_t> rows);
/// Negative log-softmax of `label` over a 1 x C row of logits, as 1 x 1.
Var cross_entropy(const Var& logits, std::size_t label);

/// Seeds d(out)/d(out) = 1 for a 1 x 1 output and runs the tape backwards.
void backward(const Var& out);

}  // namespace entangled::ad
