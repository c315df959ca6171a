#include "entangled/autograd.hpp"

#include <cmath>
#include <unordered_set>

#include "entangled/error.hpp"

namespace entangled::ad {
namespace {

Var make(Matrix value, std::vector<std::shared_ptr<Node>> parents, std::function<void(Node&)> bw) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  for (const auto& p : parents) {
    node->requires_grad = node->requires_grad || p->requires_grad;
  }
  if (node->requires_grad) {
    node->parents = std::move(parents);
    node->backward = std::move(bw);
  }
  return Var(std::move(node));
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::ShapeMismatch, std::string(op) + ": shape mismatch");
  }
}

}  // namespace

void Node::accumulate(const Matrix& g) {
  if (!requires_grad) {
    return;
  }
  if (grad.size() == 0) {
    grad = g;
  } else {
    grad += g;
  }
}

Matrix Var::grad() const {
  if (node_->grad.size() == 0) {
    return Matrix::Zero(node_->value.rows(), node_->value.cols());
  }
  return node_->grad;
}

Var constant(Matrix value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  return Var(std::move(node));
}

Var parameter(Matrix value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = true;
  return Var(std::move(node));
}

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorKind::ShapeMismatch, "matmul: inner dimensions differ");
  }
  auto pa = a.node();
  auto pb = b.node();
  return make(a.value() * b.value(), {pa, pb}, [pa, pb](Node& out) {
    if (pa->requires_grad) {
      pa->accumulate(out.grad * pb->value.transpose());
    }
    if (pb->requires_grad) {
      pb->accumulate(pa->value.transpose() * out.grad);
    }
  });
}

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  auto pa = a.node();
  auto pb = b.node();
  return make(a.value() + b.value(), {pa, pb}, [pa, pb](Node& out) {
    pa->accumulate(out.grad);
    pb->accumulate(out.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  auto pa = a.node();
  auto pb = b.node();
  return make(a.value() - b.value(), {pa, pb}, [pa, pb](Node& out) {
    pa->accumulate(out.grad);
    pb->accumulate(-out.grad);
  });
}

Var add_row(const Var& a, const Var& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "add_row: row must be 1 x cols");
  }
  auto pa = a.node();
  auto pr = row.node();
  Matrix v = a.value().rowwise() + row.value().row(0);
  return make(std::move(v), {pa, pr}, [pa, pr](Node& out) {
    pa->accumulate(out.grad);
    if (pr->requires_grad) {
      pr->accumulate(out.grad.colwise().sum());
    }
  });
}

Var scale(const Var& a, double s) {
  auto pa = a.node();
  return make(a.value() * s, {pa}, [pa, s](Node& out) { pa->accumulate(out.grad * s); });
}

Var hadamard(const Var& a, const Var& b) {
  require_same_shape(a, b, "hadamard");
  auto pa = a.node();
  auto pb = b.node();
  return make(a.value().cwiseProduct(b.value()), {pa, pb}, [pa, pb](Node& out) {
    if (pa->requires_grad) {
      pa->accumulate(out.grad.cwiseProduct(pb->value));
    }
    if (pb->requires_grad) {
      pb->accumulate(out.grad.cwiseProduct(pa->value));
    }
  });
}

Var relu(const Var& a) {
  auto pa = a.node();
  return make(a.value().cwiseMax(0.0), {pa}, [pa](Node& out) {
    pa->accumulate((pa->value.array() > 0.0).cast<double>().matrix().cwiseProduct(out.grad));
  });
}

Var exp(const Var& a) {
  auto pa = a.node();
  Matrix v = a.value().array().exp().matrix();
  return make(v, {pa}, [pa](Node& out) { pa->accumulate(out.grad.cwiseProduct(out.value)); });
}

Var log(const Var& a) {
  auto pa = a.node();
  return make(a.value().array().log().matrix(), {pa}, [pa](Node& out) {
    pa->accumulate(out.grad.cwiseQuotient(pa->value));
  });
}

Var transpose(const Var& a) {
  auto pa = a.node();
  return make(a.value().transpose(), {pa}, [pa](Node& out) { pa->accumulate(out.grad.transpose()); });
}

Var row_normalize(const Var& a) {
  auto pa = a.node();
  const Matrix& x = a.value();
  Vector norms = x.rowwise().norm();
  for (Eigen::Index r = 0; r < norms.size(); ++r) {
    if (norms(r) < 1e-12) {
      norms(r) = 1.0;
    }
  }
  Matrix y = x.array().colwise() / norms.array();
  return make(std::move(y), {pa}, [pa, norms](Node& out) {
    // dx = (g - y (y . g)) / |x|
    const Matrix& y = out.value;
    const Vector dots = y.cwiseProduct(out.grad).rowwise().sum();
    Matrix g = out.grad - (y.array().colwise() * dots.array()).matrix();
    g = g.array().colwise() / norms.array();
    pa->accumulate(g);
  });
}

Var softmax_rows(const Var& a) {
  auto pa = a.node();
  Matrix y = a.value();
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    const double m = y.row(r).maxCoeff();
    y.row(r) = (y.row(r).array() - m).exp().matrix();
    y.row(r) /= y.row(r).sum();
  }
  return make(std::move(y), {pa}, [pa](Node& out) {
    const Matrix& y = out.value;
    const Vector dots = y.cwiseProduct(out.grad).rowwise().sum();
    Matrix g = y.cwiseProduct((out.grad.colwise() - dots));
    pa->accumulate(g);
  });
}

Var mean_rows(const Var& a) {
  auto pa = a.node();
  const double n = static_cast<double>(a.rows());
  return make(a.value().colwise().mean(), {pa}, [pa, n](Node& out) {
    pa->accumulate(out.grad.replicate(pa->value.rows(), 1) / n);
  });
}

Var sum_cols(const Var& a) {
  auto pa = a.node();
  return make(a.value().rowwise().sum(), {pa}, [pa](Node& out) {
    pa->accumulate(out.grad.replicate(1, pa->value.cols()));
  });
}

Var sum(const Var& a) {
  auto pa = a.node();
  Matrix v(1, 1);
  v(0, 0) = a.value().sum();
  return make(std::move(v), {pa}, [pa](Node& out) {
    pa->accumulate(Matrix::Constant(pa->value.rows(), pa->value.cols(), out.grad(0, 0)));
  });
}

Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index width) {
  if (start < 0 || width < 0 || start + width > a.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "slice_cols: range out of bounds");
  }
  auto pa = a.node();
  return make(a.value().middleCols(start, width), {pa}, [pa, start, width](Node& out) {
    Matrix g = Matrix::Zero(pa->value.rows(), pa->value.cols());
    g.middleCols(start, width) = out.grad;
    pa->accumulate(g);
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) {
    throw Error(ErrorKind::ShapeMismatch, "concat_cols: nothing to concatenate");
  }
  const auto rows = parts[0].rows();
  Eigen::Index cols = 0;
  std::vector<std::shared_ptr<Node>> parents;
  std::vector<Eigen::Index> widths;
  for (const auto& p : parts) {
    if (p.rows() != rows) {
      throw Error(ErrorKind::ShapeMismatch, "concat_cols: row counts differ");
    }
    cols += p.cols();
    parents.push_back(p.node());
    widths.push_back(p.cols());
  }
  Matrix v(rows, cols);
  Eigen::Index offset = 0;
  for (const auto& p : parts) {
    v.middleCols(offset, p.cols()) = p.value();
    offset += p.cols();
  }
  auto ps = parents;
  return make(std::move(v), std::move(parents), [ps, widths](Node& out) {
    Eigen::Index off = 0;
    for (std::size_t k = 0; k < ps.size(); ++k) {
      ps[k]->accumulate(out.grad.middleCols(off, widths[k]));
      off += widths[k];
    }
  });
}

Var gather_rows(const Var& a, std::span<const std::size_t> rows) {
  auto pa = a.node();
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  Matrix v(static_cast<Eigen::Index>(idx.size()), a.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= static_cast<std::size_t>(a.rows())) {
      throw Error(ErrorKind::ShapeMismatch, "gather_rows: index out of range");
    }
    v.row(static_cast<Eigen::Index>(r)) = a.value().row(static_cast<Eigen::Index>(idx[r]));
  }
  return make(std::move(v), {pa}, [pa, idx](Node& out) {
    Matrix g = Matrix::Zero(pa->value.rows(), pa->value.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      g.row(static_cast<Eigen::Index>(idx[r])) += out.grad.row(static_cast<Eigen::Index>(r));
    }
    pa->accumulate(g);
  });
}

Var cross_entropy(const Var& logits, std::size_t label) {
  if (logits.rows() != 1 || label >= static_cast<std::size_t>(logits.cols())) {
    throw Error(ErrorKind::ShapeMismatch, "cross_entropy: expects a 1 x C row and a valid label");
  }
  auto pl = logits.node();
  const Eigen::RowVectorXd z = logits.value().row(0);
  const double m = z.maxCoeff();
  const double lse = m + std::log((z.array() - m).exp().sum());
  Matrix v(1, 1);
  v(0, 0) = lse - z(static_cast<Eigen::Index>(label));
  Matrix probs = (z.array() - lse).exp().matrix();
  return make(std::move(v), {pl}, [pl, probs, label](Node& out) {
    Matrix g = probs;
    g(0, static_cast<Eigen::Index>(label)) -= 1.0;
    pl->accumulate(g * out.grad(0, 0));
  });
}

void backward(const Var& out) {
  if (out.rows() != 1 || out.cols() != 1) {
    throw Error(ErrorKind::ShapeMismatch, "backward expects a scalar output");
  }
  if (!out.requires_grad()) {
    return;
  }
  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{out.node().get(), 0}};
  visited.insert(out.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) {
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  out.node()->grad = Matrix::Ones(1, 1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward && n->grad.size() != 0) {
      n->backward(*n);
    }
  }
}

}  // namespace entangled::ad
