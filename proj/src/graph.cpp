#include "entangled/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "entangled/error.hpp"

namespace entangled {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::InvalidGraph: return "InvalidGraph";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::ZeroVarianceColumn: return "ZeroVarianceColumn";
    case ErrorKind::NegativeWeight: return "NegativeWeight";
    case ErrorKind::EigenFailure: return "EigenFailure";
    case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorKind::ECNoConvergence: return "ECNoConvergence";
    case ErrorKind::EmptyGraph: return "EmptyGraph";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NoNegatives: return "NoNegatives";
    case ErrorKind::SingleClassBatch: return "SingleClassBatch";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

TimeSeriesMatrix::TimeSeriesMatrix(Matrix values, std::vector<std::string> roi_names)
    : values_(std::move(values)), roi_names_(std::move(roi_names)) {
  if (values_.rows() < 2) {
    throw Error(ErrorKind::InvalidInput, "time series needs at least 2 time points");
  }
  if (!values_.allFinite()) {
    throw Error(ErrorKind::InvalidInput, "time series contains non-finite values");
  }
  if (!roi_names_.empty() && roi_names_.size() != static_cast<std::size_t>(values_.cols())) {
    throw Error(ErrorKind::InvalidInput, "roi name count does not match column count");
  }
}

BrainGraph::BrainGraph(Matrix adjacency, Matrix features)
    : adjacency_(std::move(adjacency)), features_(std::move(features)) {
  const auto n = adjacency_.rows();
  if (adjacency_.cols() != n) {
    throw Error(ErrorKind::InvalidGraph, "adjacency must be square");
  }
  if (features_.rows() != n) {
    throw Error(ErrorKind::InvalidGraph, "feature rows must equal node count");
  }
  if (!adjacency_.allFinite() || !features_.allFinite()) {
    throw Error(ErrorKind::InvalidGraph, "non-finite entries");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (adjacency_(i, i) != 0.0) {
      throw Error(ErrorKind::InvalidGraph, "nonzero diagonal at node " + std::to_string(i));
    }
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (adjacency_(i, j) != adjacency_(j, i)) {
        throw Error(ErrorKind::InvalidGraph, "adjacency is not symmetric");
      }
      if (adjacency_(i, j) < 0.0) {
        throw Error(ErrorKind::NegativeWeight,
                    "negative weight on edge (" + std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      if (adjacency_(i, j) > 0.0) {
        ++edge_count_;
      }
    }
  }
}

BrainGraph BrainGraph::from_edges(std::size_t n, const std::vector<Edge>& edges, Matrix features) {
  Matrix a = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const auto& e : edges) {
    if (e.i >= n || e.j >= n || e.i == e.j) {
      throw Error(ErrorKind::InvalidGraph, "edge endpoint out of range or self-loop");
    }
    a(e.i, e.j) = e.weight;
    a(e.j, e.i) = e.weight;
  }
  return BrainGraph(std::move(a), std::move(features));
}

BrainGraph BrainGraph::edgeless(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  return BrainGraph(Matrix::Zero(m, m), Matrix::Identity(m, m));
}

std::vector<Edge> BrainGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  const auto n = node_count();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (adjacency_(i, j) > 0.0) {
        out.push_back({i, j, adjacency_(i, j)});
      }
    }
  }
  return out;
}

std::vector<std::size_t> BrainGraph::neighbors(std::size_t i) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < node_count(); ++j) {
    if (adjacency_(i, j) > 0.0) {
      out.push_back(j);
    }
  }
  return out;
}

double BrainGraph::total_weight() const { return adjacency_.sum() / 2.0; }

double BrainGraph::max_weight() const {
  return adjacency_.size() == 0 ? 0.0 : adjacency_.maxCoeff();
}

BrainGraph BrainGraph::with_adjacency(Matrix adjacency) const {
  return BrainGraph(std::move(adjacency), features_);
}

BrainGraph BrainGraph::permuted(const std::vector<std::size_t>& perm) const {
  const auto n = node_count();
  if (perm.size() != n) {
    throw Error(ErrorKind::ShapeMismatch, "permutation length differs from node count");
  }
  Matrix a(n, n);
  Matrix f(n, features_.cols());
  for (std::size_t i = 0; i < n; ++i) {
    f.row(i) = features_.row(perm[i]);
    for (std::size_t j = 0; j < n; ++j) {
      a(i, j) = adjacency_(perm[i], perm[j]);
    }
  }
  return BrainGraph(std::move(a), std::move(f));
}

Matrix pearson_matrix(const TimeSeriesMatrix& ts) {
  const Matrix& x = ts.values();
  const auto t = static_cast<double>(x.rows());
  Matrix centered = x.rowwise() - x.colwise().mean();
  Vector sd = (centered.colwise().squaredNorm() / t).cwiseSqrt().transpose();
  for (Eigen::Index c = 0; c < sd.size(); ++c) {
    if (!(sd(c) > 0.0)) {
      throw Error(ErrorKind::ZeroVarianceColumn, "ROI column " + std::to_string(c) + " is constant");
    }
  }
  for (Eigen::Index c = 0; c < sd.size(); ++c) {
    centered.col(c) /= sd(c) * std::sqrt(t);
  }
  Matrix r = centered.transpose() * centered;
  // Unit-norm columns give |r| <= 1 up to rounding; clamp the residue.
  const Matrix sym = 0.5 * (r + r.transpose());
  r = sym.cwiseMax(-1.0).cwiseMin(1.0);
  r.diagonal().setOnes();
  return r;
}

BrainGraph pearson_graph(const TimeSeriesMatrix& ts, double threshold, FeatureKind features) {
  if (!(threshold >= 0.0)) {
    throw Error(ErrorKind::NegativeWeight, "threshold must be >= 0; negative weights are not supported");
  }
  Matrix r = pearson_matrix(ts);
  const auto n = r.rows();
  Matrix a = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && r(i, j) >= threshold) {
        a(i, j) = r(i, j);
      }
    }
  }
  Matrix x = features == FeatureKind::Identity ? Matrix(Matrix::Identity(n, n)) : r;
  return BrainGraph(std::move(a), std::move(x));
}

LaplacianMatrix laplacian(const BrainGraph& g) {
  const Matrix& a = g.adjacency();
  Matrix l = -a;
  l.diagonal() = a.rowwise().sum();
  return LaplacianMatrix(std::move(l));
}

double symmetric_norm2(const Matrix& m) {
  if (m.size() == 0) {
    return 0.0;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::EigenFailure, "symmetric eigensolver did not converge");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Splits random_splits(std::size_t count, std::uint64_t seed, double train_ratio, double val_ratio) {
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::floor(train_ratio * static_cast<double>(count)));
  const auto n_val = static_cast<std::size_t>(std::floor(val_ratio * static_cast<double>(count)));
  Splits s;
  s.train.assign(idx.begin(), idx.begin() + n_train);
  s.val.assign(idx.begin() + n_train, idx.begin() + n_train + n_val);
  s.test.assign(idx.begin() + n_train + n_val, idx.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

void LabeledDataset::validate() const {
  if (labels.size() != graphs.size()) {
    throw Error(ErrorKind::InvalidInput, "label count differs from graph count");
  }
  for (auto l : labels) {
    if (l >= num_classes) {
      throw Error(ErrorKind::InvalidInput, "label out of range");
    }
  }
  std::vector<int> seen(graphs.size(), 0);
  for (const auto* part : {&splits.train, &splits.val, &splits.test}) {
    for (auto i : *part) {
      if (i >= graphs.size() || seen[i]++ != 0) {
        throw Error(ErrorKind::InvalidInput, "splits do not partition the dataset");
      }
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw Error(ErrorKind::InvalidInput, "splits do not cover the dataset");
  }
}

}  // namespace entangled
