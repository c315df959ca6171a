#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace entangled {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// T x n matrix of ROI signals, one column per region.
class TimeSeriesMatrix {
public:
  TimeSeriesMatrix(Matrix values, std::vector<std::string> roi_names = {});

  const Matrix& values() const { return values_; }
  const std::vector<std::string>& roi_names() const { return roi_names_; }
  std::size_t time_points() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t rois() const { return static_cast<std::size_t>(values_.cols()); }

private:
  Matrix values_;
  std::vector<std::string> roi_names_;
};

struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  double weight = 0.0;
};

/// Weighted undirected graph with node features. Immutable once built.
///
/// The adjacency must be symmetric with zero diagonal and finite,
/// non-negative weights. Construction validates this and throws
/// `Error{InvalidGraph}` or `Error{NegativeWeight}` otherwise.
class BrainGraph {
public:
  BrainGraph() = default;
  BrainGraph(Matrix adjacency, Matrix features);

  /// Builds a graph from an edge list (i != j). Duplicate pairs overwrite.
  static BrainGraph from_edges(std::size_t n, const std::vector<Edge>& edges, Matrix features);
  /// Edgeless graph on n nodes with identity features.
  static BrainGraph edgeless(std::size_t n);

  std::size_t node_count() const { return static_cast<std::size_t>(adjacency_.rows()); }
  std::size_t edge_count() const { return edge_count_; }
  std::size_t feature_dim() const { return static_cast<std::size_t>(features_.cols()); }
  const Matrix& adjacency() const { return adjacency_; }
  const Matrix& features() const { return features_; }
  double weight(std::size_t i, std::size_t j) const { return adjacency_(i, j); }
  bool has_edge(std::size_t i, std::size_t j) const { return adjacency_(i, j) > 0.0; }

  /// Edges with i < j in lexicographic order.
  std::vector<Edge> edges() const;
  std::vector<std::size_t> neighbors(std::size_t i) const;
  double total_weight() const;
  double max_weight() const;

  /// Same nodes and features, new adjacency.
  BrainGraph with_adjacency(Matrix adjacency) const;
  /// Relabels nodes: node i of the result is node perm[i] of this graph.
  BrainGraph permuted(const std::vector<std::size_t>& perm) const;

private:
  Matrix adjacency_;
  Matrix features_;
  std::size_t edge_count_ = 0;
};

/// Symmetric L = D - A.
class LaplacianMatrix {
public:
  explicit LaplacianMatrix(Matrix entries) : entries_(std::move(entries)) {}
  const Matrix& entries() const { return entries_; }
  std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }

private:
  Matrix entries_;
};

enum class FeatureKind { CorrelationProfile, Identity };

/// Full Pearson correlation matrix of the columns of `ts`.
Matrix pearson_matrix(const TimeSeriesMatrix& ts);

/// Thresholded PCC graph: edges keep their correlation as weight when
/// PCC >= threshold. Features are the unthresholded correlation rows.
BrainGraph pearson_graph(const TimeSeriesMatrix& ts, double threshold,
                         FeatureKind features = FeatureKind::CorrelationProfile);

LaplacianMatrix laplacian(const BrainGraph& g);

/// Spectral norm of a symmetric matrix.
double symmetric_norm2(const Matrix& m);

struct Splits {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Seeded random 80/10/10-style split of 0..count-1.
Splits random_splits(std::size_t count, std::uint64_t seed, double train_ratio = 0.8,
                     double val_ratio = 0.1);

struct GraphMetadata {
  std::vector<std::size_t> modules;  // planted module id per node
  std::vector<std::size_t> hubs;     // planted hub nodes
};

struct LabeledDataset {
  std::vector<BrainGraph> graphs;
  std::vector<std::size_t> labels;
  std::vector<GraphMetadata> metadata;
  std::size_t num_classes = 2;
  Splits splits;

  std::size_t size() const { return graphs.size(); }
  /// Throws InvalidInput when splits do not partition 0..size-1 or labels are out of range.
  void validate() const;
};

}  // namespace entangled
