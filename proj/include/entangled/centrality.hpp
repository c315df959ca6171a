#pragma once

#include <optional>
#include <string>
#include <vector>

#include "entangled/graph.hpp"

namespace entangled {

enum class CentralityKind { DC, BC, CC, EC, NEff, FCStrength };

struct CentralityVector {
  CentralityKind kind = CentralityKind::DC;
  std::vector<double> values;
  bool normalized = false;
};

/// Unweighted neighbour count.
CentralityVector degree_centrality(const BrainGraph& g);

/// Hop-count betweenness over unordered source/target pairs (Brandes).
CentralityVector betweenness_centrality(const BrainGraph& g);

/// (n-1) / sum of hop distances; 0 for any node that cannot reach every other.
CentralityVector closeness_centrality(const BrainGraph& g);

/// Principal eigenvector of the weighted adjacency, non-negative with unit norm.
/// Iterates on A + I so bipartite graphs converge. Throws ECNoConvergence.
CentralityVector eigenvector_centrality(const BrainGraph& g, double tol = 1e-10,
                                        std::size_t max_iter = 100000);

/// Mean inverse weighted distance (edge length 1/w); unreachable nodes add 0.
CentralityVector node_efficiency(const BrainGraph& g);

/// Mean absolute off-diagonal correlation per row.
CentralityVector fc_strength(const Matrix& correlation);
CentralityVector fc_strength(const TimeSeriesMatrix& ts);

/// All-pairs hop distances; unreachable pairs are +inf.
Matrix hop_distances(const BrainGraph& g);
/// All-pairs shortest path lengths with edge length 1/w.
Matrix weighted_distances(const BrainGraph& g);

struct CentralityTable {
  std::vector<double> dc, bc, cc, ec, neff;
  std::optional<std::vector<double>> fc_strength;
  std::optional<std::vector<double>> ne_exact;
  std::optional<std::vector<double>> ne_approx;
};

CentralityTable centrality_table(const BrainGraph& g);

/// node,DC,BC,CC,EC,NEff,FCStrength,NE_exact,NE_approx; absent columns are empty cells.
std::string centrality_csv(const CentralityTable& t);

}  // namespace entangled
