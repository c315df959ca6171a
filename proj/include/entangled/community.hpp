#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "entangled/graph.hpp"
#include "entangled/io.hpp"

namespace entangled {

/// Dense 0-based module labelling of the nodes.
struct ModulePartition {
  std::vector<std::size_t> assignment;
  std::size_t module_count = 0;
  double modularity = 0.0;

  std::vector<std::vector<std::size_t>> members() const;
};

/// Weighted Newman-Girvan modularity with a resolution factor on the null model.
/// Throws EmptyGraph when the graph has no weight.
double modularity(const BrainGraph& g, std::span<const std::size_t> assignment,
                  double resolution = 1.0);

struct LouvainResult {
  ModulePartition partition;
  /// Modularity of the node-level partition: singletons first, then after each pass.
  std::vector<double> pass_modularity;
};

/// Local moves plus aggregation until no move improves modularity. The node
/// visit order is shuffled from `seed`; equal gains go to the lowest module id.
LouvainResult louvain_with_trace(const BrainGraph& g, std::uint64_t seed, double resolution = 1.0);
ModulePartition louvain(const BrainGraph& g, std::uint64_t seed, double resolution = 1.0);

/// Relabels ids densely in order of first appearance.
std::vector<std::size_t> dense_labels(std::span<const std::size_t> labels);

/// Mutual information normalised by the mean of the two entropies.
double normalized_mutual_information(std::span<const std::size_t> a, std::span<const std::size_t> b);

Json partition_to_json(const ModulePartition& p, std::uint64_t seed);
ModulePartition partition_from_json(const Json& j);

}  // namespace entangled
