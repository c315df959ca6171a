#pragma once

#include <cstdint>
#include <vector>

#include "entangled/community.hpp"
#include "entangled/graph.hpp"

namespace entangled {

/// Module-aware edge importance: intra-module edges score w + max(w),
/// inter-module edges w - max(w), so every inter edge ranks below every
/// intra edge when all weights are positive.
struct EdgeScore {
  std::size_t i = 0;
  std::size_t j = 0;
  double weight = 0.0;
  double score = 0.0;
  bool intra = false;
};

/// One score per edge, in lexicographic (i, j) order. max(w) is the graph's own maximum.
std::vector<EdgeScore> score_edges(const BrainGraph& g, const ModulePartition& p);

struct DropMode {
  enum class Kind { LowestFirst, WeightedRandom };
  Kind kind = Kind::WeightedRandom;
  std::uint64_t seed = 0;

  static DropMode lowest_first() { return {Kind::LowestFirst, 0}; }
  static DropMode weighted_random(std::uint64_t seed) { return {Kind::WeightedRandom, seed}; }
};

struct EdgeDrop {
  BrainGraph view;
  std::vector<Edge> dropped;
};

/// Removes floor(drop_fraction * m) edges. LowestFirst takes the lowest
/// scores (ties in edge order); WeightedRandom samples without replacement
/// with probability proportional to max(IM) - IM + 1e-6 * max(w).
EdgeDrop drop_edges(const BrainGraph& g, const ModulePartition& p, double drop_fraction,
                    const DropMode& mode);

struct AugmentedPair {
  BrainGraph view1;
  BrainGraph view2;
  std::vector<Edge> dropped1;
  std::vector<Edge> dropped2;
};

/// Two independent WeightedRandom draws with seeds `seed` and `seed + 1`.
AugmentedPair make_views(const BrainGraph& g, const ModulePartition& p, double drop_fraction,
                         std::uint64_t seed);

}  // namespace entangled
