#include "entangled/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "entangled/error.hpp"
#include "entangled/rng.hpp"

namespace entangled {

std::vector<EdgeScore> score_edges(const BrainGraph& g, const ModulePartition& p) {
  if (p.assignment.size() != g.node_count()) {
    throw Error(ErrorKind::ShapeMismatch, "partition does not cover every node");
  }
  const double max_w = g.max_weight();
  std::vector<EdgeScore> scores;
  for (const auto& e : g.edges()) {
    const bool intra = p.assignment[e.i] == p.assignment[e.j];
    scores.push_back({e.i, e.j, e.weight, intra ? e.weight + max_w : e.weight - max_w, intra});
  }
  return scores;
}

EdgeDrop drop_edges(const BrainGraph& g, const ModulePartition& p, double drop_fraction,
                    const DropMode& mode) {
  if (!(drop_fraction >= 0.0 && drop_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "drop fraction must lie in [0, 1)");
  }
  const auto scores = score_edges(g, p);
  const auto count = static_cast<std::size_t>(std::floor(drop_fraction * static_cast<double>(scores.size())));

  std::vector<std::size_t> chosen;
  if (mode.kind == DropMode::Kind::LowestFirst) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a].score < scores[b].score; });
    chosen.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
  } else if (count > 0) {
    double max_score = scores.front().score;
    for (const auto& s : scores) {
      max_score = std::max(max_score, s.score);
    }
    const double eps = 1e-6 * g.max_weight();
    std::vector<double> weight(scores.size());
    for (std::size_t e = 0; e < scores.size(); ++e) {
      weight[e] = max_score - scores[e].score + eps;
    }
    Rng rng(mode.seed);
    for (std::size_t k = 0; k < count; ++k) {
      const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
      double target = rng.uniform() * total;
      std::size_t pick = weight.size();
      for (std::size_t e = 0; e < weight.size(); ++e) {
        if (weight[e] <= 0.0) {
          continue;
        }
        pick = e;
        target -= weight[e];
        if (target < 0.0) {
          break;
        }
      }
      chosen.push_back(pick);
      weight[pick] = 0.0;
    }
  }
  std::sort(chosen.begin(), chosen.end());

  Matrix a = g.adjacency();
  EdgeDrop out;
  for (auto e : chosen) {
    const auto& s = scores[e];
    a(s.i, s.j) = a(s.j, s.i) = 0.0;
    out.dropped.push_back({s.i, s.j, s.weight});
  }
  out.view = g.with_adjacency(std::move(a));
  return out;
}

AugmentedPair make_views(const BrainGraph& g, const ModulePartition& p, double drop_fraction,
                         std::uint64_t seed) {
  auto first = drop_edges(g, p, drop_fraction, DropMode::weighted_random(seed));
  auto second = drop_edges(g, p, drop_fraction, DropMode::weighted_random(seed + 1));
  return {std::move(first.view), std::move(second.view), std::move(first.dropped),
          std::move(second.dropped)};
}

}  // namespace entangled
