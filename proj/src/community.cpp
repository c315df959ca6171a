#include "entangled/community.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "entangled/error.hpp"
#include "entangled/rng.hpp"

namespace entangled {
namespace {

// Gains closer than this are treated as no improvement.
constexpr double kGainEpsilon = 1e-12;

struct LevelGraph {
  // Off-diagonal neighbours (j != i) with weights.
  std::vector<std::vector<std::pair<std::size_t, double>>> adj;
  // Internal weight counted over ordered pairs.
  std::vector<double> self;
  std::vector<double> strength;
  double two_w = 0.0;

  std::size_t size() const { return adj.size(); }
};

LevelGraph level_from_graph(const BrainGraph& g) {
  LevelGraph lg;
  const auto n = g.node_count();
  lg.adj.resize(n);
  lg.self.assign(n, 0.0);
  lg.strength.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double w = g.weight(i, j);
      if (w > 0.0) {
        lg.adj[i].push_back({j, w});
        lg.strength[i] += w;
      }
    }
    lg.two_w += lg.strength[i];
  }
  return lg;
}

LevelGraph aggregate(const LevelGraph& lg, const std::vector<std::size_t>& community, std::size_t k) {
  LevelGraph out;
  out.adj.resize(k);
  out.self.assign(k, 0.0);
  out.strength.assign(k, 0.0);
  std::vector<std::map<std::size_t, double>> links(k);
  for (std::size_t i = 0; i < lg.size(); ++i) {
    const auto ci = community[i];
    out.self[ci] += lg.self[i];
    for (auto [j, w] : lg.adj[i]) {
      const auto cj = community[j];
      if (ci == cj) {
        out.self[ci] += w;
      } else {
        links[ci][cj] += w;
      }
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    out.strength[c] = out.self[c];
    for (auto [d, w] : links[c]) {
      out.adj[c].push_back({d, w});
      out.strength[c] += w;
    }
    out.two_w += out.strength[c];
  }
  return out;
}

double level_modularity(const LevelGraph& lg, const std::vector<std::size_t>& community,
                        double resolution) {
  const auto k = lg.size();
  std::vector<double> in(k, 0.0);
  std::vector<double> tot(k, 0.0);
  for (std::size_t i = 0; i < lg.size(); ++i) {
    const auto ci = community[i];
    in[ci] += lg.self[i];
    tot[ci] += lg.strength[i];
    for (auto [j, w] : lg.adj[i]) {
      if (community[j] == ci) {
        in[ci] += w;
      }
    }
  }
  double q = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    q += in[c] / lg.two_w - resolution * (tot[c] / lg.two_w) * (tot[c] / lg.two_w);
  }
  return q;
}

// One local-move phase. Returns true if any node changed community.
bool local_moves(const LevelGraph& lg, std::vector<std::size_t>& community, double resolution,
                 Rng& rng) {
  const auto n = lg.size();
  std::vector<double> tot(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    tot[community[i]] += lg.strength[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  std::vector<double> link_to(n, 0.0);
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> touched;
  bool any_move = false;
  for (std::size_t sweep = 0; sweep < 10000; ++sweep) {
    bool moved = false;
    for (auto i : order) {
      const auto own = community[i];
      const double ki = lg.strength[i];
      tot[own] -= ki;

      touched.clear();
      touched.push_back(own);
      seen[own] = true;
      for (auto [j, w] : lg.adj[i]) {
        const auto cj = community[j];
        if (!seen[cj]) {
          seen[cj] = true;
          touched.push_back(cj);
        }
        link_to[cj] += w;
      }

      auto gain = [&](std::size_t c) { return link_to[c] - resolution * tot[c] * ki / lg.two_w; };
      const double own_gain = gain(own);
      double best_gain = own_gain;
      for (auto c : touched) {
        best_gain = std::max(best_gain, gain(c));
      }
      std::size_t best = own;
      if (best_gain > own_gain + kGainEpsilon) {
        best = n;
        for (auto c : touched) {
          if (gain(c) == best_gain && c < best) {
            best = c;
          }
        }
      }
      for (auto c : touched) {
        link_to[c] = 0.0;
        seen[c] = false;
      }
      tot[best] += ki;
      if (best != own) {
        community[i] = best;
        moved = true;
        any_move = true;
      }
    }
    if (!moved) {
      break;
    }
  }
  return any_move;
}

}  // namespace

std::vector<std::vector<std::size_t>> ModulePartition::members() const {
  std::vector<std::vector<std::size_t>> out(module_count);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    out[assignment[i]].push_back(i);
  }
  return out;
}

double modularity(const BrainGraph& g, std::span<const std::size_t> assignment, double resolution) {
  const auto n = g.node_count();
  if (assignment.size() != n) {
    throw Error(ErrorKind::ShapeMismatch, "assignment length differs from node count");
  }
  const Matrix& a = g.adjacency();
  const double two_w = a.sum();
  if (!(two_w > 0.0)) {
    throw Error(ErrorKind::EmptyGraph, "modularity is undefined without edges");
  }
  std::map<std::size_t, std::pair<double, double>> per;  // internal, total degree
  for (std::size_t i = 0; i < n; ++i) {
    auto& [in, tot] = per[assignment[i]];
    for (std::size_t j = 0; j < n; ++j) {
      tot += a(i, j);
      if (assignment[i] == assignment[j]) in += a(i, j);
    }
  }
  double q = 0.0;
  for (const auto& [c, v] : per) {
    const double f = v.second / two_w;
    q += v.first / two_w - resolution * f * f;
  }
  return q;
}

std::vector<std::size_t> dense_labels(std::span<const std::size_t> labels) {
  std::map<std::size_t, std::size_t> remap;
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = remap.try_emplace(labels[i], remap.size());
    out[i] = it->second;
  }
  return out;
}

LouvainResult louvain_with_trace(const BrainGraph& g, std::uint64_t seed, double resolution) {
  if (g.edge_count() == 0) {
    throw Error(ErrorKind::EmptyGraph, "Louvain needs at least one edge");
  }
  if (!(resolution > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "resolution must be positive");
  }
  Rng rng(seed);
  LevelGraph level = level_from_graph(g);
  const auto n = g.node_count();
  std::vector<std::size_t> node_community(n);
  std::iota(node_community.begin(), node_community.end(), 0);

  LouvainResult result;
  result.pass_modularity.push_back(modularity(g, node_community, resolution));

  for (std::size_t pass = 0; pass < 1000; ++pass) {
    std::vector<std::size_t> community(level.size());
    std::iota(community.begin(), community.end(), 0);
    if (!local_moves(level, community, resolution, rng)) {
      break;
    }
    community = dense_labels(community);
    const std::size_t k = *std::max_element(community.begin(), community.end()) + 1;
    for (auto& c : node_community) {
      c = community[c];
    }
    result.pass_modularity.push_back(level_modularity(level, community, resolution));
    level = aggregate(level, community, k);
    if (k == 1) {
      break;
    }
  }

  ModulePartition& p = result.partition;
  p.assignment = dense_labels(node_community);
  p.module_count = *std::max_element(p.assignment.begin(), p.assignment.end()) + 1;
  p.modularity = modularity(g, p.assignment, resolution);
  return result;
}

ModulePartition louvain(const BrainGraph& g, std::uint64_t seed, double resolution) {
  return louvain_with_trace(g, seed, resolution).partition;
}

double normalized_mutual_information(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.size() != b.size() || a.empty()) {
    throw Error(ErrorKind::ShapeMismatch, "NMI needs two labelings of equal, non-zero length");
  }
  const auto da = dense_labels(a);
  const auto db = dense_labels(b);
  const std::size_t ka = *std::max_element(da.begin(), da.end()) + 1;
  const std::size_t kb = *std::max_element(db.begin(), db.end()) + 1;
  Matrix joint = Matrix::Zero(ka, kb);
  for (std::size_t i = 0; i < da.size(); ++i) {
    joint(da[i], db[i]) += 1.0;
  }
  joint /= static_cast<double>(da.size());
  const Vector pa = joint.rowwise().sum();
  const Vector pb = joint.colwise().sum().transpose();
  auto entropy = [](const Vector& p) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      if (p(i) > 0.0) {
        h -= p(i) * std::log(p(i));
      }
    }
    return h;
  };
  double mi = 0.0;
  for (std::size_t i = 0; i < ka; ++i) {
    for (std::size_t j = 0; j < kb; ++j) {
      if (joint(i, j) > 0.0) {
        mi += joint(i, j) * std::log(joint(i, j) / (pa(i) * pb(j)));
      }
    }
  }
  const double ha = entropy(pa);
  const double hb = entropy(pb);
  if (ha + hb == 0.0) {
    return 1.0;
  }
  return std::clamp(2.0 * mi / (ha + hb), 0.0, 1.0);
}

Json partition_to_json(const ModulePartition& p, std::uint64_t seed) {
  return Json{{"assignment", p.assignment}, {"k", p.module_count}, {"Q", p.modularity}, {"seed", seed}};
}

ModulePartition partition_from_json(const Json& j) {
  ModulePartition p;
  try {
    p.assignment = j.at("assignment").get<std::vector<std::size_t>>();
    p.module_count = j.at("k").get<std::size_t>();
    p.modularity = j.at("Q").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("partition JSON: ") + e.what());
  }
  for (auto a : p.assignment) {
    if (a >= p.module_count) {
      throw Error(ErrorKind::InvalidInput, "partition ids must be dense in 0..k-1");
    }
  }
  return p;
}

}  // namespace entangled
