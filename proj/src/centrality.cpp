#include "entangled/centrality.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "entangled/error.hpp"

namespace entangled {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::vector<std::size_t>> adjacency_lists(const BrainGraph& g) {
  std::vector<std::vector<std::size_t>> adj(g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    adj[i] = g.neighbors(i);
  }
  return adj;
}

std::vector<double> bfs_distances(const std::vector<std::vector<std::size_t>>& adj, std::size_t s) {
  std::vector<double> dist(adj.size(), kInf);
  std::queue<std::size_t> q;
  dist[s] = 0.0;
  q.push(s);
  while (!q.empty()) {
    const auto v = q.front();
    q.pop();
    for (auto w : adj[v]) {
      if (dist[w] == kInf) {
        dist[w] = dist[v] + 1.0;
        q.push(w);
      }
    }
  }
  return dist;
}

std::vector<double> dijkstra(const BrainGraph& g, const std::vector<std::vector<std::size_t>>& adj,
                             std::size_t s) {
  std::vector<double> dist(adj.size(), kInf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[s] = 0.0;
  pq.push({0.0, s});
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (d > dist[v]) {
      continue;
    }
    for (auto w : adj[v]) {
      const double nd = d + 1.0 / g.weight(v, w);
      if (nd < dist[w]) {
        dist[w] = nd;
        pq.push({nd, w});
      }
    }
  }
  return dist;
}

}  // namespace

CentralityVector degree_centrality(const BrainGraph& g) {
  CentralityVector c{CentralityKind::DC, std::vector<double>(g.node_count()), false};
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    c.values[i] = static_cast<double>((g.adjacency().row(i).array() > 0.0).count());
  }
  return c;
}

CentralityVector betweenness_centrality(const BrainGraph& g) {
  const auto n = g.node_count();
  const auto adj = adjacency_lists(g);
  std::vector<double> bc(n, 0.0);
  std::vector<std::vector<std::size_t>> preds(n);
  std::vector<double> sigma(n);
  std::vector<long> dist(n);
  std::vector<double> delta(n);
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < n; ++s) {
    for (auto& p : preds) {
      p.clear();
    }
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(delta.begin(), delta.end(), 0.0);
    stack.clear();
    sigma[s] = 1.0;
    dist[s] = 0;
    std::queue<std::size_t> q;
    q.push(s);
    while (!q.empty()) {
      const auto v = q.front();
      q.pop();
      stack.push_back(v);
      for (auto w : adj[v]) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          q.push(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }
    for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
      const auto w = *it;
      for (auto v : preds[w]) {
        delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      }
      if (w != s) {
        bc[w] += delta[w];
      }
    }
  }
  // Each unordered pair was counted from both endpoints.
  for (auto& b : bc) {
    b /= 2.0;
  }
  return {CentralityKind::BC, std::move(bc), false};
}

CentralityVector closeness_centrality(const BrainGraph& g) {
  const auto n = g.node_count();
  const auto adj = adjacency_lists(g);
  std::vector<double> cc(n, 0.0);
  for (std::size_t i = 0; i < n && n > 1; ++i) {
    const auto d = bfs_distances(adj, i);
    double total = 0.0;
    bool reachable = true;
    for (std::size_t j = 0; j < n; ++j) {
      if (d[j] == kInf) {
        reachable = false;
        break;
      }
      total += d[j];
    }
    cc[i] = reachable ? static_cast<double>(n - 1) / total : 0.0;
  }
  return {CentralityKind::CC, std::move(cc), false};
}

CentralityVector eigenvector_centrality(const BrainGraph& g, double tol, std::size_t max_iter) {
  const auto n = g.node_count();
  if (n == 0) {
    throw Error(ErrorKind::EmptyGraph, "eigenvector centrality of an empty graph");
  }
  const Matrix shifted = g.adjacency() + Matrix::Identity(n, n);
  Vector x = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  for (std::size_t it = 0; it < max_iter; ++it) {
    Vector next = shifted * x;
    next /= next.norm();
    const double change = (next - x).cwiseAbs().maxCoeff();
    x = std::move(next);
    if (change < tol) {
      std::vector<double> v(x.data(), x.data() + n);
      return {CentralityKind::EC, std::move(v), true};
    }
  }
  throw Error(ErrorKind::ECNoConvergence, "power iteration did not converge in " +
                                              std::to_string(max_iter) + " iterations");
}

CentralityVector node_efficiency(const BrainGraph& g) {
  const auto n = g.node_count();
  const auto adj = adjacency_lists(g);
  std::vector<double> eff(n, 0.0);
  for (std::size_t i = 0; i < n && n > 1; ++i) {
    const auto d = dijkstra(g, adj, i);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && d[j] != kInf) {
        total += 1.0 / d[j];
      }
    }
    eff[i] = total / static_cast<double>(n - 1);
  }
  return {CentralityKind::NEff, std::move(eff), false};
}

CentralityVector fc_strength(const Matrix& correlation) {
  const auto n = static_cast<std::size_t>(correlation.rows());
  std::vector<double> s(n, 0.0);
  for (std::size_t i = 0; i < n && n > 1; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) {
        total += std::abs(correlation(i, j));
      }
    }
    s[i] = total / static_cast<double>(n - 1);
  }
  return {CentralityKind::FCStrength, std::move(s), false};
}

CentralityVector fc_strength(const TimeSeriesMatrix& ts) { return fc_strength(pearson_matrix(ts)); }

Matrix hop_distances(const BrainGraph& g) {
  const auto n = g.node_count();
  const auto adj = adjacency_lists(g);
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = bfs_distances(adj, i);
    for (std::size_t j = 0; j < n; ++j) {
      d(i, j) = row[j];
    }
  }
  return d;
}

Matrix weighted_distances(const BrainGraph& g) {
  const auto n = g.node_count();
  const auto adj = adjacency_lists(g);
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = dijkstra(g, adj, i);
    for (std::size_t j = 0; j < n; ++j) {
      d(i, j) = row[j];
    }
  }
  return d;
}

CentralityTable centrality_table(const BrainGraph& g) {
  CentralityTable t;
  t.dc = degree_centrality(g).values;
  t.bc = betweenness_centrality(g).values;
  t.cc = closeness_centrality(g).values;
  t.ec = eigenvector_centrality(g).values;
  t.neff = node_efficiency(g).values;
  return t;
}

std::string centrality_csv(const CentralityTable& t) {
  std::ostringstream out;
  out.precision(17);
  out << "node,DC,BC,CC,EC,NEff,FCStrength,NE_exact,NE_approx\n";
  auto optional_cell = [&](const std::optional<std::vector<double>>& col, std::size_t i) {
    if (col && i < col->size()) {
      out << (*col)[i];
    }
  };
  for (std::size_t i = 0; i < t.dc.size(); ++i) {
    out << i << ',' << t.dc[i] << ',' << t.bc[i] << ',' << t.cc[i] << ',' << t.ec[i] << ','
        << t.neff[i] << ',';
    optional_cell(t.fc_strength, i);
    out << ',';
    optional_cell(t.ne_exact, i);
    out << ',';
    optional_cell(t.ne_approx, i);
    out << '\n';
  }
  return out.str();
}

}  // namespace entangled
