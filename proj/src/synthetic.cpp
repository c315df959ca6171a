#include "entangled/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "entangled/error.hpp"

namespace entangled {
namespace {

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::InvalidConfig, std::string(name) + " must lie in [0, 1]");
  }
}

void check_range(const WeightRange& r, const char* name) {
  if (!(r.lo > 0.0 && r.hi >= r.lo && std::isfinite(r.hi))) {
    throw Error(ErrorKind::InvalidConfig, std::string(name) + " must satisfy 0 < lo <= hi");
  }
}

}  // namespace

void SyntheticConfig::validate() const {
  if (n < 2) {
    throw Error(ErrorKind::InvalidConfig, "n must be >= 2");
  }
  if (modules < 1 || modules > n) {
    throw Error(ErrorKind::InvalidConfig, "modules must lie in [1, n]");
  }
  if (classes.empty()) {
    throw Error(ErrorKind::InvalidConfig, "at least one class is required");
  }
  if (!(train_ratio >= 0.0 && val_ratio >= 0.0 && train_ratio + val_ratio <= 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "split ratios must be non-negative and sum to <= 1");
  }
  for (const auto& c : classes) {
    check_probability(c.p_intra, "p_intra");
    check_probability(c.p_inter, "p_inter");
    check_range(c.intra_weight, "intra_weight");
    check_range(c.inter_weight, "inter_weight");
    check_range(c.hub_weight, "hub_weight");
    if (c.hub_count > n) {
      throw Error(ErrorKind::InvalidConfig, "hub_count exceeds n");
    }
    if (!(c.hub_boost >= 0.0)) {
      throw Error(ErrorKind::InvalidConfig, "hub_boost must be >= 0");
    }
  }
}

SyntheticConfig SyntheticConfig::hub_contrast(std::size_t n, std::size_t graphs_per_class) {
  SyntheticConfig cfg;
  cfg.n = n;
  cfg.modules = 3;
  ClassConfig base;
  base.p_intra = 0.5;
  base.p_inter = 0.05;
  base.graphs = graphs_per_class;
  ClassConfig hubs = base;
  hubs.hub_count = 2;
  hubs.hub_boost = 3.0;
  cfg.classes = {base, hubs};
  return cfg;
}

SyntheticConfig SyntheticConfig::planted(std::size_t n, std::size_t modules, double p_intra,
                                         double p_inter, std::size_t graphs) {
  SyntheticConfig cfg;
  cfg.n = n;
  cfg.modules = modules;
  ClassConfig c;
  c.p_intra = p_intra;
  c.p_inter = p_inter;
  c.graphs = graphs;
  cfg.classes = {c};
  return cfg;
}

SyntheticConfig SyntheticConfig::planted_hub(std::size_t n, double hub_boost) {
  SyntheticConfig cfg;
  cfg.n = n;
  cfg.modules = 3;
  ClassConfig c;
  c.p_intra = 0.3;
  c.p_inter = 0.03;
  c.intra_weight = {0.5, 1.0};
  c.inter_weight = {0.5, 1.0};
  c.hub_count = 1;
  c.hub_boost = hub_boost;
  c.hub_weight = {0.5, 1.0};
  c.graphs = 1;
  cfg.classes = {c};
  return cfg;
}

std::size_t planted_module(std::size_t node, std::size_t n, std::size_t modules) {
  return node * modules / n;
}

GeneratedGraph generate_graph(const SyntheticConfig& config, const ClassConfig& cls, Rng& rng) {
  const std::size_t n = config.n;
  GraphMetadata meta;
  meta.modules.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    meta.modules[i] = planted_module(i, n, config.modules);
  }

  Matrix a = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool intra = meta.modules[i] == meta.modules[j];
      const double p = intra ? cls.p_intra : cls.p_inter;
      const double u = rng.uniform();
      const WeightRange& wr = intra ? cls.intra_weight : cls.inter_weight;
      const double w = rng.uniform(wr.lo, wr.hi);
      if (u < p) {
        a(i, j) = a(j, i) = w;
      }
    }
  }

  if (cls.hub_count > 0 && cls.hub_boost > 1.0) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
      order[i] = i;
    }
    rng.shuffle(order);
    meta.hubs.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cls.hub_count));
    std::sort(meta.hubs.begin(), meta.hubs.end());

    double degree_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      degree_sum += static_cast<double>((a.row(i).array() > 0.0).count());
    }
    const double mean_degree = degree_sum / static_cast<double>(n);
    const auto target = std::min<std::size_t>(
        n - 1, static_cast<std::size_t>(std::lround(cls.hub_boost * mean_degree)));
    for (auto hub : meta.hubs) {
      std::vector<std::size_t> candidates;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != hub && a(hub, j) == 0.0) {
          candidates.push_back(j);
        }
      }
      rng.shuffle(candidates);
      const auto current = static_cast<std::size_t>((a.row(hub).array() > 0.0).count());
      const std::size_t need = target > current ? std::min(target - current, candidates.size()) : 0;
      for (std::size_t k = 0; k < need; ++k) {
        const double w = rng.uniform(cls.hub_weight.lo, cls.hub_weight.hi);
        a(hub, candidates[k]) = a(candidates[k], hub) = w;
      }
    }
  }

  Matrix x = config.features == FeatureKind::Identity ? Matrix(Matrix::Identity(n, n))
                                                      : Matrix(a + Matrix::Identity(n, n));
  return {BrainGraph(std::move(a), std::move(x)), std::move(meta)};
}

LabeledDataset generate_synthetic(const SyntheticConfig& config, std::uint64_t seed) {
  config.validate();
  LabeledDataset ds;
  ds.num_classes = config.classes.size();

  std::vector<Rng> streams;
  for (std::size_t c = 0; c < config.classes.size(); ++c) {
    streams.emplace_back(derive_seed(seed, c));
  }
  std::size_t max_graphs = 0;
  for (const auto& c : config.classes) {
    max_graphs = std::max(max_graphs, c.graphs);
  }
  for (std::size_t g = 0; g < max_graphs; ++g) {
    for (std::size_t c = 0; c < config.classes.size(); ++c) {
      if (g >= config.classes[c].graphs) {
        continue;
      }
      auto gen = generate_graph(config, config.classes[c], streams[c]);
      ds.graphs.push_back(std::move(gen.graph));
      ds.metadata.push_back(std::move(gen.metadata));
      ds.labels.push_back(c);
    }
  }
  ds.splits = random_splits(ds.size(), derive_seed(seed, 1000), config.train_ratio, config.val_ratio);
  return ds;
}

}  // namespace entangled
