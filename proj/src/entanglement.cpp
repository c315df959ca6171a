#include "entangled/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "entangled/error.hpp"
#include "entangled/parallel.hpp"
#include "entangled/stats.hpp"

namespace entangled {

constexpr double kRankTolerance = 1e-9;

SpectralSummary spectral_summary(const LaplacianMatrix& l, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw Error(ErrorKind::InvalidInput, "gamma must be a positive finite number");
  }
  SpectralSummary s;
  s.gamma = gamma;
  const auto n = l.dim();
  if (n == 0) {
    throw Error(ErrorKind::InvalidInput, "empty Laplacian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(l.entries(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::EigenFailure, "symmetric eigensolver did not converge");
  }
  const Vector& ev = es.eigenvalues();
  s.laplacian_eigenvalues.assign(ev.data(), ev.data() + ev.size());

  const double norm = ev.cwiseAbs().maxCoeff();
  if (norm == 0.0) {
    s.component_count = n;
  } else {
    const double tol = 1e-8 * norm;
    s.component_count = static_cast<std::size_t>(
        std::count_if(s.laplacian_eigenvalues.begin(), s.laplacian_eigenvalues.end(),
                      [&](double v) { return std::abs(v) < tol; }));
  }

  // Shift by the smallest eigenvalue so the largest weight is exactly 1.
  const double lmin = s.laplacian_eigenvalues.front();
  double shifted_sum = 0.0;
  std::vector<double> shifted(n);
  for (std::size_t j = 0; j < n; ++j) {
    shifted[j] = std::exp(-gamma * (s.laplacian_eigenvalues[j] - lmin));
    shifted_sum += shifted[j];
  }
  s.log_partition = -gamma * lmin + std::log(shifted_sum);
  s.partition_function = std::exp(s.log_partition);

  // S = log2 Z' + gamma/ln2 * <lambda - lmin>, exact when every eigenvalue is equal
  s.density_spectrum.resize(n);
  double mean_gap = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double p = shifted[j] / shifted_sum;
    s.density_spectrum[j] = p;
    mean_gap += p * (s.laplacian_eigenvalues[j] - lmin);
  }
  s.entropy = std::max(0.0, std::log2(shifted_sum) + gamma * mean_gap / std::numbers::ln2);
  return s;
}

std::string PerturbationMode::name() const {
  switch (kind) {
    case Kind::Ground: return "ground";
    case Kind::Isolate: return "isolate";
    case Kind::AttachControl: return "attach";
  }
  return "ground";
}

PerturbationMode PerturbationMode::parse(const std::string& name, double parameter) {
  if ((name == "ground" || name == "attach") && !(parameter > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "perturbation parameter must be positive");
  }
  if (name == "ground") {
    return ground(parameter);
  }
  if (name == "isolate") {
    return isolate();
  }
  if (name == "attach") {
    return attach_control(parameter);
  }
  throw Error(ErrorKind::InvalidConfig, "unknown perturbation mode '" + name + "'");
}

LaplacianMatrix perturb(const BrainGraph& g, std::size_t node, const PerturbationMode& mode) {
  const auto n = g.node_count();
  if (node >= n) {
    throw Error(ErrorKind::InvalidInput, "node index out of range");
  }
  switch (mode.kind) {
    case PerturbationMode::Kind::Ground: {
      if (!(mode.parameter > 0.0)) {
        throw Error(ErrorKind::InvalidConfig, "ground delta must be positive");
      }
      Matrix l = laplacian(g).entries();
      l(node, node) += mode.parameter;
      return LaplacianMatrix(std::move(l));
    }
    case PerturbationMode::Kind::Isolate: {
      Matrix a = g.adjacency();
      a.row(node).setZero();
      a.col(node).setZero();
      Matrix l = -a;
      l.diagonal() = a.rowwise().sum();
      return LaplacianMatrix(std::move(l));
    }
    case PerturbationMode::Kind::AttachControl: {
      if (!(mode.parameter > 0.0)) {
        throw Error(ErrorKind::InvalidConfig, "control weight must be positive");
      }
      Matrix a = Matrix::Zero(n + 1, n + 1);
      a.topLeftCorner(n, n) = g.adjacency();
      a(node, n) = a(n, node) = mode.parameter;
      Matrix l = -a;
      l.diagonal() = a.rowwise().sum();
      return LaplacianMatrix(std::move(l));
    }
  }
  throw Error(ErrorKind::InvalidConfig, "unknown perturbation mode");
}

std::vector<double> node_entanglement_exact(const BrainGraph& g, double gamma,
                                            const PerturbationMode& mode, std::size_t workers) {
  const double base = spectral_summary(laplacian(g), gamma).entropy;
  std::vector<double> ne(g.node_count());
  parallel_for(ne.size(), workers, [&](std::size_t i) {
    ne[i] = std::abs(spectral_summary(perturb(g, i, mode), gamma).entropy - base);
  });
  return ne;
}

double entanglement_approximation(std::size_t n, std::size_t m, std::size_t alpha, double gamma,
                                  double z, double z_perturbed) {
  if (n <= alpha) {
    throw Error(ErrorKind::DegenerateDenominator, "n equals the component count (edgeless graph)");
  }
  const double nn = static_cast<double>(n);
  const double gap = nn - static_cast<double>(alpha);
  const double coeff = 2.0 * static_cast<double>(m) * gamma * nn * nn / (std::numbers::ln2 * gap * gap);
  const double delta_z = z_perturbed - z;
  return std::abs(coeff * delta_z / (z * z_perturbed) + std::log2(z_perturbed / z));
}

std::vector<double> node_entanglement_approx(const BrainGraph& g, double gamma,
                                             const PerturbationMode& mode, std::size_t workers) {
  const auto base = spectral_summary(laplacian(g), gamma);
  const auto n = g.node_count();
  if (n <= base.component_count) {
    throw Error(ErrorKind::DegenerateDenominator, "n equals the component count (edgeless graph)");
  }
  std::vector<double> ne(n);
  parallel_for(n, workers, [&](std::size_t i) {
    const auto pert = spectral_summary(perturb(g, i, mode), gamma);
    ne[i] = entanglement_approximation(n, g.edge_count(), base.component_count, gamma,
                                       base.partition_function, pert.partition_function);
  });
  return ne;
}

NodeEntanglementReport entanglement_report(const BrainGraph& g, double gamma,
                                           const PerturbationMode& mode, std::size_t workers) {
  NodeEntanglementReport r;
  r.gamma = gamma;
  r.mode = mode;
  r.dimension_mismatch = mode.kind == PerturbationMode::Kind::AttachControl;

  const auto base = spectral_summary(laplacian(g), gamma);
  const auto n = g.node_count();
  r.exact.resize(n);
  r.delta_z.resize(n);
  std::vector<double> z_pert(n);
  parallel_for(n, workers, [&](std::size_t i) {
    const auto pert = spectral_summary(perturb(g, i, mode), gamma);
    r.exact[i] = std::abs(pert.entropy - base.entropy);
    z_pert[i] = pert.partition_function;
    r.delta_z[i] = pert.partition_function - base.partition_function;
  });

  r.approximation_defined = n > base.component_count;
  if (r.approximation_defined) {
    r.approximate.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      r.approximate[i] = entanglement_approximation(n, g.edge_count(), base.component_count, gamma,
                                                    base.partition_function, z_pert[i]);
    }
    const auto sp = spearman(r.exact, r.approximate, kRankTolerance);
    r.spearman = sp.rho;
    r.ties = sp.ties;
  } else if (std::all_of(r.delta_z.begin(), r.delta_z.end(), [](double d) { return d == 0.0; })) {
    // Both terms vanish identically when no partition function moves.
    r.approximation_defined = true;
    r.approximate.assign(n, 0.0);
    const auto sp = spearman(r.exact, r.approximate, kRankTolerance);
    r.spearman = sp.rho;
    r.ties = sp.ties;
  } else {
    r.spearman = 1.0;
    r.ties = true;
  }
  return r;
}

Json report_to_json(const NodeEntanglementReport& r) {
  Json j{{"gamma", r.gamma},
         {"mode", r.mode.name()},
         {"exact", r.exact},
         {"approx", r.approximate},
         {"spearman", r.spearman},
         {"ties", r.ties}};
  return j;
}

}  // namespace entangled
