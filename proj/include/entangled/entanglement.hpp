#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "entangled/graph.hpp"
#include "entangled/io.hpp"

namespace entangled {

/// Spectrum of the density matrix exp(-gamma L) / Z.
struct SpectralSummary {
  double gamma = 1.0;
  std::vector<double> laplacian_eigenvalues;  // ascending
  double partition_function = 0.0;            // Z = Tr exp(-gamma L)
  double log_partition = 0.0;                 // ln Z, kept for large gamma
  std::vector<double> density_spectrum;
  double entropy = 0.0;  // bits
  std::size_t component_count = 0;
};

/// Eigenvalue-based route: S = -sum p log2 p with 0 log 0 = 0.
/// The zero-eigenvalue count uses tolerance 1e-8 * ||L||_2.
SpectralSummary spectral_summary(const LaplacianMatrix& l, double gamma);

/// How node i is perturbed to obtain the i-control graph.
struct PerturbationMode {
  enum class Kind { Ground, Isolate, AttachControl };

  Kind kind = Kind::Ground;
  double parameter = 1.0;  // delta for Ground, weight for AttachControl

  static PerturbationMode ground(double delta = 1.0) { return {Kind::Ground, delta}; }
  static PerturbationMode isolate() { return {Kind::Isolate, 0.0}; }
  static PerturbationMode attach_control(double weight = 1.0) { return {Kind::AttachControl, weight}; }

  /// "ground" | "isolate" | "attach"
  std::string name() const;
  static PerturbationMode parse(const std::string& name, double parameter = 1.0);
};

LaplacianMatrix perturb(const BrainGraph& g, std::size_t node, const PerturbationMode& mode);

/// NE(i) = |S(G_i) - S(G)|.
std::vector<double> node_entanglement_exact(const BrainGraph& g, double gamma,
                                            const PerturbationMode& mode, std::size_t workers = 1);

/// Closed-form entropy-difference approximation for a single node, from the
/// original graph's n, m, alpha and the two partition functions.
double entanglement_approximation(std::size_t n, std::size_t m, std::size_t alpha, double gamma,
                                  double z, double z_perturbed);

/// Per-node approximation. Throws DegenerateDenominator when n == alpha.
std::vector<double> node_entanglement_approx(const BrainGraph& g, double gamma,
                                             const PerturbationMode& mode, std::size_t workers = 1);

struct NodeEntanglementReport {
  double gamma = 1.0;
  PerturbationMode mode;
  std::vector<double> exact;
  std::vector<double> approximate;
  std::vector<double> delta_z;
  double spearman = 1.0;
  bool ties = false;
  /// AttachControl evaluates Z_i at dimension n+1 while the approximation keeps n, m.
  bool dimension_mismatch = false;
  /// The approximation is undefined on edgeless graphs; the list is then empty
  /// unless every Delta Z is exactly zero, in which case it is all zeros.
  bool approximation_defined = true;
};

NodeEntanglementReport entanglement_report(const BrainGraph& g, double gamma,
                                           const PerturbationMode& mode, std::size_t workers = 1);

Json report_to_json(const NodeEntanglementReport& r);

}  // namespace entangled
