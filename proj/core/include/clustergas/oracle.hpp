#pragma once

#include <optional>
#include <span>
#include <utility>

#include "clustergas/geometry.hpp"
#include "clustergas/potential.hpp"

namespace clustergas {

/// O(N^2) adjacency plus breadth-first search; reference semantics for
/// decompose(). Labels follow the same first-appearance numbering.
ClusterDecomposition brute_force_decompose(const Configuration& config, double R);

struct QuadratureValue {
  double value = 0.0;
  /// |difference| between the result at tol and at tol/100.
  double error = 0.0;
};

/// Z_k^cl(beta), or Z_k^{cl,a}(beta) when `a` is given, with interaction
/// breakpoints placed exactly. Supports d = 1 with k <= 4 and d = 2 with
/// k <= 3 (constrained only for k <= 2 in d = 2, with a >= R).
/// In d = 1 the nested gap integrals use a fixed Gauss-Legendre product rule
/// whose panels are halved until successive results agree to `tol`; `error`
/// is the last difference. In d = 2 adaptive Gauss-Kronrod runs at tol and
/// tol/100 and throws NumericalError if they disagree by more than 1e-6
/// relative; for k = 3 the coarse tolerance is raised to at least 1e-6.
QuadratureValue quadrature_z_cluster(const PotentialSpec& spec, int k, double beta, int dim,
                                     double R, std::optional<double> a = std::nullopt,
                                     double tol = 1e-9);

/// Z_Lambda(beta, N, N_1..N_j) on Lambda = [0, L], d = 1, N <= 4, with
/// counts[i] = N_{i+1}; an empty `counts` gives the unconstrained Z_Lambda.
/// Same product rule and refinement as the d = 1 cluster integrals.
QuadratureValue quadrature_constrained_partition(const PotentialSpec& spec, int N, double L,
                                                 std::span<const long> counts, double beta,
                                                 double R, double tol = 1e-9);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

struct SupermultiplicativityReport {
  double z_ambient = 0.0;
  double z_left = 0.0;
  double z_right = 0.0;
  /// z_ambient - z_left * z_right.
  double margin = 0.0;
  double error = 0.0;
  bool holds = false;
};

/// Z_Lambda(N1+N2) >= Z_Lambda'(N1) Z_Lambda''(N2) in d = 1.
SupermultiplicativityReport check_supermultiplicativity(const PotentialSpec& spec, int N1, int N2,
                                                        Interval left, Interval right,
                                                        Interval ambient, double beta, double R);

/// (entropy, mean) of the geometric law p_k = (1-u) u^{k-1} on {1, 2, ...}.
std::pair<double, double> geometric_entropy(double u);

}  // namespace clustergas
