#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clustergas/potential.hpp"

namespace clustergas {

struct GroundStateOptions {
  int dim = 2;
  /// Connectivity radius; minimisers must be R-connected.
  double R = 2.0;
  /// Random restarts; 0 means 200*k.
  int multistarts = 0;
  /// Greedy basin-hopping steps after each restart.
  int hops = 4;
  /// Standard deviation of the per-coordinate hop displacement.
  double perturbation_scale = 0.35;
  /// Gradient tolerance, relative to energy_scale/length_scale.
  double tol = 1e-9;
  int max_iters = 3000;
};

/// Best configuration found for one k. `energy` is an upper bound on E_k.
struct ClusterMinimum {
  int k = 0;
  double energy = 0.0;
  std::vector<double> coords;
  double r_min = 0.0;
  double diameter = 0.0;
  int multistart_count = 0;
  bool converged = true;
};

/// Result of a local minimisation from a given start.
struct LocalMinimum {
  double energy = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// L-BFGS with backtracking; steps landing in the hard core are halved.
/// `x` must start at finite energy and is overwritten by the minimiser.
LocalMinimum local_minimize(const PotentialSpec& spec, std::span<double> x, int dim, double tol,
                            int max_iters);

/// Multistart basin hopping. `extra_starts` are tried in addition to the
/// random restarts (used by build_table to seed from smaller ground states).
ClusterMinimum minimize_cluster(const PotentialSpec& spec, int k, const GroundStateOptions& opts,
                                std::uint64_t seed,
                                std::span<const std::vector<double>> extra_starts = {});

struct GroundStateTable {
  std::string spec_id;
  int dim = 2;
  double R = 2.0;
  /// entries[k-1] holds k.
  std::vector<ClusterMinimum> entries;
  std::optional<double> e_infty;
  double residual = 0.0;
  bool e_infty_low_confidence = false;
  std::optional<double> nu_star;
  int nu_star_argmin = 0;
  /// Set when the nu_star minimum sits at k_max, where truncation may hide
  /// smaller values.
  bool nu_star_truncated = false;
  /// Some entry failed to converge.
  bool warning = false;
  std::uint64_t seed = 0;

  int k_max() const { return static_cast<int>(entries.size()); }
  double E(int k) const { return entries.at(static_cast<std::size_t>(k - 1)).energy; }
};

/// Table from given energies E_1..E_n (no coordinates), e.g. for analysis
/// of hypothetical potentials. nu_star is filled in when e_infty is given.
GroundStateTable synthetic_table(std::vector<double> energies, std::optional<double> e_infty,
                                 int dim = 1);

GroundStateTable build_table(const PotentialSpec& spec, int k_max, const GroundStateOptions& opts,
                             std::uint64_t seed);

struct EInftyFit {
  double e_infty = 0.0;
  double surface = 0.0;
  double residual = 0.0;
  bool low_confidence = false;
};

/// Least squares E_k ~ e k + c k^{(d-1)/d} over the upper half of k, or the
/// mean of E_k/k over that half when plain_average is set.
EInftyFit estimate_e_infty(const GroundStateTable& table, bool plain_average = false);

/// min_k (E_k - k e_infty); throws NumericalError unless strictly positive.
double compute_nu_star(const GroundStateTable& table, int* argmin = nullptr);

/// Fills e_infty, residual, nu_star and related flags in place.
void finalize_table(GroundStateTable& table, bool plain_average = false);

struct StructuralReport {
  double min_r_min = 0.0;
  double max_diameter_ratio = 0.0;
  bool r_min_ok = true;
  bool diameter_ok = true;
};

/// min r_min over entries (k >= 2) against r_hc, and max diameter/k^{1/d}
/// against c_guess.
StructuralReport check_structural_assumptions(const GroundStateTable& table, double r_hc,
                                              double c_guess);

std::string table_to_json(const GroundStateTable& table);
GroundStateTable table_from_json(const std::string& text);

}  // namespace clustergas
