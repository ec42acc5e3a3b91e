#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clustergas/ground_state.hpp"
#include "clustergas/potential.hpp"
#include "clustergas/variational.hpp"

namespace clustergas {

enum class ZMethod { quadrature, importance_sampling };

std::string to_string(ZMethod m);
ZMethod parse_z_method(const std::string& s);

struct ZOptions {
  ZMethod method = ZMethod::quadrature;
  /// Importance-sampling sample count.
  long samples = 1 << 18;
  /// Quadrature tolerance.
  double tol = 1e-9;
  /// Ground-state energy for the Cayley bound; k <= 2 is derived from v.
  std::optional<double> E_k;
  /// Lattice-bound spacing; default (R - r_hc)/6.
  std::optional<double> delta;
};

struct ClusterFreeEnergyEstimate {
  int k = 1;
  double beta = 1.0;
  int dim = 1;
  double R = 2.0;
  /// Box side of the constrained function; nullopt for Z_k^cl.
  std::optional<double> a;
  double z = 1.0;
  double z_stderr = 0.0;
  /// -log(z)/(beta k) and its delta-method error.
  double f = 0.0;
  double f_stderr = 0.0;
  ZMethod method = ZMethod::quadrature;
  /// Cayley upper bound on Z_k^cl (NaN when E_k is unknown).
  double cayley_upper = 0.0;
  /// Lattice lower bound on a^d Z_k^{cl,a} (NaN when a is absent or too small).
  double lattice_lower = 0.0;
  double delta = 0.0;
  /// Relative error above 10%.
  bool flagged = false;
  std::uint64_t seed = 0;
};

/// Z_k^cl(beta) (a absent) or Z_k^{cl,a}(beta), with bound certificates.
ClusterFreeEnergyEstimate z_cluster(const PotentialSpec& spec, int k, double beta, int dim,
                                    double R, std::optional<double> a, const ZOptions& opts,
                                    std::uint64_t seed);

/// e^{-beta E_k} k^{k-2}/k! |B(0,R)|^{k-1}.
double cayley_upper_bound(int k, double beta, double E_k, double R, int dim);

/// C(delta) = sum over l in Z^d \ {0} of sup_{s in (r_hc+delta, R)} |v(s|l|)|.
double lattice_constant(const PotentialSpec& spec, double delta, double R, int dim);

/// |B(0,delta/2)|^k exp(-beta C(delta) k); a lower bound for a^d Z_k^{cl,a}.
double lattice_lower_bound(const PotentialSpec& spec, int k, double beta, double delta, double a,
                           double R, int dim);

/// E_k/k - log(k^{k-2} |B(0,R)|^{k-1}/k!)/(beta k).
double f_cluster_lower(int k, double E_k, double beta, double R, int dim);

struct EntropyTerms {
  double entropy = 0.0;
  double bound = 0.0;
  bool holds = true;
};

/// (-sum p_k log p_k, 1 + log sum k p_k) for p_k = p[k-1].
EntropyTerms entropy_terms(std::span<const double> p);

struct RelativeEntropy {
  double value = 0.0;
  double bound = 0.0;
  bool holds = true;
};

/// sum rho_k log(rho_k/rho) against the bound -2 rho.
RelativeEntropy relative_entropy_lower(const std::map<int, double>& rho_vec, double rho);

struct IdealModel {
  double beta = 1.0;
  double rho = 0.1;
  std::map<int, double> f;
  double f_inf = 0.0;
  /// Where f_inf comes from (e.g. "largest-k estimate, k=4").
  std::string f_inf_source;
};

double ideal_free_energy(const IdealModel& model, const std::map<int, double>& rho_vec);

struct IdealMinimum {
  std::map<int, double> rho_vec;
  double value = 0.0;
  /// rho_k = exp(beta k (lambda - f_k)).
  double lambda = 0.0;
  /// KKT multiplier f_inf - lambda of the mass constraint.
  double eta = 0.0;
  bool binding = false;
  double stationarity_residual = 0.0;
  double slackness_residual = 0.0;
};

IdealMinimum minimize_ideal(const IdealModel& model);

struct SandwichTerm {
  double f_cl = 0.0;
  double f_cl_stderr = 0.0;
  double a = 0.0;
  double f_cla = 0.0;
  double f_cla_stderr = 0.0;
};

struct SandwichInput {
  double beta = 1.0;
  double rho = 0.1;
  int dim = 1;
  double R = 2.0;
  std::map<int, SandwichTerm> terms;
  /// f_inf^cl(beta) and f_inf^cl(beta, rho) stand-ins.
  double f_inf = 0.0;
  double f_inf_stderr = 0.0;
  double f_inf_upper = 0.0;
  double f_inf_upper_stderr = 0.0;
};

struct SandwichResult {
  double lower = 0.0;
  double upper = 0.0;
  double lower_stderr = 0.0;
  double upper_stderr = 0.0;
  /// lower <= upper + 3 combined standard errors.
  bool consistent = true;
};

/// Default box sides: min(k R, (k/(2 rho))^{1/d} - R).
double default_box_side(int k, double rho, double R, int dim);

/// Cluster free energies for k = 1..k_max at (beta, rho), f_inf stand-ins
/// from k_max. `a` overrides the default box sides per k.
SandwichInput build_sandwich_input(const PotentialSpec& spec, int dim, double R, double beta,
                                   double rho, int k_max, const ZOptions& opts, std::uint64_t seed,
                                   const std::map<int, double>& a = {});

/// Lower (ideal free energy) and upper (excluded-volume estimate) bounds on
/// f(beta, rho, rho_vec).
SandwichResult sandwich(const SandwichInput& in, const std::map<int, double>& rho_vec);

struct UniformCertificate {
  /// sum rho_k (E_k + log(rho)/beta) + (rho - sum k rho_k) e_infty.
  double center = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  /// Per-k correction constants actually used: lower side c_k (Cayley),
  /// upper side u_k (one-configuration estimate), and the bulk versions.
  std::map<int, double> lower_constants;
  std::map<int, double> upper_constants;
  double lower_bulk_constant = 0.0;
  double upper_bulk_constant = 0.0;
  double epsilon = 0.0;
  int n_max = 0;
};

/// Certified bracket around the ground-state approximation of
/// f(beta, rho, (rho q_k / k)_k). Requires Hoelder data on the spec and a
/// table with coordinates whose minimum pair distance respects it.
UniformCertificate uniform_certificate(const PotentialSpec& spec, const GroundStateTable& table,
                                       const QVector& q, double beta, double rho,
                                       const std::map<int, double>& a = {});

void write_estimates_csv(std::ostream& os, const std::vector<ClusterFreeEnergyEstimate>& rows);
std::string estimates_to_json(const std::vector<ClusterFreeEnergyEstimate>& rows);

}  // namespace clustergas
