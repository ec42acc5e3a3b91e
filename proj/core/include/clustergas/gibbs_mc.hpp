#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "clustergas/geometry.hpp"
#include "clustergas/ground_state.hpp"
#include "clustergas/potential.hpp"
#include "clustergas/variational.hpp"

namespace clustergas {

struct MCParams {
  long n_sweeps = 20000;
  long burn_in_sweeps = 2000;
  /// Initial half-width of the uniform displacement; adapted during burn-in
  /// towards acceptance 0.3-0.5, frozen afterwards.
  double step_size = 0.5;
  long measure_every = 10;
  int replicas = 4;
  std::uint64_t seed = 1;
  /// Largest k written to the trace; larger clusters go to overflow_mass.
  int k_max_trace = 10;
  /// Batches per replica for the standard errors.
  int batches = 16;
  /// Keep a replica-0 configuration every this many production sweeps (0: none).
  long snapshot_every = 0;

  friend bool operator==(const MCParams&, const MCParams&) = default;
};

struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

struct TraceRow {
  long sweep = 0;
  double energy = 0.0;
  std::vector<double> q;
  double overflow_mass = 0.0;
};

struct ReplicaSummary {
  std::uint64_t seed = 0;
  double acceptance = 0.0;
  double final_step = 0.0;
  double energy_mean = 0.0;
  double energy_variance = 0.0;
  long frames = 0;
  std::map<int, double> q_mean;
  std::map<int, double> q_first_half;
  std::map<int, double> q_second_half;
  /// Batch means of q_k, params.batches entries per k.
  std::map<int, std::vector<double>> q_batches;
};

struct MCResult {
  std::string spec_id;
  int dim = 1;
  int N = 0;
  double L = 0.0;
  double beta = 0.0;
  double R = 0.0;
  MCParams params;

  std::map<int, Estimate> q_bar;
  double acceptance_rate = 0.0;
  Estimate energy;
  double energy_min = 0.0;
  double energy_max = 0.0;
  /// Largest |incremental - recomputed| energy seen at drift checks.
  double max_energy_drift = 0.0;
  /// Largest |sum_k q_k - 1| over all measured frames.
  double max_identity_error = 0.0;
  std::vector<ReplicaSummary> replicas;
  /// Replica 0 observable trace.
  std::vector<TraceRow> trace;
  std::vector<Configuration> snapshots;
  /// Replica 0 configuration after the last sweep.
  Configuration final_configuration{1, 1.0};
};

/// Metropolis sampling of exp(-beta U_N) on [0, L]^d with hard walls.
MCResult run_canonical(const PotentialSpec& spec, int dim, int N, double L, double beta, double R,
                       const MCParams& params);

/// Hard-core-feasible uniform start by random sequential addition; throws
/// ParameterError when the density is beyond what RSA can reach.
Configuration initial_configuration(const PotentialSpec& spec, int dim, int N, double L,
                                    std::uint64_t seed);

/// Packing fraction N |B_{r_hc/2}| / L^d above which random sequential
/// addition jams (approximately 0.7476, 0.547, 0.384 for d = 1, 2, 3).
double rsa_jamming_fraction(int dim);

struct EquilibrationEntry {
  int k = 0;
  double split_half_z = 0.0;
  double cross_replica_z = 0.0;
};

struct EquilibrationReport {
  bool pass = true;
  bool zero_variance_anomaly = false;
  double max_z = 0.0;
  std::vector<EquilibrationEntry> entries;
};

/// Split-half and cross-replica discrepancies of q_k in pooled standard
/// errors; fails above 5.
EquilibrationReport equilibration_check(const MCResult& result, double threshold = 5.0);

struct LLNPoint {
  double beta = 0.0;
  double rho = 0.0;
  double L = 0.0;
  Estimate observable;
  double acceptance = 0.0;
  bool equilibrated = false;
};

struct LLNReport {
  double nu = 0.0;
  double nu_star = 0.0;
  /// "bounded" (nu > nu*): observable is q_{k(nu)}; "unbounded": sum_{k<=K} q_k.
  std::string regime;
  int target_k = 0;
  int K = 3;
  std::vector<Branch> prediction;
  double mu = 0.0;
  std::vector<LLNPoint> points;
  /// Consecutive beta pairs where the observable moved towards its limit.
  int improvements = 0;
  int comparisons = 0;
};

LLNReport lln_experiment(const PotentialSpec& spec, const GroundStateTable& table, double nu,
                         const std::vector<double>& betas, int N, const MCParams& params,
                         int K = 3);

void write_trace_csv(std::ostream& os, const MCResult& result);
std::string mc_result_to_json(const MCResult& result);
std::string lln_report_to_json(const LLNReport& report);

}  // namespace clustergas
