#include "clustergas/gibbs_mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "clustergas/errors.hpp"
#include "clustergas/io.hpp"
#include "clustergas/parallel.hpp"
#include "clustergas/rng.hpp"

namespace clustergas {

double rsa_jamming_fraction(int dim) {
  switch (dim) {
    case 1: return 0.7476;
    case 2: return 0.547;
    case 3: return 0.384;
    default: throw ParameterError("dim must be 1, 2 or 3");
  }
}

namespace {

void check_density(const PotentialSpec& spec, int dim, int N, double L) {
  const double fraction = N * ball_volume(dim, 0.5 * spec.r_hc()) / std::pow(L, dim);
  if (fraction > rsa_jamming_fraction(dim)) {
    const double rho_cp = rsa_jamming_fraction(dim) / ball_volume(dim, 0.5 * spec.r_hc());
    throw ParameterError("density " + fmt_double(N / std::pow(L, dim)) +
                         " exceeds the random-packing limit rho_cp ~ " + fmt_double(rho_cp));
  }
}

struct Sampler {
  const PotentialSpec& spec;
  int dim;
  double L;
  double hc2;
  double b2;
  Configuration config;
  CellList cells;

  Sampler(const PotentialSpec& s, int d, double side, Configuration c, double cell)
      : spec(s), dim(d), L(side), hc2(s.r_hc() * s.r_hc()), b2(s.b() * s.b()),
        config(std::move(c)), cells(d, cell) {
    for (std::size_t i = 0; i < config.size(); ++i) cells.insert(i, config.position(i));
  }

  /// Interaction of a particle at x with all others except `self`; +inf on
  /// hard-core overlap.
  double local_energy(std::size_t self, const double* x) const {
    double e = 0.0;
    bool overlap = false;
    cells.for_each_near(std::span<const double>(x, dim), [&](std::size_t j) {
      if (j == self || overlap) return;
      const auto y = config.position(j);
      double d2 = 0.0;
      for (int c = 0; c < dim; ++c) {
        const double dx = x[c] - y[c];
        d2 += dx * dx;
      }
      if (d2 < hc2) {
        overlap = true;
        return;
      }
      if (d2 < b2) e += spec.finite_value(std::sqrt(d2));
    });
    return overlap ? std::numeric_limits<double>::infinity() : e;
  }
};

struct ReplicaRun {
  ReplicaSummary summary;
  std::vector<TraceRow> trace;
  std::vector<Configuration> snapshots;
  Configuration final_configuration{1, 1.0};
  double energy_min = 0.0;
  double energy_max = 0.0;
  double max_drift = 0.0;
  double max_identity_error = 0.0;
};

ReplicaRun run_replica(const PotentialSpec& spec, int dim, int N, double L, double beta, double R,
                       const MCParams& p, std::uint64_t seed, bool keep_trace) {
  ReplicaRun out;
  out.summary.seed = seed;
  Rng rng(seed);
  Sampler s(spec, dim, L, initial_configuration(spec, dim, N, L, derive_seed(seed, 0, 0x1A)),
            std::max(R, spec.b()));
  double energy = total_energy(spec, s.config).value();
  double step = std::min(p.step_size, L);
  out.energy_min = out.energy_max = energy;

  const long production = p.n_sweeps - p.burn_in_sweeps;
  const long frames = production / p.measure_every;
  const int B = std::max(1, p.batches);
  std::map<int, double> sum, first, second;
  std::map<int, std::vector<double>> batch;
  std::vector<long> batch_frames(B, 0);
  double e_sum = 0.0, e_sum2 = 0.0;
  long accepted = 0, proposed = 0, window_acc = 0, window_prop = 0;
  long frame = 0;
  std::vector<double> trial(dim);

  for (long sweep = 0; sweep < p.n_sweeps; ++sweep) {
    const bool burn = sweep < p.burn_in_sweeps;
    for (int m = 0; m < N; ++m) {
      const std::size_t i = rng.below(static_cast<std::uint64_t>(N));
      const auto x = s.config.position(i);
      bool inside = true;
      for (int c = 0; c < dim; ++c) {
        trial[c] = x[c] + rng.uniform(-step, step);
        if (trial[c] < 0.0 || trial[c] > L) inside = false;
      }
      ++proposed;
      ++window_prop;
      if (!inside) continue;
      const double e_new = s.local_energy(i, trial.data());
      if (!std::isfinite(e_new)) continue;
      const double delta = e_new - s.local_energy(i, x.data());
      if (delta > 0.0 && rng.uniform() >= std::exp(-beta * delta)) continue;
      std::copy(trial.begin(), trial.end(), x.begin());
      s.cells.move(i, x);
      energy += delta;
      ++accepted;
      ++window_acc;
    }
    if (burn && (sweep + 1) % 50 == 0 && window_prop > 0) {
      const double rate = static_cast<double>(window_acc) / window_prop;
      if (rate < 0.3) step *= 0.8;
      if (rate > 0.5) step = std::min(step * 1.25, L);
      window_acc = window_prop = 0;
    }
    if ((sweep + 1) % 100 == 0) {
      const double fresh = total_energy(spec, s.config).value();
      out.max_drift = std::max(out.max_drift, std::abs(fresh - energy));
      energy = fresh;
    }
    if (burn) continue;
    const long t = sweep - p.burn_in_sweeps + 1;
    if (keep_trace && p.snapshot_every > 0 && t % p.snapshot_every == 0)
      out.snapshots.push_back(s.config);
    if (t % p.measure_every != 0 || frame >= frames) continue;

    const ClusterDecomposition dec = decompose(s.config, R);
    double total = 0.0;
    TraceRow row;
    if (keep_trace) {
      row.sweep = sweep + 1;
      row.energy = energy;
      row.q.assign(p.k_max_trace, 0.0);
    }
    const int b = static_cast<int>(frame * B / frames);
    ++batch_frames[b];
    for (auto [k, n] : dec.counts()) {
      const double q = static_cast<double>(k) * n / N;
      total += q;
      sum[k] += q;
      (2 * frame < frames ? first : second)[k] += q;
      auto& bv = batch[k];
      if (bv.empty()) bv.assign(B, 0.0);
      bv[b] += q;
      if (keep_trace) {
        if (k <= p.k_max_trace) row.q[k - 1] = q;
        else row.overflow_mass += q;
      }
    }
    out.max_identity_error = std::max(out.max_identity_error, std::abs(total - 1.0));
    e_sum += energy;
    e_sum2 += energy * energy;
    out.energy_min = std::min(out.energy_min, energy);
    out.energy_max = std::max(out.energy_max, energy);
    if (keep_trace) out.trace.push_back(std::move(row));
    ++frame;
  }

  out.final_configuration = s.config;
  ReplicaSummary& r = out.summary;
  r.frames = frame;
  r.acceptance = proposed ? static_cast<double>(accepted) / proposed : 0.0;
  r.final_step = step;
  if (frame > 0) {
    r.energy_mean = e_sum / frame;
    r.energy_variance = std::max(0.0, e_sum2 / frame - r.energy_mean * r.energy_mean);
    const long n1 = (frame + 1) / 2, n2 = frame - n1;
    for (auto [k, v] : sum) {
      r.q_mean[k] = v / frame;
      r.q_first_half[k] = first.count(k) ? first[k] / n1 : 0.0;
      r.q_second_half[k] = n2 > 0 && second.count(k) ? second[k] / n2 : 0.0;
      auto& bv = batch[k];
      for (int j = 0; j < B; ++j) bv[j] = batch_frames[j] ? bv[j] / batch_frames[j] : 0.0;
      r.q_batches[k] = bv;
    }
  }
  return out;
}

double batch_se(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = 0.0;
  for (double x : v) m += x;
  m /= v.size();
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1) / v.size());
}

const std::vector<double>& batches_or_empty(const ReplicaSummary& r, int k) {
  static const std::vector<double> empty;
  auto it = r.q_batches.find(k);
  return it == r.q_batches.end() ? empty : it->second;
}

double get_or_zero(const std::map<int, double>& m, int k) {
  auto it = m.find(k);
  return it == m.end() ? 0.0 : it->second;
}

double z_score(double diff, double se) {
  if (se > 0.0) return std::abs(diff) / se;
  return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

}  // namespace

Configuration initial_configuration(const PotentialSpec& spec, int dim, int N, double L,
                                    std::uint64_t seed) {
  if (N < 1) throw ParameterError("N must be >= 1");
  if (!(L > 0.0)) throw ParameterError("box side L must be > 0");
  check_density(spec, dim, N, L);
  Rng rng(seed);
  Configuration config(dim, L);
  CellList cells(dim, std::max(spec.r_hc(), 1e-3 * L));
  const double hc2 = spec.r_hc() * spec.r_hc();
  std::vector<double> x(dim);
  const long budget = 10000;
  for (int i = 0; i < N; ++i) {
    bool placed = false;
    for (long attempt = 0; attempt < budget && !placed; ++attempt) {
      for (int c = 0; c < dim; ++c) x[c] = rng.uniform(0.0, L);
      bool ok = true;
      cells.for_each_near(x, [&](std::size_t j) {
        if (ok && squared_distance(x, config.position(j)) < hc2) ok = false;
      });
      if (!ok) continue;
      cells.insert(config.size(), x);
      config.push_back(x);
      placed = true;
    }
    if (!placed) {
      const double rho_cp = rsa_jamming_fraction(dim) / ball_volume(dim, 0.5 * spec.r_hc());
      throw ParameterError("no hard-core-feasible placement for particle " + std::to_string(i) +
                           " after " + std::to_string(budget) +
                           " attempts; density is too close to rho_cp ~ " + fmt_double(rho_cp));
    }
  }
  return config;
}

MCResult run_canonical(const PotentialSpec& spec, int dim, int N, double L, double beta, double R,
                       const MCParams& params) {
  if (dim < 1 || dim > 3) throw ParameterError("dim must be 1, 2 or 3");
  if (N < 1) throw ParameterError("N must be >= 1");
  if (!(L > 0.0)) throw ParameterError("box side L must be > 0");
  if (!(beta > 0.0)) throw ParameterError("beta must be > 0");
  if (!(R > 0.0)) throw ParameterError("R must be > 0");
  if (params.replicas < 1) throw ParameterError("replicas must be >= 1");
  if (params.burn_in_sweeps < 0 || params.burn_in_sweeps >= params.n_sweeps)
    throw ParameterError("burn_in_sweeps must lie in [0, n_sweeps)");
  if (params.measure_every < 1) throw ParameterError("measure_every must be >= 1");
  if (!(params.step_size > 0.0)) throw ParameterError("step_size must be > 0");
  if (params.k_max_trace < 1) throw ParameterError("k_max_trace must be >= 1");
  if (params.snapshot_every < 0) throw ParameterError("snapshot_every must be >= 0");
  if ((params.n_sweeps - params.burn_in_sweeps) / params.measure_every < 1)
    throw ParameterError("no measured frames: increase n_sweeps or reduce measure_every");
  check_density(spec, dim, N, L);

  std::vector<ReplicaRun> runs(params.replicas);
  parallel_for(runs.size(), [&](std::size_t r) {
    runs[r] = run_replica(spec, dim, N, L, beta, R, params, derive_seed(params.seed, r, 0x3C),
                          r == 0);
  });

  MCResult res;
  res.spec_id = spec.fingerprint();
  res.dim = dim;
  res.N = N;
  res.L = L;
  res.beta = beta;
  res.R = R;
  res.params = params;
  res.energy_min = runs[0].energy_min;
  res.energy_max = runs[0].energy_max;
  std::map<int, bool> keys;
  double acc = 0.0, e_mean = 0.0;
  for (auto& run : runs) {
    acc += run.summary.acceptance;
    e_mean += run.summary.energy_mean;
    res.energy_min = std::min(res.energy_min, run.energy_min);
    res.energy_max = std::max(res.energy_max, run.energy_max);
    res.max_energy_drift = std::max(res.max_energy_drift, run.max_drift);
    res.max_identity_error = std::max(res.max_identity_error, run.max_identity_error);
    for (auto& [k, v] : run.summary.q_mean) keys[k] = true;
    res.replicas.push_back(run.summary);
  }
  const double n = static_cast<double>(runs.size());
  res.acceptance_rate = acc / n;
  res.energy.mean = e_mean / n;
  double ev = 0.0;
  for (auto& r : res.replicas) ev += std::pow(r.energy_mean - res.energy.mean, 2);
  res.energy.stderr_ = runs.size() > 1 ? std::sqrt(ev / (n - 1) / n) : 0.0;

  for (auto [k, unused] : keys) {
    (void)unused;
    std::vector<double> all;
    double m = 0.0;
    for (auto& r : res.replicas) {
      m += get_or_zero(r.q_mean, k);
      const auto& bv = batches_or_empty(r, k);
      if (bv.empty()) all.insert(all.end(), params.batches, 0.0);
      else all.insert(all.end(), bv.begin(), bv.end());
    }
    res.q_bar[k] = Estimate{m / n, batch_se(all)};
  }
  res.trace = std::move(runs[0].trace);
  res.snapshots = std::move(runs[0].snapshots);
  res.final_configuration = std::move(runs[0].final_configuration);
  return res;
}

EquilibrationReport equilibration_check(const MCResult& result, double threshold) {
  EquilibrationReport rep;
  const auto& reps = result.replicas;
  for (std::size_t a = 0; a < reps.size(); ++a)
    for (std::size_t b = a + 1; b < reps.size(); ++b)
      if (reps[a].energy_variance > 0.0 && reps[a].energy_mean == reps[b].energy_mean &&
          reps[a].energy_variance == reps[b].energy_variance && reps[a].q_mean == reps[b].q_mean)
        rep.zero_variance_anomaly = true;

  for (auto [k, est] : result.q_bar) {
    EquilibrationEntry e;
    e.k = k;
    double diff = 0.0, var = 0.0;
    for (const auto& r : reps) {
      const double se = batch_se(batches_or_empty(r, k));
      diff += get_or_zero(r.q_first_half, k) - get_or_zero(r.q_second_half, k);
      var += 4.0 * se * se;
    }
    const double nr = static_cast<double>(reps.size());
    e.split_half_z = z_score(diff / nr, std::sqrt(var) / nr);
    for (const auto& r : reps) {
      const double se = batch_se(batches_or_empty(r, k));
      e.cross_replica_z =
          std::max(e.cross_replica_z,
                   z_score(get_or_zero(r.q_mean, k) - est.mean, std::hypot(se, est.stderr_)));
    }
    rep.max_z = std::max({rep.max_z, e.split_half_z, e.cross_replica_z});
    rep.entries.push_back(e);
  }
  rep.pass = !rep.zero_variance_anomaly && rep.max_z <= threshold;
  return rep;
}

LLNReport lln_experiment(const PotentialSpec& spec, const GroundStateTable& table, double nu,
                         const std::vector<double>& betas, int N, const MCParams& params, int K) {
  if (betas.empty()) throw ParameterError("lln: empty beta list");
  if (K < 1) throw ParameterError("lln: K must be >= 1");
  for (const Kink& k : kinks(table))
    if (std::abs(k.nu - nu) <= 1e-9 * std::max(1.0, std::abs(nu)))
      throw ParameterError("lln: nu=" + fmt_double(nu) + " lies on a kink of the profile");
  LLNReport rep;
  rep.nu = nu;
  rep.K = K;
  rep.nu_star = table.nu_star ? *table.nu_star : compute_nu_star(table);
  const MuResult m = mu(nu, table);
  rep.mu = m.value;
  rep.prediction = m.argmin;
  const bool bounded = nu > rep.nu_star;
  rep.regime = bounded ? "bounded" : "unbounded";
  if (bounded) {
    if (m.argmin.empty() || m.argmin.front().is_bulk())
      throw ParameterError("lln: no finite optimal cluster size at nu=" + fmt_double(nu));
    rep.target_k = m.argmin.front().k();
  }
  const int d = table.dim;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    const double beta = betas[i];
    if (!(beta > 0.0)) throw ParameterError("lln: beta must be > 0");
    LLNPoint pt;
    pt.beta = beta;
    pt.rho = std::exp(-beta * nu);
    pt.L = std::pow(N / pt.rho, 1.0 / d);
    MCParams p = params;
    p.seed = derive_seed(params.seed, i, 0x11);
    const MCResult r = run_canonical(spec, d, N, pt.L, beta, table.R, p);
    if (bounded) {
      auto it = r.q_bar.find(rep.target_k);
      pt.observable = it == r.q_bar.end() ? Estimate{} : it->second;
    } else {
      double var = 0.0;
      for (auto [k, e] : r.q_bar)
        if (k <= K) {
          pt.observable.mean += e.mean;
          var += e.stderr_ * e.stderr_;
        }
      pt.observable.stderr_ = std::sqrt(var);
    }
    pt.acceptance = r.acceptance_rate;
    pt.equilibrated = equilibration_check(r).pass;
    rep.points.push_back(pt);
  }
  for (std::size_t i = 1; i < rep.points.size(); ++i) {
    const double prev = rep.points[i - 1].observable.mean, cur = rep.points[i].observable.mean;
    ++rep.comparisons;
    if (bounded ? cur > prev : cur < prev) ++rep.improvements;
  }
  return rep;
}

void write_trace_csv(std::ostream& os, const MCResult& result) {
  os << "sweep,energy";
  for (int k = 1; k <= result.params.k_max_trace; ++k) os << ",q_" << k;
  os << ",overflow_mass\n";
  for (const auto& row : result.trace) {
    os << row.sweep << ',' << fmt_double(row.energy);
    for (double q : row.q) os << ',' << fmt_double(q);
    os << ',' << fmt_double(row.overflow_mass) << '\n';
  }
}

namespace {

nlohmann::ordered_json params_json(const MCParams& p) {
  nlohmann::ordered_json j;
  j["n_sweeps"] = p.n_sweeps;
  j["burn_in_sweeps"] = p.burn_in_sweeps;
  j["step_size"] = p.step_size;
  j["measure_every"] = p.measure_every;
  j["replicas"] = p.replicas;
  j["seed"] = p.seed;
  j["k_max_trace"] = p.k_max_trace;
  j["batches"] = p.batches;
  j["snapshot_every"] = p.snapshot_every;
  return j;
}

nlohmann::ordered_json estimate_json(const Estimate& e) {
  return {{"mean", e.mean}, {"stderr", e.stderr_}};
}

}  // namespace

std::string mc_result_to_json(const MCResult& r) {
  nlohmann::ordered_json j;
  j["spec_id"] = r.spec_id;
  j["dim"] = r.dim;
  j["N"] = r.N;
  j["L"] = r.L;
  j["beta"] = r.beta;
  j["R"] = r.R;
  j["params"] = params_json(r.params);
  nlohmann::ordered_json q = nlohmann::ordered_json::object();
  for (auto [k, e] : r.q_bar) q[std::to_string(k)] = estimate_json(e);
  j["q_bar"] = q;
  j["acceptance_rate"] = r.acceptance_rate;
  j["energy"] = {{"mean", r.energy.mean},
                 {"stderr", r.energy.stderr_},
                 {"min", r.energy_min},
                 {"max", r.energy_max},
                 {"max_drift", r.max_energy_drift}};
  j["max_identity_error"] = r.max_identity_error;
  nlohmann::ordered_json reps = nlohmann::ordered_json::array();
  for (const auto& s : r.replicas)
    reps.push_back({{"seed", s.seed},
                    {"acceptance", s.acceptance},
                    {"final_step", s.final_step},
                    {"energy_mean", s.energy_mean},
                    {"frames", s.frames}});
  j["replicas"] = reps;
  const EquilibrationReport eq = equilibration_check(r);
  j["equilibration"] = {{"pass", eq.pass},
                        {"zero_variance_anomaly", eq.zero_variance_anomaly},
                        {"max_z", std::isfinite(eq.max_z) ? nlohmann::ordered_json(eq.max_z)
                                                          : nlohmann::ordered_json("inf")}};
  return j.dump(2) + "\n";
}

std::string lln_report_to_json(const LLNReport& r) {
  nlohmann::ordered_json j;
  j["nu"] = r.nu;
  j["nu_star"] = r.nu_star;
  j["regime"] = r.regime;
  if (r.regime == "bounded") j["target_k"] = r.target_k;
  else j["K"] = r.K;
  nlohmann::ordered_json pred = nlohmann::ordered_json::array();
  for (const auto& b : r.prediction) pred.push_back(b.to_string());
  j["prediction"] = pred;
  j["mu"] = r.mu;
  nlohmann::ordered_json pts = nlohmann::ordered_json::array();
  for (const auto& p : r.points)
    pts.push_back({{"beta", p.beta},
                   {"rho", p.rho},
                   {"L", p.L},
                   {"observable", estimate_json(p.observable)},
                   {"acceptance", p.acceptance},
                   {"equilibrated", p.equilibrated}});
  j["points"] = pts;
  j["improvements"] = r.improvements;
  j["comparisons"] = r.comparisons;
  return j.dump(2) + "\n";
}

}  // namespace clustergas
