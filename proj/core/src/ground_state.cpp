#include "clustergas/ground_state.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <json.hpp>

#include "clustergas/errors.hpp"
#include "clustergas/parallel.hpp"
#include "clustergas/rng.hpp"

namespace clustergas {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

bool is_connected(std::span<const double> x, int dim, double R) {
  const std::size_t n = x.size() / dim;
  if (n <= 1) return true;
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  const double R2 = R * R;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    for (std::size_t j = 0; j < n; ++j) {
      if (seen[j]) continue;
      if (squared_distance(x.subspan(i * dim, dim), x.subspan(j * dim, dim)) <= R2) {
        seen[j] = 1;
        ++count;
        stack.push_back(j);
      }
    }
  }
  return count == n;
}

void shape_metrics(std::span<const double> x, int dim, double& r_min, double& diameter) {
  const std::size_t n = x.size() / dim;
  double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::sqrt(squared_distance(x.subspan(i * dim, dim), x.subspan(j * dim, dim)));
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
  r_min = n >= 2 ? dmin : 0.0;
  diameter = dmax;
}

void center(std::vector<double>& x, int dim) {
  const std::size_t n = x.size() / dim;
  if (n == 0) return;
  for (int c = 0; c < dim; ++c) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += x[i * dim + c];
    m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) x[i * dim + c] -= m;
  }
}

void random_direction(Rng& rng, int dim, double* u) {
  if (dim == 1) {
    u[0] = rng.uniform() < 0.5 ? -1.0 : 1.0;
    return;
  }
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (int c = 0; c < dim; ++c) {
      u[c] = rng.normal();
      n2 += u[c] * u[c];
    }
  } while (n2 < 1e-12);
  const double inv = 1.0 / std::sqrt(n2);
  for (int c = 0; c < dim; ++c) u[c] *= inv;
}

/// Grows a connected cluster by attaching each particle near a random
/// earlier one at roughly the pair-minimum distance.
std::vector<double> random_connected_start(const PotentialSpec& spec, int k, int dim, double R,
                                           double r_star, Rng& rng) {
  std::vector<double> x(static_cast<std::size_t>(k) * dim, 0.0);
  const double hc2 = spec.r_hc() * spec.r_hc();
  for (int i = 1; i < k; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
      const std::size_t j = rng.below(static_cast<std::uint64_t>(i));
      double u[3];
      random_direction(rng, dim, u);
      const double dist = std::min(R, r_star * (1.0 + 0.15 * rng.uniform(-1.0, 1.0)));
      double cand[3];
      for (int c = 0; c < dim; ++c) cand[c] = x[j * dim + c] + dist * u[c];
      placed = true;
      for (int m = 0; m < i && placed; ++m) {
        const double d2 = squared_distance(std::span<const double>(cand, dim),
                                           std::span<const double>(x.data() + m * dim, dim));
        if (d2 < hc2 * 1.0404 || d2 == 0.0) placed = false;
      }
      if (placed)
        for (int c = 0; c < dim; ++c) x[i * dim + c] = cand[c];
    }
    if (!placed) {
      // Beyond the rightmost particle along the first axis: always feasible.
      std::size_t jmax = 0;
      for (int m = 1; m < i; ++m)
        if (x[m * dim] > x[jmax * dim]) jmax = m;
      for (int c = 0; c < dim; ++c) x[i * dim + c] = x[jmax * dim + c];
      x[i * dim] += std::min(R, std::max(r_star, spec.r_hc()));
    }
  }
  return x;
}

/// Places cluster b to the right of cluster a along the first axis, with
/// one cross pair at distance r and all others farther apart in x.
std::vector<double> join_clusters(const std::vector<double>& a, const std::vector<double>& b,
                                  int dim, double r) {
  const std::size_t na = a.size() / dim, nb = b.size() / dim;
  std::size_t ia = 0, ib = 0;
  for (std::size_t i = 1; i < na; ++i)
    if (a[i * dim] > a[ia * dim]) ia = i;
  for (std::size_t i = 1; i < nb; ++i)
    if (b[i * dim] < b[ib * dim]) ib = i;
  std::vector<double> out = a;
  for (std::size_t i = 0; i < nb; ++i)
    for (int c = 0; c < dim; ++c) {
      double target = a[ia * dim + c] + (c == 0 ? r : 0.0);
      out.push_back(b[i * dim + c] - b[ib * dim + c] + target);
    }
  return out;
}

struct StartResult {
  double energy = std::numeric_limits<double>::infinity();
  std::vector<double> coords;
  bool converged = false;
};

}  // namespace

LocalMinimum local_minimize(const PotentialSpec& spec, std::span<double> x, int dim, double tol,
                            int max_iters) {
  const std::size_t n = x.size();
  LocalMinimum out;
  std::vector<double> g(n), gn(n), xn(n), p(n);
  double f = 0.0;
  if (!energy_and_gradient(spec, x, dim, f, g))
    throw DomainError("local_minimize: start configuration violates the hard core");
  out.energy = f;
  if (n == 0 || n == static_cast<std::size_t>(dim)) {
    out.converged = true;
    return out;
  }
  const double gtol = tol * spec.energy_scale() / spec.length_scale();
  const double first_step = 0.1 * spec.length_scale();
  constexpr std::size_t history = 8;
  std::deque<std::vector<double>> S, Y;
  std::deque<double> rho;
  std::vector<double> alpha(history);

  for (int it = 0; it < max_iters; ++it) {
    out.iterations = it;
    if (inf_norm(g) <= gtol) {
      out.converged = true;
      break;
    }
    // Two-loop recursion.
    for (std::size_t i = 0; i < n; ++i) p[i] = -g[i];
    for (std::size_t m = S.size(); m-- > 0;) {
      alpha[m] = rho[m] * dot(S[m], p);
      for (std::size_t i = 0; i < n; ++i) p[i] -= alpha[m] * Y[m][i];
    }
    if (!S.empty()) {
      const double gamma = dot(S.back(), Y.back()) / dot(Y.back(), Y.back());
      for (double& v : p) v *= gamma;
    } else {
      const double scale = first_step / std::sqrt(dot(g, g));
      for (double& v : p) v *= scale;
    }
    for (std::size_t m = 0; m < S.size(); ++m) {
      const double beta = rho[m] * dot(Y[m], p);
      for (std::size_t i = 0; i < n; ++i) p[i] += S[m][i] * (alpha[m] - beta);
    }
    double slope = dot(g, p);
    if (!(slope < 0.0)) {
      S.clear();
      Y.clear();
      rho.clear();
      const double scale = first_step / std::sqrt(dot(g, g));
      for (std::size_t i = 0; i < n; ++i) p[i] = -g[i] * scale;
      slope = dot(g, p);
    }

    double step = 1.0, fn = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + step * p[i];
      if (energy_and_gradient(spec, xn, dim, fn, gn) && fn <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (S.empty()) break;
      S.clear();
      Y.clear();
      rho.clear();
      continue;
    }
    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = xn[i] - x[i];
      y[i] = gn[i] - g[i];
    }
    const double sy = dot(s, y);
    std::copy(xn.begin(), xn.end(), x.begin());
    g.swap(gn);
    const bool stalled = f - fn <= 0.0;
    f = fn;
    if (sy > 1e-300) {
      S.push_back(std::move(s));
      Y.push_back(std::move(y));
      rho.push_back(1.0 / sy);
      if (S.size() > history) {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
    }
    if (stalled && inf_norm(g) <= 1e3 * gtol) {
      out.converged = true;
      break;
    }
  }
  if (inf_norm(g) <= gtol) out.converged = true;
  out.energy = f;
  return out;
}

ClusterMinimum minimize_cluster(const PotentialSpec& spec, int k, const GroundStateOptions& opts,
                                std::uint64_t seed, std::span<const std::vector<double>> extra_starts) {
  if (k < 1) throw ParameterError("minimize_cluster: k must be >= 1");
  const int dim = opts.dim;
  ClusterMinimum best;
  best.k = k;
  if (k == 1) {
    best.coords.assign(dim, 0.0);
    best.multistart_count = 1;
    return best;
  }
  const double r_star = spec.pair_minimum().first;
  const int random_starts = opts.multistarts > 0 ? opts.multistarts : 200 * k;
  const std::size_t total = static_cast<std::size_t>(random_starts) + extra_starts.size();
  std::vector<StartResult> results(total);

  parallel_for(total, [&](std::size_t s) {
    Rng rng(derive_seed(seed, s, static_cast<std::uint64_t>(k)));
    std::vector<double> x = s < static_cast<std::size_t>(random_starts)
                                ? random_connected_start(spec, k, dim, opts.R, r_star, rng)
                                : extra_starts[s - random_starts];
    StartResult& res = results[s];
    if (total_energy(spec, x, dim).is_infinite()) return;
    std::vector<double> start = x;
    const double start_energy = total_energy(spec, x, dim).value();
    LocalMinimum lm = local_minimize(spec, x, dim, opts.tol, opts.max_iters);
    if (is_connected(x, dim, opts.R)) {
      res.energy = lm.energy;
      res.coords = x;
      res.converged = lm.converged;
    } else if (is_connected(start, dim, opts.R)) {
      res.energy = start_energy;
      res.coords = start;
      res.converged = false;
    }
    if (res.coords.empty()) return;
    std::vector<double> trial;
    for (int h = 0; h < opts.hops; ++h) {
      bool feasible = false;
      for (int attempt = 0; attempt < 20 && !feasible; ++attempt) {
        trial = res.coords;
        for (double& v : trial) v += opts.perturbation_scale * rng.normal();
        feasible = total_energy(spec, trial, dim).is_finite();
      }
      if (!feasible) continue;
      LocalMinimum hm = local_minimize(spec, trial, dim, opts.tol, opts.max_iters);
      if (hm.energy < res.energy && is_connected(trial, dim, opts.R)) {
        res.energy = hm.energy;
        res.coords = trial;
        res.converged = hm.converged;
      }
    }
  });

  std::size_t arg = total;
  for (std::size_t s = 0; s < total; ++s)
    if (!results[s].coords.empty() && (arg == total || results[s].energy < results[arg].energy))
      arg = s;
  if (arg == total) throw NumericalError("minimize_cluster: no feasible connected start");

  best.coords = std::move(results[arg].coords);
  center(best.coords, dim);
  best.energy = total_energy(spec, best.coords, dim).value();
  best.converged = results[arg].converged;
  best.multistart_count = static_cast<int>(total);
  shape_metrics(best.coords, dim, best.r_min, best.diameter);
  return best;
}

GroundStateTable synthetic_table(std::vector<double> energies, std::optional<double> e_infty,
                                 int dim) {
  GroundStateTable t;
  t.spec_id = "synthetic";
  t.dim = dim;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    ClusterMinimum m;
    m.k = static_cast<int>(i + 1);
    m.energy = energies[i];
    t.entries.push_back(std::move(m));
  }
  t.e_infty = e_infty;
  if (e_infty) {
    t.nu_star = compute_nu_star(t, &t.nu_star_argmin);
    t.nu_star_truncated = t.nu_star_argmin == t.k_max();
  }
  return t;
}

GroundStateTable build_table(const PotentialSpec& spec, int k_max, const GroundStateOptions& opts,
                             std::uint64_t seed) {
  if (k_max < 2) throw ParameterError("build_table: k_max must be >= 2");
  GroundStateTable t;
  t.spec_id = spec.fingerprint();
  t.dim = opts.dim;
  t.R = opts.R;
  t.seed = seed;
  const double r_star = spec.pair_minimum().first;
  for (int k = 1; k <= k_max; ++k) {
    std::vector<std::vector<double>> extra;
    for (int j = 1; j <= k / 2; ++j)
      extra.push_back(join_clusters(t.entries[j - 1].coords, t.entries[k - j - 1].coords, opts.dim,
                                    r_star));
    t.entries.push_back(minimize_cluster(spec, k, opts, derive_seed(seed, k, 0x6753), extra));
    if (!t.entries.back().converged) t.warning = true;
  }
  if (k_max >= 6) finalize_table(t);
  return t;
}

EInftyFit estimate_e_infty(const GroundStateTable& table, bool plain_average) {
  const int kmax = table.k_max();
  if (kmax < 6) throw ParameterError("estimate_e_infty: need k_max >= 6");
  const int k0 = kmax / 2 + 1;
  const double p = static_cast<double>(table.dim - 1) / table.dim;
  EInftyFit fit;
  if (plain_average) {
    double s = 0.0;
    int n = 0;
    for (int k = k0; k <= kmax; ++k, ++n) s += table.E(k) / k;
    fit.e_infty = s / n;
    double r = 0.0;
    for (int k = k0; k <= kmax; ++k) r += std::pow(table.E(k) / k - fit.e_infty, 2);
    fit.residual = std::sqrt(r / n);
  } else {
    // Normal equations for E = e k + c k^p.
    double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
    int n = 0;
    for (int k = k0; k <= kmax; ++k, ++n) {
      const double u = k, w = std::pow(k, p), e = table.E(k);
      a11 += u * u;
      a12 += u * w;
      a22 += w * w;
      b1 += u * e;
      b2 += w * e;
    }
    const double det = a11 * a22 - a12 * a12;
    fit.e_infty = (b1 * a22 - b2 * a12) / det;
    fit.surface = (a11 * b2 - a12 * b1) / det;
    double r = 0.0;
    for (int k = k0; k <= kmax; ++k)
      r += std::pow(table.E(k) - fit.e_infty * k - fit.surface * std::pow(k, p), 2);
    fit.residual = std::sqrt(r / n);
  }
  if (!(fit.e_infty < 0.0))
    throw NumericalError("estimate_e_infty: fitted bulk energy is not negative");
  fit.low_confidence = fit.residual > 0.05 * std::abs(fit.e_infty);
  return fit;
}

double compute_nu_star(const GroundStateTable& table, int* argmin) {
  if (!table.e_infty) throw ParameterError("compute_nu_star: table has no e_infty");
  const double e = *table.e_infty;
  double best = std::numeric_limits<double>::infinity();
  int arg = 0;
  for (int k = 1; k <= table.k_max(); ++k) {
    const double v = table.E(k) - k * e;
    if (v < best) {
      best = v;
      arg = k;
    }
  }
  if (!(best > 0.0))
    throw NumericalError("compute_nu_star: nonpositive value " + std::to_string(best) + " at k=" +
                         std::to_string(arg) + "; table or bulk estimate is inconsistent");
  if (argmin) *argmin = arg;
  return best;
}

void finalize_table(GroundStateTable& table, bool plain_average) {
  const EInftyFit fit = estimate_e_infty(table, plain_average);
  table.e_infty = fit.e_infty;
  table.residual = fit.residual;
  table.e_infty_low_confidence = fit.low_confidence;
  table.nu_star = compute_nu_star(table, &table.nu_star_argmin);
  table.nu_star_truncated = table.nu_star_argmin == table.k_max();
}

StructuralReport check_structural_assumptions(const GroundStateTable& table, double r_hc,
                                              double c_guess) {
  if (table.entries.empty()) throw ParameterError("check_structural_assumptions: empty table");
  StructuralReport rep;
  rep.min_r_min = std::numeric_limits<double>::infinity();
  for (const auto& e : table.entries) {
    if (e.k >= 2) rep.min_r_min = std::min(rep.min_r_min, e.r_min);
    rep.max_diameter_ratio =
        std::max(rep.max_diameter_ratio, e.diameter / std::pow(e.k, 1.0 / table.dim));
  }
  rep.r_min_ok = rep.min_r_min >= r_hc;
  rep.diameter_ok = rep.max_diameter_ratio <= c_guess;
  return rep;
}

std::string table_to_json(const GroundStateTable& table) {
  nlohmann::ordered_json j;
  j["spec_id"] = table.spec_id;
  j["d"] = table.dim;
  j["R"] = table.R;
  auto& entries = j["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : table.entries) {
    nlohmann::ordered_json row;
    row["k"] = e.k;
    row["E"] = e.energy;
    auto& pts = row["coords"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i + table.dim <= e.coords.size(); i += table.dim)
      pts.push_back(std::vector<double>(e.coords.begin() + i, e.coords.begin() + i + table.dim));
    row["r_min"] = e.r_min;
    row["diameter"] = e.diameter;
    row["multistart_count"] = e.multistart_count;
    row["converged"] = e.converged;
    entries.push_back(std::move(row));
  }
  j["e_infty"] = table.e_infty ? nlohmann::ordered_json(*table.e_infty) : nullptr;
  j["residual"] = table.residual;
  j["e_infty_low_confidence"] = table.e_infty_low_confidence;
  j["nu_star"] = table.nu_star ? nlohmann::ordered_json(*table.nu_star) : nullptr;
  j["nu_star_argmin"] = table.nu_star_argmin;
  j["nu_star_truncated"] = table.nu_star_truncated;
  j["warning"] = table.warning;
  j["seed"] = table.seed;
  return j.dump(2) + "\n";
}

GroundStateTable table_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("ground-state table: ") + e.what());
  }
  try {
    GroundStateTable t;
    t.spec_id = j.at("spec_id").get<std::string>();
    t.dim = j.at("d").get<int>();
    t.R = j.value("R", 2.0);
    for (const auto& row : j.at("entries")) {
      ClusterMinimum m;
      m.k = row.at("k").get<int>();
      m.energy = row.at("E").get<double>();
      for (const auto& pt : row.at("coords"))
        for (double v : pt) m.coords.push_back(v);
      m.r_min = row.at("r_min").get<double>();
      m.diameter = row.at("diameter").get<double>();
      m.multistart_count = row.value("multistart_count", 0);
      m.converged = row.at("converged").get<bool>();
      if (m.k != static_cast<int>(t.entries.size()) + 1)
        throw ConfigError("ground-state table: entries must list k = 1, 2, ... in order");
      t.entries.push_back(std::move(m));
    }
    if (!j.at("e_infty").is_null()) t.e_infty = j.at("e_infty").get<double>();
    t.residual = j.value("residual", 0.0);
    t.e_infty_low_confidence = j.value("e_infty_low_confidence", false);
    if (!j.at("nu_star").is_null()) t.nu_star = j.at("nu_star").get<double>();
    t.nu_star_argmin = j.value("nu_star_argmin", 0);
    t.nu_star_truncated = j.value("nu_star_truncated", false);
    t.warning = j.value("warning", false);
    t.seed = j.at("seed").get<std::uint64_t>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("ground-state table: ") + e.what());
  }
}

}  // namespace clustergas
