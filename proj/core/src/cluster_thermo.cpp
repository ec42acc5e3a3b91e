#include "clustergas/cluster_thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include <boost/math/tools/roots.hpp>
#include <json.hpp>

#include "clustergas/errors.hpp"
#include "clustergas/io.hpp"
#include "clustergas/oracle.hpp"
#include "clustergas/parallel.hpp"
#include "clustergas/rng.hpp"

namespace clustergas {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double log_factorial(int n) { return std::lgamma(n + 1.0); }

/// Number of orderings of particles 1..k-1 after particle 0 such that each
/// particle is within R of an earlier one.
double count_orderings(const std::vector<unsigned>& adj, int k) {
  const unsigned full = (1u << k) - 1u;
  std::vector<double> ways(full + 1, 0.0);
  ways[1] = 1.0;
  for (unsigned mask = 1; mask <= full; mask += 2) {
    const double w = ways[mask];
    if (w == 0.0) continue;
    unsigned reach = 0;
    for (int i = 0; i < k; ++i)
      if (mask >> i & 1u) reach |= adj[i];
    reach &= ~mask;
    while (reach) {
      const int j = __builtin_ctz(reach);
      reach &= reach - 1;
      ways[mask | (1u << j)] += w;
    }
  }
  return ways[full];
}

void uniform_in_ball(Rng& rng, int dim, double R, double* u) {
  if (dim == 1) {
    u[0] = rng.uniform(-R, R);
    return;
  }
  double n2;
  do {
    n2 = 0.0;
    for (int c = 0; c < dim; ++c) {
      u[c] = rng.uniform(-R, R);
      n2 += u[c] * u[c];
    }
  } while (n2 > R * R);
}

struct ChunkSums {
  double sum = 0.0;
  double sum2 = 0.0;
  long n = 0;
};

/// Tree proposal: particle 0 at the origin, each later particle uniform in
/// the R-ball of a uniformly chosen earlier one. Every connected
/// configuration is reachable; 1/(k A(x) q(x)) with A(x) the number of
/// admissible orderings removes the labelling bias.
std::pair<double, double> importance_sample(const PotentialSpec& spec, int k, double beta,
                                            int dim, double R, std::optional<double> a,
                                            long samples, std::uint64_t seed) {
  if (k > 12) throw CapabilityError("importance sampling: supported for k <= 12");
  const int chunks = 64;
  const long per_chunk = std::max<long>(1, (samples + chunks - 1) / chunks);
  const double ball = ball_volume(dim, R);
  const double R2 = R * R;
  std::vector<ChunkSums> sums(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng(derive_seed(seed, c, 0x15));
    std::vector<double> x(static_cast<std::size_t>(k) * dim);
    std::vector<unsigned> adj(k);
    ChunkSums& s = sums[c];
    for (long n = 0; n < per_chunk; ++n) {
      std::fill(x.begin(), x.end(), 0.0);
      for (int i = 1; i < k; ++i) {
        const std::size_t j = rng.below(static_cast<std::uint64_t>(i));
        double u[3];
        uniform_in_ball(rng, dim, R, u);
        for (int d = 0; d < dim; ++d) x[i * dim + d] = x[j * dim + d] + u[d];
      }
      std::fill(adj.begin(), adj.end(), 0u);
      double log_q = 0.0;
      for (int i = 1; i < k; ++i) {
        int cnt = 0;
        for (int j = 0; j < i; ++j) {
          double d2 = 0.0;
          for (int d = 0; d < dim; ++d) {
            const double dx = x[i * dim + d] - x[j * dim + d];
            d2 += dx * dx;
          }
          if (d2 <= R2) {
            ++cnt;
            adj[i] |= 1u << j;
            adj[j] |= 1u << i;
          }
        }
        log_q += std::log(static_cast<double>(cnt) / (i * ball));
      }
      double w = 0.0;
      const ExtendedReal U = total_energy(spec, x, dim);
      if (U.is_finite()) {
        w = std::exp(-beta * U.value() - log_q) / (k * count_orderings(adj, k));
        if (a) {
          for (int d = 0; d < dim; ++d) {
            double lo = x[d], hi = x[d];
            for (int i = 1; i < k; ++i) {
              lo = std::min(lo, x[i * dim + d]);
              hi = std::max(hi, x[i * dim + d]);
            }
            w *= std::max(0.0, 1.0 - (hi - lo) / *a);
          }
        }
      }
      s.sum += w;
      s.sum2 += w * w;
      ++s.n;
    }
  });
  ChunkSums tot;
  for (const auto& s : sums) {
    tot.sum += s.sum;
    tot.sum2 += s.sum2;
    tot.n += s.n;
  }
  const double mean = tot.sum / tot.n;
  const double var = std::max(0.0, tot.sum2 / tot.n - mean * mean);
  return {mean, std::sqrt(var / (tot.n - 1))};
}

double sup_abs_v(const PotentialSpec& spec, double lo, double hi) {
  hi = std::min(hi, spec.b());
  if (!(hi > lo)) return 0.0;
  double m = std::max(std::abs(spec.finite_value(lo)), std::abs(spec.finite_value(hi)));
  const int n = 4000;
  for (int i = 1; i < n; ++i) m = std::max(m, std::abs(spec.finite_value(lo + (hi - lo) * i / n)));
  const auto [r_star, v_star] = spec.pair_minimum();
  if (r_star > lo && r_star < hi) m = std::max(m, std::abs(v_star));
  return m;
}

}  // namespace

std::string to_string(ZMethod m) {
  return m == ZMethod::quadrature ? "quadrature" : "importance_sampling";
}

ZMethod parse_z_method(const std::string& s) {
  if (s == "quadrature") return ZMethod::quadrature;
  if (s == "importance_sampling" || s == "is") return ZMethod::importance_sampling;
  throw ConfigError("unknown Z method '" + s + "' (expected quadrature or importance_sampling)");
}

double cayley_upper_bound(int k, double beta, double E_k, double R, int dim) {
  if (k < 1) throw ParameterError("cayley_upper_bound: k must be >= 1");
  if (k == 1) return std::exp(-beta * E_k);
  const double log_val = -beta * E_k + (k - 2) * std::log(static_cast<double>(k)) -
                         log_factorial(k) + (k - 1) * std::log(ball_volume(dim, R));
  return std::exp(log_val);
}

double lattice_constant(const PotentialSpec& spec, double delta, double R, int dim) {
  const double s_lo = spec.r_hc() + delta;
  if (!(s_lo > 0.0)) throw ParameterError("lattice_constant: r_hc + delta must be > 0");
  const int reach = static_cast<int>(std::ceil(spec.b() / s_lo));
  const int ry = dim >= 2 ? reach : 0, rz = dim >= 3 ? reach : 0;
  double C = 0.0;
  for (int i = -reach; i <= reach; ++i)
    for (int j = -ry; j <= ry; ++j)
      for (int l = -rz; l <= rz; ++l) {
        if (i == 0 && j == 0 && l == 0) continue;
        const double norm = std::sqrt(static_cast<double>(i * i + j * j + l * l));
        if (norm * s_lo >= spec.b()) continue;
        C += sup_abs_v(spec, norm * s_lo, norm * R);
      }
  return C;
}

double lattice_lower_bound(const PotentialSpec& spec, int k, double beta, double delta, double a,
                           double R, int dim) {
  if (k < 1) throw ParameterError("lattice_lower_bound: k must be >= 1");
  if (!(delta > 0.0 && delta < (R - spec.r_hc()) / 3.0))
    throw ParameterError("lattice_lower_bound: delta must lie in (0, (R - r_hc)/3)");
  const double a_min = delta + std::pow(k, 1.0 / dim) * (spec.r_hc() + 2.0 * delta);
  if (!(a > a_min))
    throw ParameterError("lattice_lower_bound: a_k must exceed delta + k^{1/d}(r_hc + 2 delta) = " +
                         fmt_double(a_min));
  const double C = lattice_constant(spec, delta, R, dim);
  return std::exp(k * (std::log(ball_volume(dim, 0.5 * delta)) - beta * C));
}

double f_cluster_lower(int k, double E_k, double beta, double R, int dim) {
  if (k < 1) throw ParameterError("f_cluster_lower: k must be >= 1");
  const double log_count = (k - 2) * std::log(static_cast<double>(k)) - log_factorial(k) +
                           (k - 1) * std::log(ball_volume(dim, R));
  return E_k / k - (k == 1 ? 0.0 : log_count / (beta * k));
}

ClusterFreeEnergyEstimate z_cluster(const PotentialSpec& spec, int k, double beta, int dim,
                                    double R, std::optional<double> a, const ZOptions& opts,
                                    std::uint64_t seed) {
  if (k < 1) throw ParameterError("z_cluster: k must be >= 1");
  if (!(beta > 0.0)) throw ParameterError("z_cluster: beta must be > 0");
  if (dim < 1 || dim > 3) throw ParameterError("z_cluster: dim must be 1, 2 or 3");
  ClusterFreeEnergyEstimate est;
  est.k = k;
  est.beta = beta;
  est.dim = dim;
  est.R = R;
  est.a = a;
  est.method = opts.method;
  est.seed = seed;
  if (k == 1) {
    est.z = 1.0;
  } else if (opts.method == ZMethod::quadrature) {
    const QuadratureValue q = quadrature_z_cluster(spec, k, beta, dim, R, a, opts.tol);
    est.z = q.value;
    est.z_stderr = q.error;
  } else {
    auto [m, se] = importance_sample(spec, k, beta, dim, R, a, opts.samples, seed);
    est.z = m;
    est.z_stderr = se;
  }
  est.f = -std::log(est.z) / (beta * k) + 0.0;
  est.f_stderr = est.z > 0.0 ? est.z_stderr / (est.z * beta * k) : kNaN;
  est.flagged = !(est.z > 0.0) || est.z_stderr > 0.1 * est.z;

  std::optional<double> E = opts.E_k;
  if (!E && k == 1) E = 0.0;
  if (!E && k == 2) E = spec.pair_minimum().second;
  est.cayley_upper = E ? cayley_upper_bound(k, beta, *E, R, dim) : kNaN;

  est.delta = opts.delta ? *opts.delta : (R - spec.r_hc()) / 6.0;
  est.lattice_lower = kNaN;
  if (a && *a > est.delta + std::pow(k, 1.0 / dim) * (spec.r_hc() + 2.0 * est.delta))
    est.lattice_lower = lattice_lower_bound(spec, k, beta, est.delta, *a, R, dim);
  return est;
}

EntropyTerms entropy_terms(std::span<const double> p) {
  double total = 0.0, mean = 0.0, h = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0) || !std::isfinite(p[i]))
      throw ParameterError("entropy_terms: probabilities must be finite and >= 0");
    total += p[i];
    mean += static_cast<double>(i + 1) * p[i];
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  }
  if (std::abs(total - 1.0) > 1e-12) throw ParameterError("entropy_terms: p must sum to 1");
  if (!std::isfinite(mean)) throw ParameterError("entropy_terms: mean is not finite");
  EntropyTerms t{h, 1.0 + std::log(mean), true};
  t.holds = t.entropy >= -1e-12 && t.entropy <= t.bound + 1e-12;
  return t;
}

RelativeEntropy relative_entropy_lower(const std::map<int, double>& rho_vec, double rho) {
  if (!(rho > 0.0)) throw ParameterError("relative_entropy_lower: rho must be > 0");
  double mass = 0.0, s = 0.0;
  for (auto [k, r] : rho_vec) {
    if (k < 1 || !(r >= 0.0)) throw ParameterError("relative_entropy_lower: invalid entry");
    mass += k * r;
    if (r > 0.0) s += r * std::log(r / rho);
  }
  if (mass > rho * (1.0 + 1e-12))
    throw ParameterError("relative_entropy_lower: sum k rho_k exceeds rho");
  return {s, -2.0 * rho, s >= -2.0 * rho};
}

namespace {

double check_m_rho(const std::map<int, double>& rho_vec, double rho, const std::map<int, double>* f) {
  double mass = 0.0;
  for (auto [k, r] : rho_vec) {
    if (k < 1 || !(r >= 0.0)) throw ParameterError("rho_vec: entries must be >= 0 with k >= 1");
    if (f && r > 0.0 && !f->count(k))
      throw ParameterError("rho_vec: k=" + std::to_string(k) + " is not in the cluster table");
    mass += k * r;
  }
  if (mass > rho * (1.0 + 1e-12)) throw ParameterError("rho_vec: sum k rho_k exceeds rho");
  return mass;
}

double xlogx_minus(double r) { return r > 0.0 ? r * (std::log(r) - 1.0) : 0.0; }

}  // namespace

double ideal_free_energy(const IdealModel& m, const std::map<int, double>& rho_vec) {
  const double mass = check_m_rho(rho_vec, m.rho, &m.f);
  double s = 0.0, ent = 0.0;
  for (auto [k, r] : rho_vec) {
    if (r == 0.0) continue;
    s += k * r * m.f.at(k);
    ent += xlogx_minus(r);
  }
  return s + (m.rho - mass) * m.f_inf + ent / m.beta;
}

IdealMinimum minimize_ideal(const IdealModel& m) {
  if (m.f.empty()) throw ParameterError("minimize_ideal: empty cluster table");
  for (auto [k, f] : m.f)
    if (!std::isfinite(f)) throw ParameterError("minimize_ideal: f_k must be finite");
  if (!std::isfinite(m.f_inf)) throw ParameterError("minimize_ideal: f_inf must be finite");
  const double beta = m.beta;
  // log sum_k k exp(beta k (lambda - f_k)), increasing in lambda.
  auto log_mass = [&](double lambda) {
    double mx = -std::numeric_limits<double>::infinity();
    for (auto [k, f] : m.f) mx = std::max(mx, std::log(static_cast<double>(k)) + beta * k * (lambda - f));
    double s = 0.0;
    for (auto [k, f] : m.f) s += std::exp(std::log(static_cast<double>(k)) + beta * k * (lambda - f) - mx);
    return mx + std::log(s);
  };
  const double target = std::log(m.rho);
  IdealMinimum out;
  double lambda = m.f_inf;
  if (log_mass(lambda) > target) {
    out.binding = true;
    double step = 1.0 / beta;
    double lo = m.f_inf - step;
    int guard = 0;
    while (log_mass(lo) > target) {
      step *= 2.0;
      lo = m.f_inf - step;
      if (++guard > 200)
        throw NumericalError("minimize_ideal: cannot bracket the multiplier; last bracket [" +
                             fmt_double(lo) + ", " + fmt_double(m.f_inf) + "]");
    }
    std::uintmax_t iters = 200;
    auto res = boost::math::tools::toms748_solve(
        [&](double l) { return log_mass(l) - target; }, lo, m.f_inf, log_mass(lo) - target,
        log_mass(m.f_inf) - target, boost::math::tools::eps_tolerance<double>(52), iters);
    lambda = 0.5 * (res.first + res.second);
  }
  out.lambda = lambda;
  out.eta = m.f_inf - lambda;
  double mass = 0.0;
  for (auto [k, f] : m.f) {
    const double r = std::exp(beta * k * (lambda - f));
    out.rho_vec[k] = r;
    mass += k * r;
  }
  if (mass > m.rho) {
    // Root-finding tolerance can leave the mass a few ulps above rho.
    const double scale = m.rho / mass;
    for (auto& [k, r] : out.rho_vec) r *= scale;
    mass = m.rho;
  }
  out.value = ideal_free_energy(m, out.rho_vec);
  for (auto [k, r] : out.rho_vec) {
    if (r <= 0.0) continue;
    const double grad = k * m.f.at(k) - k * m.f_inf + std::log(r) / beta + out.eta * k;
    out.stationarity_residual = std::max(out.stationarity_residual, std::abs(grad));
  }
  out.slackness_residual = std::abs(out.eta * (m.rho - mass));
  return out;
}

double default_box_side(int k, double rho, double R, int dim) {
  const double a = std::min(k * R, std::pow(k / (2.0 * rho), 1.0 / dim) - R);
  if (!(a > 0.0))
    throw ParameterError("default_box_side: rho too large for (a_k + R)^d < k/rho with a_k > 0");
  return a;
}

SandwichInput build_sandwich_input(const PotentialSpec& spec, int dim, double R, double beta,
                                   double rho, int k_max, const ZOptions& opts, std::uint64_t seed,
                                   const std::map<int, double>& a) {
  if (k_max < 1) throw ParameterError("build_sandwich_input: k_max must be >= 1");
  SandwichInput in;
  in.beta = beta;
  in.rho = rho;
  in.dim = dim;
  in.R = R;
  for (int k = 1; k <= k_max; ++k) {
    const double ak = a.count(k) ? a.at(k) : default_box_side(k, rho, R, dim);
    const auto zu = z_cluster(spec, k, beta, dim, R, std::nullopt, opts, derive_seed(seed, k, 1));
    const auto zc = z_cluster(spec, k, beta, dim, R, ak, opts, derive_seed(seed, k, 2));
    in.terms[k] = SandwichTerm{zu.f, zu.f_stderr, ak, zc.f, zc.f_stderr};
  }
  in.f_inf = in.terms.at(k_max).f_cl;
  in.f_inf_stderr = in.terms.at(k_max).f_cl_stderr;
  const double L = std::pow(k_max / rho, 1.0 / dim);
  const auto zl = z_cluster(spec, k_max, beta, dim, R, L, opts, derive_seed(seed, k_max, 3));
  in.f_inf_upper = zl.f;
  in.f_inf_upper_stderr = zl.f_stderr;
  return in;
}

SandwichResult sandwich(const SandwichInput& in, const std::map<int, double>& rho_vec) {
  const double beta = in.beta, rho = in.rho;
  double mass = 0.0;
  for (auto [k, r] : rho_vec) {
    if (k < 1 || !(r >= 0.0)) throw ParameterError("sandwich: invalid rho_vec entry");
    if (r == 0.0) continue;
    if (!in.terms.count(k))
      throw ParameterError("sandwich: no cluster free energy for k=" + std::to_string(k));
    const double a = in.terms.at(k).a;
    if (!(std::pow(a + in.R, in.dim) < k / rho))
      throw ParameterError("sandwich: hypothesis (a_k + R)^d < k/rho violated for k=" +
                           std::to_string(k));
    mass += k * r;
  }
  if (mass > rho * (1.0 + 1e-12)) throw ParameterError("sandwich: sum k rho_k exceeds rho");
  const double rest = std::max(0.0, rho - mass);
  SandwichResult s;
  double lv = rest * rest * in.f_inf_stderr * in.f_inf_stderr;
  double uv = rest * rest * in.f_inf_upper_stderr * in.f_inf_upper_stderr;
  s.lower = rest * in.f_inf;
  s.upper = rest * in.f_inf_upper;
  for (auto [k, r] : rho_vec) {
    if (r == 0.0) continue;
    const SandwichTerm& t = in.terms.at(k);
    s.lower += k * r * t.f_cl + xlogx_minus(r) / beta;
    s.upper += k * r * t.f_cla + r * std::log(rho) / beta +
               r / beta *
                   (-std::log1p(-(rho / k) * std::pow(t.a + in.R, in.dim)) +
                    in.dim * std::log1p(in.R / t.a));
    lv += std::pow(k * r * t.f_cl_stderr, 2);
    uv += std::pow(k * r * t.f_cla_stderr, 2);
  }
  s.lower_stderr = std::sqrt(lv);
  s.upper_stderr = std::sqrt(uv);
  s.consistent = s.lower <= s.upper + 3.0 * std::sqrt(lv + uv);
  return s;
}

namespace {

/// Largest edge of a minimum spanning tree (bottleneck connectivity scale).
double bottleneck_distance(std::span<const double> x, int dim) {
  const std::size_t n = x.size() / dim;
  if (n <= 1) return 0.0;
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<char> in(n, 0);
  best[0] = 0.0;
  double worst = 0.0;
  for (std::size_t it = 0; it < n; ++it) {
    std::size_t u = n;
    for (std::size_t i = 0; i < n; ++i)
      if (!in[i] && (u == n || best[i] < best[u])) u = i;
    in[u] = 1;
    worst = std::max(worst, best[u]);
    for (std::size_t i = 0; i < n; ++i)
      if (!in[i])
        best[i] = std::min(best[i], std::sqrt(squared_distance(x.subspan(u * dim, dim),
                                                               x.subspan(i * dim, dim))));
  }
  return worst;
}

double max_extent(std::span<const double> x, int dim) {
  const std::size_t n = x.size() / dim;
  double e = 0.0;
  for (int c = 0; c < dim; ++c) {
    double lo = x[c], hi = x[c];
    for (std::size_t i = 1; i < n; ++i) {
      lo = std::min(lo, x[i * dim + c]);
      hi = std::max(hi, x[i * dim + c]);
    }
    e = std::max(e, hi - lo);
  }
  return e;
}

}  // namespace

UniformCertificate uniform_certificate(const PotentialSpec& spec, const GroundStateTable& table,
                                       const QVector& q, double beta, double rho,
                                       const std::map<int, double>& a_choice) {
  if (!spec.holder())
    throw ParameterError("uniform_certificate: the potential has no Hoelder data");
  if (!table.e_infty) throw ParameterError("uniform_certificate: table has no e_infty");
  if (!(beta > 0.0) || !(rho > 0.0))
    throw ParameterError("uniform_certificate: beta and rho must be > 0");
  const HolderData h = *spec.holder();
  const int dim = table.dim;
  const double R = table.R;
  const double r_min = h.r_min;
  if (!(r_min > 0.0)) throw ParameterError("uniform_certificate: Hoelder r_min must be > 0");
  for (const auto& e : table.entries)
    if (e.k >= 2 && e.r_min < r_min * (1.0 - 1e-12))
      throw ParameterError("uniform_certificate: minimum distance diagnostic fails for k=" +
                           std::to_string(e.k));

  UniformCertificate cert;
  cert.n_max = static_cast<int>(std::floor(std::pow((R + 0.5 * r_min) / (0.5 * r_min), dim)));
  const double L = h.constant, s = h.exponent, b = spec.b();
  auto holder_term = [&](double eps, double t) {
    return L * cert.n_max * (std::pow(2.0 * eps, s) + std::pow((t - 1.0) * b, s));
  };
  auto choose_eps = [&](double d_conn) {
    if (!(d_conn < R)) throw ParameterError("uniform_certificate: minimiser is not R-connected");
    return std::min(1.0 / beta, (R - d_conn) / (2.0 * d_conn / r_min + 2.0));
  };

  const double e_inf = *table.e_infty;
  const double log_ball_R = std::log(ball_volume(dim, R));
  cert.lower_bulk_constant = 1.0 + std::max(log_ball_R, 0.0);
  {
    const double eps = choose_eps(b);
    const double t = 1.0 + 2.0 * eps / r_min;
    cert.epsilon = eps;
    cert.upper_bulk_constant =
        holder_term(eps, t) - std::log(ball_volume(dim, eps)) / beta;
  }

  double mass = 0.0;
  cert.center = 0.0;
  cert.lower = 0.0;
  cert.upper = 0.0;
  for (auto [k, qk] : q.entries()) {
    if (qk == 0.0) continue;
    if (k > table.k_max())
      throw ParameterError("uniform_certificate: k=" + std::to_string(k) + " is not tabulated");
    const ClusterMinimum& e = table.entries[k - 1];
    if (e.coords.size() != static_cast<std::size_t>(k * dim))
      throw ParameterError("uniform_certificate: table entry k=" + std::to_string(k) +
                           " has no coordinates");
    const double rk = rho * qk / k;
    const double Ek = e.energy;
    mass += k * rk;

    const double ck = k == 1 ? 0.0
                             : ((k - 2) * std::log(static_cast<double>(k)) - log_factorial(k) +
                                (k - 1) * log_ball_R) / k;
    cert.lower_constants[k] = ck;

    const double a = a_choice.count(k) ? a_choice.at(k) : default_box_side(k, rho, R, dim);
    if (!(std::pow(a + R, dim) < k / rho))
      throw ParameterError("uniform_certificate: (a_k + R)^d < k/rho violated for k=" +
                           std::to_string(k));
    const double eps = choose_eps(bottleneck_distance(e.coords, dim));
    const double t = 1.0 + 2.0 * eps / r_min;
    const double box = t * max_extent(e.coords, dim) + 2.0 * eps;
    if (!(a > box))
      throw ParameterError("uniform_certificate: box side a_k=" + fmt_double(a) +
                           " cannot hold the scaled minimiser for k=" + std::to_string(k));
    const double uk = holder_term(eps, t) +
                      (std::log(static_cast<double>(k)) - dim * std::log((a - box) / a) -
                       (k - 1) * std::log(ball_volume(dim, eps))) /
                          (beta * k);
    cert.upper_constants[k] = uk;

    cert.center += rk * (Ek + std::log(rho) / beta);
    cert.lower += k * rk * (Ek / k - ck / beta) + rk * std::log(rk / rho) / beta +
                  (std::log(rho) - 1.0) / beta * rk;
    cert.upper += k * rk * (Ek / k + uk) + std::log(rho) / beta * rk +
                  rk / beta *
                      (-std::log1p(-(rho / k) * std::pow(a + R, dim)) + dim * std::log1p(R / a));
  }
  const double rest = std::max(0.0, rho - mass);
  cert.center += rest * e_inf;
  cert.lower += rest * (e_inf - cert.lower_bulk_constant / beta);
  cert.upper += rest * (e_inf + cert.upper_bulk_constant);
  return cert;
}

void write_estimates_csv(std::ostream& os, const std::vector<ClusterFreeEnergyEstimate>& rows) {
  os << "k,beta,a,z,stderr,f,cayley_ub,lattice_lb\n";
  for (const auto& r : rows)
    os << r.k << ',' << fmt_double(r.beta) << ',' << (r.a ? fmt_double(*r.a) : "NONE") << ','
       << fmt_double(r.z) << ',' << fmt_double(r.z_stderr) << ',' << fmt_double(r.f) << ','
       << fmt_double(r.cayley_upper) << ',' << fmt_double(r.lattice_lower) << '\n';
}

std::string estimates_to_json(const std::vector<ClusterFreeEnergyEstimate>& rows) {
  auto num = [](double x) -> nlohmann::ordered_json {
    return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(nullptr);
  };
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["k"] = r.k;
    j["beta"] = r.beta;
    j["a"] = r.a ? nlohmann::ordered_json(*r.a) : nlohmann::ordered_json(nullptr);
    j["z"] = num(r.z);
    j["stderr"] = num(r.z_stderr);
    j["f"] = num(r.f);
    j["cayley"] = num(r.cayley_upper);
    j["lattice"] = num(r.lattice_lower);
    j["method"] = to_string(r.method);
    j["seed"] = r.seed;
    j["flagged"] = r.flagged;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

}  // namespace clustergas
