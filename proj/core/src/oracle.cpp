#include "clustergas/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "clustergas/errors.hpp"

namespace clustergas {

ClusterDecomposition brute_force_decompose(const Configuration& config, double R) {
  const std::size_t n = config.size();
  ClusterDecomposition out;
  out.connectivity_radius = R;
  out.labels.assign(n, -1);
  const double R2 = R * R;
  for (std::size_t s = 0; s < n; ++s) {
    if (out.labels[s] != -1) continue;
    const int id = static_cast<int>(out.sizes.size());
    out.sizes.push_back(0);
    std::vector<std::size_t> queue{s};
    out.labels[s] = id;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t i = queue[head];
      ++out.sizes[id];
      for (std::size_t j = 0; j < n; ++j)
        if (out.labels[j] == -1 && squared_distance(config.position(i), config.position(j)) <= R2) {
          out.labels[j] = id;
          queue.push_back(j);
        }
    }
  }
  return out;
}

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

/// Adaptive integral over [lo, hi], split at the given interior points.
template <class F>
double integrate(const F& f, double lo, double hi, std::vector<double> breaks, double tol) {
  if (!(hi > lo)) return 0.0;
  breaks.push_back(lo);
  breaks.push_back(hi);
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  double prev = lo;
  for (double x : breaks) {
    if (x <= prev) continue;
    if (x > hi) break;
    total += GK::integrate(f, prev, x, 15, tol);
    prev = x;
  }
  return total;
}

using GL = boost::math::quadrature::gauss<double, 15>;

/// Non-adaptive Gauss-Legendre over [lo, hi]: each piece between breaks is
/// cut into `splits` equal panels. The result is smooth in any parameter
/// the breaks track, which keeps nested integrals free of adaptive noise.
template <class F>
double integrate_fixed(const F& f, double lo, double hi, std::vector<double> breaks, int splits) {
  if (!(hi > lo)) return 0.0;
  breaks.push_back(lo);
  breaks.push_back(hi);
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  double prev = lo;
  for (double x : breaks) {
    if (x <= prev) continue;
    if (x > hi) break;
    const double h = (x - prev) / splits;
    for (int p = 0; p < splits; ++p) {
      const double a = prev + p * h;
      total += GL::integrate(f, a, p + 1 == splits ? x : a + h);
    }
    prev = x;
  }
  return total;
}

double safe_v(const PotentialSpec& spec, double r) {
  return r < spec.r_hc() ? std::numeric_limits<double>::infinity() : spec.finite_value(r);
}

/// Breakpoints of g -> v(g + s) relative to the taper and support.
void add_interaction_breaks(const PotentialSpec& spec, double taper_width, double s,
                            std::vector<double>& out) {
  out.push_back(spec.b() - s);
  if (taper_width > 0.0) out.push_back(spec.b() - taper_width - s);
}

double taper_width_of(const PotentialSpec& spec) {
  if (auto* lj = std::get_if<LennardJonesForm>(&spec.form())) return lj->taper_width;
  if (auto* ip = std::get_if<InversePowerForm>(&spec.form())) return ip->taper_width;
  return 0.0;
}

/// d = 1 chain of bonded gaps g_1..g_m in [r_hc, R]. Integrates
/// exp(-beta U(gaps)) * weight(sum of gaps) with weight supplied by caller.
/// `weight_breaks` lists sums of all gaps at which weight has a kink.
class GapChain {
public:
  GapChain(const PotentialSpec& spec, double beta, double R, int gaps,
           std::function<double(double)> weight, std::vector<double> weight_breaks, int splits)
      : spec_(spec), beta_(beta), R_(R), m_(gaps), weight_(std::move(weight)),
        weight_breaks_(std::move(weight_breaks)), splits_(splits), tw_(taper_width_of(spec)),
        g_(gaps) {
    // Every gap also gets breaks around the Boltzmann peak at the pair
    // minimum, whose width shrinks like beta^{-1/2}.
    const double r_star = spec.pair_minimum().first;
    const double h = 1e-4 * r_star;
    const double curvature = (spec.derivative(r_star + h) - spec.derivative(r_star - h)) / (2.0 * h);
    if (curvature > 0.0) {
      const double w = 1.0 / std::sqrt(beta * curvature);
      for (double j : {-6.0, -3.0, -1.5, 0.0, 1.5, 3.0, 6.0}) peak_breaks_.push_back(r_star + j * w);
    }
  }

  double run() {
    if (m_ == 0) return weight_(0.0);
    return level(0, 0.0);
  }

private:
  double level(int i, double energy) {
    auto f = [&, i, energy](double gi) {
      g_[i] = gi;
      // New pairs: particle i+1 with every earlier particle.
      double e = energy;
      double s = 0.0;
      for (int j = i; j >= 0; --j) {
        s += g_[j];
        if (s >= spec_.b()) break;
        e += safe_v(spec_, s);
      }
      if (!std::isfinite(e)) return 0.0;
      if (i + 1 == m_) {
        double total = 0.0;
        for (int j = 0; j < m_; ++j) total += g_[j];
        return std::exp(-beta_ * e) * weight_(total);
      }
      return level(i + 1, e);
    };
    std::vector<double> br = peak_breaks_;
    double s = 0.0;
    add_interaction_breaks(spec_, tw_, 0.0, br);
    for (int j = i - 1; j >= 0; --j) {
      s += g_[j];
      add_interaction_breaks(spec_, tw_, s, br);
    }
    // Kinks of the weight become reachable once the last gap is integrated.
    if (i + 1 == m_) {
      double prefix = 0.0;
      for (int j = 0; j < i; ++j) prefix += g_[j];
      for (double w : weight_breaks_) br.push_back(w - prefix);
    }
    const double lo = spec_.r_hc();
    const double hi = R_;
    std::vector<double> saved(g_.begin(), g_.end());
    const double val = integrate_fixed(f, lo, hi, br, splits_);
    std::copy(saved.begin(), saved.end(), g_.begin());
    return val;
  }

  const PotentialSpec& spec_;
  double beta_, R_;
  int m_;
  std::function<double(double)> weight_;
  std::vector<double> weight_breaks_;
  std::vector<double> peak_breaks_;
  int splits_;
  double tw_;
  std::vector<double> g_;
};

double z_cluster_d1(const PotentialSpec& spec, int k, double beta, double R,
                    std::optional<double> a, int splits) {
  if (!a) return GapChain(spec, beta, R, k - 1, [](double) { return 1.0; }, {}, splits).run();
  const double A = *a;
  return GapChain(spec, beta, R, k - 1, [A](double s) { return std::max(0.0, 1.0 - s / A); }, {A},
                  splits)
      .run();
}

double z_cluster_d2(const PotentialSpec& spec, int k, double beta, double R,
                    std::optional<double> a, double tol) {
  const double tw = taper_width_of(spec);
  std::vector<double> radial_breaks;
  add_interaction_breaks(spec, tw, 0.0, radial_breaks);
  if (k == 2) {
    if (a) {
      const double A = *a;
      if (A < R) throw CapabilityError("quadrature: d=2 constrained Z needs a >= R");
      auto f = [&](double r) {
        return r * std::exp(-beta * spec.finite_value(r)) *
               (2.0 * std::numbers::pi - 8.0 * r / A + 2.0 * r * r / (A * A));
      };
      return 0.5 * integrate(f, spec.r_hc(), R, radial_breaks, tol);
    }
    auto f = [&](double r) { return r * std::exp(-beta * spec.finite_value(r)); };
    return std::numbers::pi * integrate(f, spec.r_hc(), R, radial_breaks, tol);
  }
  if (a) throw CapabilityError("quadrature: d=2 constrained Z is limited to k <= 2");
  // k = 3 with particle 1 at the origin, x = r1 e_1, y = r2 (cos t, sin t).
  // connected = A12 A13 + A12 A23 + A13 A23 - 2 A12 A13 A23; the three
  // two-edge terms are equal by relabelling, so Z = (3 S - 2 T)/6.
  const double b = spec.b();
  auto angle_for = [](double r1, double r2, double d) {
    const double c = (r1 * r1 + r2 * r2 - d * d) / (2.0 * r1 * r2);
    return std::acos(std::clamp(c, -1.0, 1.0));
  };
  auto theta_integral = [&](double r1, double r2, bool triangle) {
    // Over t in [0, pi], doubled. r12 grows with t.
    const double t_lo = angle_for(r1, r2, spec.r_hc());
    const double t_hi = triangle ? angle_for(r1, r2, R) : std::numbers::pi;
    if (!(t_hi > t_lo)) return 0.0;
    std::vector<double> br{angle_for(r1, r2, b)};
    if (tw > 0.0) br.push_back(angle_for(r1, r2, b - tw));
    auto f = [&](double t) {
      const double r12 = std::sqrt(std::max(0.0, r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * std::cos(t)));
      const double v = safe_v(spec, r12);
      return std::isfinite(v) ? std::exp(-beta * v) : 0.0;
    };
    return 2.0 * integrate(f, t_lo, t_hi, br, tol);
  };
  // The angular limits switch on and off where r1 and r2 combine to one of
  // the critical distances, so both radial integrals get those points.
  std::vector<double> critical{spec.r_hc(), b, R};
  if (tw > 0.0) critical.push_back(b - tw);
  std::vector<double> outer_breaks = radial_breaks;
  for (double d1 : critical)
    for (double d2 : critical) {
      outer_breaks.push_back(d1 + d2);
      outer_breaks.push_back(std::abs(d1 - d2));
    }
  auto radial2 = [&](bool triangle) {
    auto outer = [&](double r1) {
      auto inner = [&](double r2) {
        return r2 * std::exp(-beta * spec.finite_value(r2)) * theta_integral(r1, r2, triangle);
      };
      std::vector<double> inner_breaks = radial_breaks;
      for (double d : critical) {
        inner_breaks.push_back(r1 + d);
        inner_breaks.push_back(std::abs(r1 - d));
        inner_breaks.push_back(d - r1);
      }
      return r1 * std::exp(-beta * spec.finite_value(r1)) *
             integrate(inner, spec.r_hc(), R, inner_breaks, tol);
    };
    return 2.0 * std::numbers::pi * integrate(outer, spec.r_hc(), R, outer_breaks, tol);
  };
  const double S = radial2(false);
  const double T = radial2(true);
  return (3.0 * S - 2.0 * T) / 6.0;
}

template <class F>
QuadratureValue two_level(F&& compute, double tol) {
  const double coarse = compute(tol);
  const double fine = compute(tol * 1e-2);
  const double err = std::abs(fine - coarse);
  if (err > 1e-6 * std::abs(fine) && err > 1e-300)
    throw NumericalError("quadrature: refinement levels disagree by " +
                         std::to_string(err / std::abs(fine)) + " relative");
  return {fine, err};
}

/// Doubles the panel count until successive results agree to tol.
template <class F>
QuadratureValue refine_fixed(F&& compute, double tol) {
  double prev = compute(1);
  for (int splits = 2; splits <= 32; splits *= 2) {
    const double cur = compute(splits);
    const double err = std::abs(cur - prev);
    if (err <= tol * std::abs(cur) || err < 1e-300) return {cur, err};
    prev = cur;
  }
  throw NumericalError("quadrature: no agreement to relative " + std::to_string(tol) +
                       " after 32 panels per piece");
}

}  // namespace

QuadratureValue quadrature_z_cluster(const PotentialSpec& spec, int k, double beta, int dim,
                                     double R, std::optional<double> a, double tol) {
  if (k < 1) throw ParameterError("quadrature_z_cluster: k must be >= 1");
  if (!(beta > 0.0)) throw ParameterError("quadrature_z_cluster: beta must be > 0");
  if (!(R > spec.r_hc())) throw ParameterError("quadrature_z_cluster: R must exceed r_hc");
  if (a && !(*a > 0.0)) throw ParameterError("quadrature_z_cluster: a must be > 0");
  if (!((dim == 1 && k <= 4) || (dim == 2 && k <= 3)))
    throw CapabilityError("quadrature_z_cluster: supported for d=1, k<=4 and d=2, k<=3 only");
  if (k == 1) return {1.0, 0.0};
  if (dim == 1)
    return refine_fixed([&](int splits) { return z_cluster_d1(spec, k, beta, R, a, splits); }, tol);
  if (k == 3) tol = std::max(tol, 1e-6);
  return two_level([&](double t) { return z_cluster_d2(spec, k, beta, R, a, t); }, tol);
}

QuadratureValue quadrature_constrained_partition(const PotentialSpec& spec, int N, double L,
                                                 std::span<const long> counts, double beta,
                                                 double R, double tol) {
  if (N < 0 || N > 4) throw CapabilityError("quadrature_constrained_partition: N must be <= 4");
  if (!(L > 0.0)) throw ParameterError("quadrature_constrained_partition: L must be > 0");
  if (!(beta > 0.0)) throw ParameterError("quadrature_constrained_partition: beta must be > 0");
  if (R < spec.b()) throw ParameterError("quadrature_constrained_partition: R must be >= b");
  long mass = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 0) throw ParameterError("quadrature_constrained_partition: negative count");
    mass += static_cast<long>(i + 1) * counts[i];
  }
  if (mass > N) return {0.0, 0.0};
  if (N == 0) return {counts.empty() || mass == 0 ? 1.0 : 0.0, 0.0};

  auto compute = [&](int splits) {
    double total = 0.0;
    const int gaps = N - 1;
    for (unsigned pattern = 0; pattern < (1u << gaps); ++pattern) {
      // Bit i set: gap i is bonded (<= R). Cluster sizes are runs.
      std::vector<int> sizes;
      int run = 1;
      for (int i = 0; i < gaps; ++i) {
        if (pattern >> i & 1u) {
          ++run;
        } else {
          sizes.push_back(run);
          run = 1;
        }
      }
      sizes.push_back(run);
      bool match = true;
      for (std::size_t j = 0; j < counts.size() && match; ++j)
        match = std::count(sizes.begin(), sizes.end(), static_cast<int>(j + 1)) == counts[j];
      if (!match) continue;
      // Unbonded gaps (> R >= b) carry no interaction; integrating them
      // against (L - sum)_+ gives (X - m R)_+^{m+1} / (m+1)!.
      const int m = gaps - __builtin_popcount(pattern);
      double fact = 1.0;
      for (int i = 2; i <= m + 1; ++i) fact *= i;
      auto weight = [=](double s) {
        const double x = L - s - m * R;
        return x > 0.0 ? std::pow(x, m + 1) / fact : 0.0;
      };
      // Bonded runs are independent clusters except for the shared weight,
      // so integrate all bonded gaps jointly as one chain with breaks in the
      // energy only within runs.
      std::vector<int> bonded_runs;
      for (int s : sizes)
        if (s > 1) bonded_runs.push_back(s - 1);
      const int bonded = gaps - m;
      if (bonded == 0) {
        total += weight(0.0);
        continue;
      }
      // Integrate the bonded gaps run by run, nesting via the weight.
      std::function<double(std::size_t, double)> nest = [&](std::size_t r, double prefix) -> double {
        if (r == bonded_runs.size()) return weight(prefix);
        return GapChain(spec, beta, R, bonded_runs[r],
                        [&, r, prefix](double s) { return nest(r + 1, prefix + s); },
                        r + 1 == bonded_runs.size()
                            ? std::vector<double>{L - m * R - prefix}
                            : std::vector<double>{},
                        splits)
            .run();
      };
      total += nest(0, 0.0);
    }
    return total;
  };
  return refine_fixed(compute, tol);
}

SupermultiplicativityReport check_supermultiplicativity(const PotentialSpec& spec, int N1, int N2,
                                                        Interval left, Interval right,
                                                        Interval ambient, double beta, double R) {
  if (N1 < 1 || N2 < 1 || N1 + N2 > 4)
    throw CapabilityError("check_supermultiplicativity: need N1, N2 >= 1 and N1 + N2 <= 4");
  if (!(left.length() > 0.0 && right.length() > 0.0))
    throw ParameterError("check_supermultiplicativity: boxes must have positive length");
  if (!(left.hi < right.lo || right.hi < left.lo))
    throw ParameterError("check_supermultiplicativity: boxes must be disjoint");
  const double gap = left.hi < right.lo ? right.lo - left.hi : left.lo - right.hi;
  if (!(gap > spec.b()))
    throw ParameterError("check_supermultiplicativity: boxes must be more than b apart");
  if (left.lo < ambient.lo || right.lo < ambient.lo || left.hi > ambient.hi || right.hi > ambient.hi)
    throw ParameterError("check_supermultiplicativity: boxes must lie inside the ambient box");
  SupermultiplicativityReport rep;
  const auto za = quadrature_constrained_partition(spec, N1 + N2, ambient.length(), {}, beta, R);
  const auto zl = quadrature_constrained_partition(spec, N1, left.length(), {}, beta, R);
  const auto zr = quadrature_constrained_partition(spec, N2, right.length(), {}, beta, R);
  rep.z_ambient = za.value;
  rep.z_left = zl.value;
  rep.z_right = zr.value;
  rep.margin = za.value - zl.value * zr.value;
  rep.error = za.error + zl.error * zr.value + zr.error * zl.value;
  rep.holds = rep.margin > rep.error;
  return rep;
}

std::pair<double, double> geometric_entropy(double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("geometric_entropy: u must lie in (0, 1)");
  const double mean = 1.0 / (1.0 - u);
  const double entropy = -std::log1p(-u) - u * std::log(u) / (1.0 - u);
  return {entropy, mean};
}

}  // namespace clustergas
