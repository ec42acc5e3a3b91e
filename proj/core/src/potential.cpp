#include "clustergas/potential.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "clustergas/errors.hpp"

namespace clustergas {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

PotentialSpec::PotentialSpec(double r_hc, double b, PotentialForm form,
                             std::optional<HolderData> holder)
    : r_hc_(r_hc), b_(b), form_(std::move(form)), holder_(holder) {
  if (!(r_hc >= 0.0) || !std::isfinite(r_hc))
    throw ParameterError("potential: r_hc must be finite and >= 0");
  if (!(b > r_hc) || !std::isfinite(b)) throw ParameterError("potential: b must be finite and > r_hc");
  std::visit(overloaded{
                 [&](const LennardJonesForm& f) {
                   if (!(f.epsilon > 0.0)) throw ParameterError("potential: epsilon must be > 0");
                   if (!(f.sigma > 0.0)) throw ParameterError("potential: sigma must be > 0");
                   const double s6 = std::pow(f.sigma, 6);
                   c12_ = 4.0 * f.epsilon * s6 * s6;
                   c6_ = 4.0 * f.epsilon * s6;
                   taper_width_ = f.taper_width;
                 },
                 [&](const InversePowerForm& f) {
                   c12_ = f.c12;
                   c6_ = f.c6;
                   taper_width_ = f.taper_width;
                 },
                 [&](const CustomForm& f) {
                   if (!f.v) throw ParameterError("potential: custom form needs a callable");
                 },
             },
             form_);
  if (!(taper_width_ >= 0.0) || taper_width_ > b - r_hc)
    throw ParameterError("potential: taper_width must lie in [0, b - r_hc]");
  if (r_hc == 0.0 && !std::holds_alternative<CustomForm>(form_) && c12_ <= 0.0)
    throw ParameterError("potential: without a hard core the r^-12 term must be repulsive");
}

PotentialSpec PotentialSpec::default_lennard_jones() {
  return lennard_jones(0.8, 1.8, 1.0, 1.0, 0.4);
}

PotentialSpec PotentialSpec::lennard_jones(double r_hc, double b, double epsilon, double sigma,
                                           double taper_width) {
  return PotentialSpec(r_hc, b, LennardJonesForm{epsilon, sigma, taper_width});
}

double PotentialSpec::energy_scale() const {
  return std::visit(overloaded{
                        [](const LennardJonesForm& f) { return f.epsilon; },
                        [](const InversePowerForm& f) {
                          // Well depth of the untapered form, or c12 if purely repulsive.
                          if (f.c12 > 0.0 && f.c6 > 0.0) return f.c6 * f.c6 / (4.0 * f.c12);
                          return std::max(std::abs(f.c12), std::abs(f.c6));
                        },
                        [](const CustomForm& f) { return f.energy_scale; },
                    },
                    form_);
}

double PotentialSpec::length_scale() const {
  return std::visit(overloaded{
                        [](const LennardJonesForm& f) { return f.sigma; },
                        [&](const InversePowerForm&) { return b_; },
                        [](const CustomForm& f) { return f.length_scale; },
                    },
                    form_);
}

bool PotentialSpec::has_analytic_derivative() const {
  return !std::holds_alternative<CustomForm>(form_);
}

double PotentialSpec::taper(double r, double* dtaper) const {
  const double start = b_ - taper_width_;
  if (taper_width_ <= 0.0 || r <= start) {
    if (dtaper) *dtaper = 0.0;
    return 1.0;
  }
  // Written in the distance to b so that the taper stays accurate as r -> b.
  const double s = (b_ - r) / taper_width_;
  if (dtaper) *dtaper = -6.0 * s * (1.0 - s) / taper_width_;
  return s * s * (3.0 - 2.0 * s);
}

double PotentialSpec::finite_value(double r) const {
  if (r >= b_) return 0.0;
  if (const auto* c = std::get_if<CustomForm>(&form_)) return c->v(r);
  const double inv2 = 1.0 / (r * r);
  const double inv6 = inv2 * inv2 * inv2;
  const double raw = (c12_ * inv6 - c6_) * inv6;
  return raw * taper(r, nullptr);
}

double PotentialSpec::derivative(double r) const {
  if (r >= b_) return 0.0;
  if (const auto* c = std::get_if<CustomForm>(&form_)) {
    const double h = 1e-6 * c->length_scale;
    const double lo = std::max(r - h, r_hc_);
    const double hi = std::min(r + h, b_);
    return (c->v(hi) - (lo < b_ ? c->v(lo) : 0.0)) / (hi - lo);
  }
  const double inv2 = 1.0 / (r * r);
  const double inv6 = inv2 * inv2 * inv2;
  const double raw = (c12_ * inv6 - c6_) * inv6;
  const double draw = (-12.0 * c12_ * inv6 + 6.0 * c6_) * inv6 / r;
  double ds = 0.0;
  const double s = taper(r, &ds);
  return draw * s + raw * ds;
}

std::optional<std::pair<double, double>> PotentialSpec::attractive_window() const {
  const double span = b_ - r_hc_;
  // Points approaching b geometrically must all be strictly negative.
  for (double h = 1e-3 * span; h > 1e-12 * span; h *= 0.1)
    if (!(finite_value(b_ - h) < 0.0)) return std::nullopt;
  const int n = 4000;
  double lo = b_;
  for (int i = 1; i < n; ++i) {
    const double r = b_ - span * i / n;
    if (!(finite_value(r) < 0.0)) break;
    lo = r;
  }
  if (lo >= b_) return std::nullopt;
  return std::make_pair(lo, b_);
}

std::pair<double, double> PotentialSpec::pair_minimum() const {
  const int n = 2000;
  const double lo = r_hc_ > 0.0 ? r_hc_ : 1e-3 * length_scale();
  double best_r = lo, best_v = finite_value(lo);
  for (int i = 1; i <= n; ++i) {
    const double r = lo + (b_ - lo) * i / n;
    const double v = finite_value(r);
    if (v < best_v) {
      best_v = v;
      best_r = r;
    }
  }
  const double step = (b_ - lo) / n;
  const double a = std::max(lo, best_r - step);
  const double c = std::min(b_, best_r + step);
  auto res = boost::math::tools::brent_find_minima([this](double r) { return finite_value(r); }, a,
                                                   c, std::numeric_limits<double>::digits);
  if (res.second <= best_v) return {res.first, res.second};
  return {best_r, best_v};
}

PotentialSpec PotentialSpec::scaled(double lambda) const {
  if (!(lambda > 0.0)) throw ParameterError("potential: scale factor must be > 0");
  PotentialForm f = std::visit(
      overloaded{
          [&](const LennardJonesForm& g) -> PotentialForm {
            return LennardJonesForm{lambda * g.epsilon, g.sigma, g.taper_width};
          },
          [&](const InversePowerForm& g) -> PotentialForm {
            return InversePowerForm{lambda * g.c12, lambda * g.c6, g.taper_width};
          },
          [&](const CustomForm& g) -> PotentialForm {
            auto inner = g.v;
            return CustomForm{[inner, lambda](double r) { return lambda * inner(r); },
                              g.name + "*" + fmt17(lambda), lambda * g.energy_scale,
                              g.length_scale};
          },
      },
      form_);
  std::optional<HolderData> h = holder_;
  if (h) h->constant *= lambda;
  return PotentialSpec(r_hc_, b_, std::move(f), h);
}

PotentialSpec PotentialSpec::with_holder(HolderData h) const {
  PotentialSpec copy = *this;
  copy.holder_ = h;
  return copy;
}

std::string PotentialSpec::fingerprint() const {
  std::ostringstream os;
  os << "r_hc=" << fmt17(r_hc_) << ";b=" << fmt17(b_) << ";";
  std::visit(overloaded{
                 [&](const LennardJonesForm& f) {
                   os << "lj;epsilon=" << fmt17(f.epsilon) << ";sigma=" << fmt17(f.sigma)
                      << ";taper_width=" << fmt17(f.taper_width);
                 },
                 [&](const InversePowerForm& f) {
                   os << "ipow;c12=" << fmt17(f.c12) << ";c6=" << fmt17(f.c6)
                      << ";taper_width=" << fmt17(f.taper_width);
                 },
                 [&](const CustomForm& f) { os << "custom;" << f.name; },
             },
             form_);
  // FNV-1a, 64 bit.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : os.str()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExtendedReal evaluate(const PotentialSpec& spec, double r) {
  if (!(r > 0.0)) throw DomainError("evaluate: r must be > 0");
  if (r < spec.r_hc()) return ExtendedReal::infinity();
  return spec.finite_value(r);
}

ExtendedReal total_energy(const PotentialSpec& spec, std::span<const double> coords, int dim) {
  const std::size_t n = coords.size() / static_cast<std::size_t>(dim);
  const double b2 = spec.b() * spec.b();
  const double hc2 = spec.r_hc() * spec.r_hc();
  thread_local std::vector<double> terms;
  terms.clear();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double d2 = 0.0;
      for (int c = 0; c < dim; ++c) {
        const double dx = coords[i * dim + c] - coords[j * dim + c];
        d2 += dx * dx;
      }
      if (d2 >= b2) continue;
      if (d2 < hc2) return ExtendedReal::infinity();
      if (d2 == 0.0) return ExtendedReal::infinity();
      terms.push_back(spec.finite_value(std::sqrt(d2)));
    }
  }
  std::sort(terms.begin(), terms.end());
  double e = 0.0;
  for (double t : terms) e += t;
  return e;
}

ExtendedReal total_energy(const PotentialSpec& spec, const Configuration& config) {
  return total_energy(spec, config.coords(), config.dim());
}

bool energy_and_gradient(const PotentialSpec& spec, std::span<const double> coords, int dim,
                         double& energy, std::span<double> grad) {
  const std::size_t n = coords.size() / static_cast<std::size_t>(dim);
  const double b2 = spec.b() * spec.b();
  const double hc2 = spec.r_hc() * spec.r_hc();
  double e = 0.0;
  std::fill(grad.begin(), grad.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double dx[3];
      double d2 = 0.0;
      for (int c = 0; c < dim; ++c) {
        dx[c] = coords[i * dim + c] - coords[j * dim + c];
        d2 += dx[c] * dx[c];
      }
      if (d2 >= b2) continue;
      if (d2 < hc2 || d2 == 0.0) return false;
      const double r = std::sqrt(d2);
      e += spec.finite_value(r);
      const double g = spec.derivative(r) / r;
      for (int c = 0; c < dim; ++c) {
        grad[i * dim + c] += g * dx[c];
        grad[j * dim + c] -= g * dx[c];
      }
    }
  }
  energy = e;
  return true;
}

HolderData measure_holder(const PotentialSpec& spec, double r_min) {
  const double lo = std::max(r_min, spec.r_hc());
  if (!(lo < spec.b())) return HolderData{1.0, 0.0, r_min};
  const int n = 20000;
  double lip = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double r = lo + (spec.b() - lo) * i / n;
    lip = std::max(lip, std::abs(spec.derivative(r)));
  }
  // Grid maximum of |v'|; pad slightly for curvature between nodes.
  return HolderData{1.0, lip * 1.01, lo};
}

bool ValidationReport::structural_ok() const {
  for (std::size_t i = 0; i < checks.size(); ++i)
    if (i != 1 && !checks[i].pass) return false;
  return true;
}

}  // namespace clustergas
