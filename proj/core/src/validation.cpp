#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "clustergas/errors.hpp"
#include "clustergas/ground_state.hpp"
#include "clustergas/potential.hpp"
#include "clustergas/rng.hpp"

namespace clustergas {

namespace {

ValidationCheck check_hard_core(const PotentialSpec& spec) {
  ValidationCheck c{"V1 hard core", true, spec.r_hc(), ""};
  const double lo = spec.r_hc() > 0.0 ? spec.r_hc() : 1e-3 * spec.length_scale();
  double vmax = -std::numeric_limits<double>::infinity();
  const int n = 4000;
  for (int i = 0; i <= n; ++i) {
    const double r = lo + (spec.b() - lo) * i / n;
    const double v = spec.finite_value(r);
    if (!std::isfinite(v)) {
      c.pass = false;
      c.witness = r;
      c.detail = "v is not finite at r = " + std::to_string(r) + " above the hard core";
      return c;
    }
    vmax = std::max(vmax, v);
  }
  c.detail = "v = +inf on (0, r_hc), finite on [r_hc, b); max sampled v = " + std::to_string(vmax);
  return c;
}

ValidationCheck check_support(const PotentialSpec& spec) {
  ValidationCheck c{"V3 compact support", std::isfinite(spec.b()) && spec.b() > spec.r_hc(),
                    spec.b(), ""};
  c.detail = "v = 0 for r >= b = " + std::to_string(spec.b());
  return c;
}

ValidationCheck check_attractive_tail(const PotentialSpec& spec) {
  ValidationCheck c{"V4 attractive tail", false, 0.0, ""};
  auto w = spec.attractive_window();
  const double vmin = spec.pair_minimum().second;
  if (w && vmin < 0.0) {
    c.pass = true;
    c.witness = w->second - w->first;
    std::ostringstream os;
    os << "v < 0 on (" << w->first << ", " << w->second << "); min v = " << vmin;
    c.detail = os.str();
  } else {
    const double span = spec.b() - spec.r_hc();
    double worst = -std::numeric_limits<double>::infinity();
    for (double h = 1e-3 * span; h > 1e-12 * span; h *= 0.1)
      worst = std::max(worst, spec.finite_value(spec.b() - h));
    c.witness = worst;
    std::ostringstream os;
    os << "v >= 0 somewhere in (" << spec.b() - 1e-3 * span << ", " << spec.b()
       << "); max sampled v there = " << worst;
    c.detail = os.str();
  }
  return c;
}

ValidationCheck check_continuity(const PotentialSpec& spec) {
  ValidationCheck c{"V5 continuity", true, 0.0, ""};
  const double span = spec.b() - spec.r_hc();
  const double scale = spec.energy_scale();
  const double jump_at_b = std::abs(spec.finite_value(spec.b() * (1.0 - 1e-12)));
  c.witness = jump_at_b;
  if (jump_at_b > 1e-6 * scale) {
    c.pass = false;
    c.detail = "v(b-) = " + std::to_string(jump_at_b) + " != 0 = v(b)";
    return c;
  }
  if (!spec.has_analytic_derivative()) {
    // Scan a grid, then probe each large step at a much finer scale.
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const double r0 = spec.r_hc() + span * i / n, r1 = spec.r_hc() + span * (i + 1) / n;
      const double jump = std::abs(spec.finite_value(r1) - spec.finite_value(r0));
      if (jump > 1e-2 * scale) {
        const double rm = 0.5 * (r0 + r1);
        const double fine = std::abs(spec.finite_value(rm + 1e-9 * span) -
                                     spec.finite_value(rm - 1e-9 * span));
        if (fine > 1e-4 * scale) {
          c.pass = false;
          c.witness = rm;
          c.detail = "jump of " + std::to_string(fine) + " near r = " + std::to_string(rm);
          return c;
        }
      }
    }
  }
  c.detail = "continuous on [r_hc, inf); |v(b-)| = " + std::to_string(jump_at_b);
  return c;
}

}  // namespace

ValidationReport validate_assumption_v(const PotentialSpec& spec, std::span<const int> probe_sizes,
                                       int probe_budget, int dim, std::uint64_t seed) {
  if (probe_sizes.empty()) throw ParameterError("validate_assumption_v: probe_sizes is empty");
  ValidationReport rep;
  rep.checks.push_back(check_hard_core(spec));

  GroundStateOptions opts;
  opts.dim = dim;
  opts.R = std::max(2.0 * spec.b(), spec.b() + spec.length_scale());
  opts.multistarts = std::max(1, probe_budget);
  for (int n : probe_sizes) {
    if (n < 1) throw ParameterError("validate_assumption_v: probe sizes must be >= 1");
    const ClusterMinimum m = minimize_cluster(spec, n, opts, derive_seed(seed, n, 0x5754));
    rep.stability_evidence.push_back({n, m.energy / n});
  }
  const double vmin = spec.pair_minimum().second;
  if (spec.r_hc() > 0.0) {
    const double half = 0.5 * spec.r_hc();
    const double nb = std::pow((spec.b() + half) / half, dim) - 1.0;
    rep.stability_lower_bound = 0.5 * std::floor(nb) * std::min(vmin, 0.0);
  }
  // Blow-up: E_N/N below the packing bound, or decrements that keep growing.
  bool growing = rep.stability_evidence.size() >= 3;
  for (std::size_t i = 2; i < rep.stability_evidence.size(); ++i) {
    const double d1 = rep.stability_evidence[i - 1].energy_per_particle -
                      rep.stability_evidence[i - 2].energy_per_particle;
    const double d2 = rep.stability_evidence[i].energy_per_particle -
                      rep.stability_evidence[i - 1].energy_per_particle;
    if (!(d2 < d1 && d2 < 0.0)) growing = false;
  }
  rep.blow_up_suspected = growing;
  if (rep.stability_lower_bound)
    for (const auto& p : rep.stability_evidence)
      if (p.energy_per_particle < *rep.stability_lower_bound - 1e-9) rep.blow_up_suspected = true;

  ValidationCheck stab{"V2 stability (evidence only)", !rep.blow_up_suspected, 0.0, ""};
  double lowest = 0.0;
  for (const auto& p : rep.stability_evidence) lowest = std::min(lowest, p.energy_per_particle);
  stab.witness = lowest;
  std::ostringstream os;
  os << "min E_N/N over probes = " << lowest;
  if (rep.stability_lower_bound) os << "; packing bound U_N/N >= " << *rep.stability_lower_bound;
  os << "; evidence, not a proof";
  stab.detail = os.str();
  rep.checks.push_back(stab);

  rep.checks.push_back(check_support(spec));
  rep.checks.push_back(check_attractive_tail(spec));
  rep.checks.push_back(check_continuity(spec));
  return rep;
}

}  // namespace clustergas
