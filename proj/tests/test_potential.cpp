#include <doctest.h>

#include <cmath>
#include <numeric>

#include "clustergas/errors.hpp"
#include "clustergas/potential.hpp"
#include "clustergas/rng.hpp"

using namespace clustergas;

namespace {

/// Golden-section minimisation of v over [lo, hi]; independent of the
/// library's own minimiser.
std::pair<double, double> golden_min(const PotentialSpec& spec, double lo, double hi) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  for (int i = 0; i < 200; ++i) {
    if (spec.finite_value(c) < spec.finite_value(d)) b = d;
    else a = c;
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  const double r = 0.5 * (a + b);
  return {r, spec.finite_value(r)};
}

}  // namespace

TEST_CASE("evaluate: hard core, support and the reference 12-6 form") {
  const auto spec = PotentialSpec::default_lennard_jones();
  CHECK(evaluate(spec, 0.5 * spec.r_hc()).is_infinite());
  CHECK(evaluate(spec, spec.b()).value() == 0.0);
  CHECK(evaluate(spec, 3.0 * spec.b()).value() == 0.0);
  CHECK(evaluate(spec, spec.r_hc()).is_finite());
  CHECK_THROWS_AS(evaluate(spec, 0.0), DomainError);
  CHECK_THROWS_AS(evaluate(spec, -1.0), DomainError);

  const PotentialSpec ref(0.0, 10.0, InversePowerForm{1.5, 5.0, 0.0});
  CHECK(evaluate(ref, 1.0).value() == doctest::Approx(-3.5).epsilon(1e-15));
}

TEST_CASE("evaluate: continuity at b and across the taper") {
  const auto spec = PotentialSpec::default_lennard_jones();
  CHECK(std::abs(spec.finite_value(spec.b() - 1e-9)) < 1e-12);
  const double start = spec.b() - 0.4;
  CHECK(spec.finite_value(start + 1e-10) == doctest::Approx(spec.finite_value(start - 1e-10)).epsilon(1e-8));
}

TEST_CASE("total_energy: small configurations") {
  const auto spec = PotentialSpec::default_lennard_jones();
  const std::vector<double> one{0.3, 0.4};
  CHECK(total_energy(spec, one, 2).value() == 0.0);
  const std::vector<double> far{0.0, 0.0, spec.b(), 0.0};
  CHECK(total_energy(spec, far, 2).value() == 0.0);
  const std::vector<double> overlap{0.0, 0.0, 0.5, 0.0};
  CHECK(total_energy(spec, overlap, 2).is_infinite());

  const auto [r_star, v_min] = golden_min(spec, spec.r_hc(), spec.b());
  CHECK(r_star == doctest::Approx(std::pow(2.0, 1.0 / 6.0)).epsilon(1e-7));
  const std::vector<double> tri{0.0, 0.0, r_star, 0.0, 0.5 * r_star, 0.5 * std::sqrt(3.0) * r_star};
  CHECK(total_energy(spec, tri, 2).value() == doctest::Approx(3.0 * v_min).epsilon(1e-12));
}

TEST_CASE("pair_minimum matches an independent golden-section search") {
  const auto spec = PotentialSpec::default_lennard_jones();
  const auto [r, v] = spec.pair_minimum();
  const auto [r0, v0] = golden_min(spec, spec.r_hc(), spec.b());
  CHECK(r == doctest::Approx(r0).epsilon(1e-7));
  CHECK(v == doctest::Approx(v0).epsilon(1e-12));
  CHECK(v == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("property: scaling epsilon scales energies exactly") {
  const auto spec = PotentialSpec::default_lennard_jones();
  const auto doubled = spec.scaled(2.0);
  Rng rng(11);
  for (int t = 0; t < 1000; ++t) {
    const double r = rng.uniform(spec.r_hc(), 2.0 * spec.b());
    CHECK(evaluate(doubled, r).value() == 2.0 * evaluate(spec, r).value());
  }
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x;
    for (int i = 0; i < 6; ++i) {
      x.push_back(1.2 * i + rng.uniform(0.0, 0.3));
      x.push_back(rng.uniform(0.0, 0.5));
    }
    CHECK(total_energy(doubled, x, 2).value() == 2.0 * total_energy(spec, x, 2).value());
  }
  CHECK_THROWS_AS(spec.scaled(0.0), ParameterError);
}

TEST_CASE("property: total_energy is permutation- and translation-invariant") {
  const auto spec = PotentialSpec::default_lennard_jones();
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const int n = 2 + static_cast<int>(rng.below(10));
    const int dim = 1 + static_cast<int>(rng.below(3));
    const double L = 1.6 * std::pow(n, 1.0 / dim) + 1.0;
    std::vector<double> x;
    while (static_cast<int>(x.size()) < n * dim) {
      std::vector<double> p(dim);
      for (double& c : p) c = rng.uniform(0.0, L);
      bool ok = true;
      for (std::size_t j = 0; j < x.size() / dim && ok; ++j) {
        double d2 = 0.0;
        for (int c = 0; c < dim; ++c) d2 += std::pow(p[c] - x[j * dim + c], 2);
        ok = d2 >= spec.r_hc() * spec.r_hc();
      }
      if (ok) x.insert(x.end(), p.begin(), p.end());
    }
    const double e = total_energy(spec, x, dim).value();

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    std::vector<double> y(x.size());
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < dim; ++c) y[i * dim + c] = x[perm[i] * dim + c];
    CHECK(total_energy(spec, y, dim).value() == e);

    const double shift = rng.uniform(-3.0, 3.0);
    for (double& c : y) c += shift;
    CHECK(total_energy(spec, y, dim).value() == doctest::Approx(e).epsilon(1e-12));
  }
}

TEST_CASE("property: groups beyond the support add") {
  const auto spec = PotentialSpec::default_lennard_jones();
  Rng rng(9);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> a, b;
    for (int i = 0; i < 4; ++i) a.push_back(1.15 * i + rng.uniform(0.0, 0.2));
    for (int i = 0; i < 3; ++i) b.push_back(100.0 + 1.15 * i + rng.uniform(0.0, 0.2));
    std::vector<double> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    const double ea = total_energy(spec, a, 1).value(), eb = total_energy(spec, b, 1).value();
    CHECK(total_energy(spec, ab, 1).value() == doctest::Approx(ea + eb).epsilon(1e-14));
  }
}

TEST_CASE("validate_assumption_v: default spec passes, repulsive spec fails the tail check") {
  const auto spec = PotentialSpec::default_lennard_jones();
  const std::vector<int> probes{2, 3, 4, 5, 6, 7, 8};
  const ValidationReport rep = validate_assumption_v(spec, probes, 40, 2, 3);
  REQUIRE(rep.checks.size() == 5);
  CHECK(rep.structural_ok());
  CHECK(rep.checks[1].pass);
  REQUIRE(rep.stability_lower_bound.has_value());
  for (std::size_t i = 0; i < rep.stability_evidence.size(); ++i) {
    CHECK(rep.stability_evidence[i].energy_per_particle >= *rep.stability_lower_bound);
    if (i > 0)
      CHECK(rep.stability_evidence[i].energy_per_particle <=
            rep.stability_evidence[i - 1].energy_per_particle + 1e-12);
  }

  const PotentialSpec repulsive(0.8, 1.8, InversePowerForm{1.0, 0.0, 0.4});
  const ValidationReport bad = validate_assumption_v(repulsive, std::vector<int>{2}, 4, 1, 3);
  CHECK_FALSE(bad.checks[3].pass);
  CHECK(bad.checks[3].witness >= 0.0);
  CHECK_FALSE(bad.structural_ok());
  CHECK_THROWS_AS(validate_assumption_v(spec, std::vector<int>{}, 4, 1), ParameterError);
}

TEST_CASE("measure_holder bounds observed difference quotients") {
  const auto spec = PotentialSpec::default_lennard_jones();
  const HolderData h = measure_holder(spec, 1.0);
  Rng rng(2);
  for (int t = 0; t < 2000; ++t) {
    const double r = rng.uniform(1.0, 3.0), s = rng.uniform(1.0, 3.0);
    CHECK(std::abs(spec.finite_value(r) - spec.finite_value(s)) <= h.constant * std::abs(r - s) + 1e-12);
  }
}
