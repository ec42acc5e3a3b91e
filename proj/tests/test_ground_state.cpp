#include <doctest.h>

#include <cmath>

#include "clustergas/errors.hpp"
#include "clustergas/ground_state.hpp"
#include "clustergas/rng.hpp"

using namespace clustergas;

namespace {

const GroundStateTable& default_table_2d() {
  static const GroundStateTable table = [] {
    GroundStateOptions o;
    o.dim = 2;
    return build_table(PotentialSpec::default_lennard_jones(), 12, o, 7);
  }();
  return table;
}

/// Random R-connected k-point configuration respecting the hard core.
std::vector<double> random_connected(Rng& rng, const PotentialSpec& spec, int k, int dim, double R) {
  std::vector<double> x(dim, 0.0);
  while (static_cast<int>(x.size()) < k * dim) {
    const std::size_t j = rng.below(x.size() / dim);
    std::vector<double> p(dim);
    double n2 = 0.0;
    for (int c = 0; c < dim; ++c) {
      p[c] = rng.normal();
      n2 += p[c] * p[c];
    }
    const double r = rng.uniform(spec.r_hc(), R);
    for (int c = 0; c < dim; ++c) p[c] = x[j * dim + c] + r * p[c] / std::sqrt(n2);
    bool ok = true;
    for (std::size_t i = 0; i < x.size() / dim && ok; ++i) {
      double d2 = 0.0;
      for (int c = 0; c < dim; ++c) d2 += std::pow(p[c] - x[i * dim + c], 2);
      ok = d2 >= spec.r_hc() * spec.r_hc();
    }
    if (ok) x.insert(x.end(), p.begin(), p.end());
  }
  return x;
}

}  // namespace

TEST_CASE("minimize_cluster: k = 1, 2, 3") {
  const auto spec = PotentialSpec::default_lennard_jones();
  GroundStateOptions o;
  const auto m1 = minimize_cluster(spec, 1, o, 1);
  CHECK(m1.energy == 0.0);
  CHECK(m1.coords.size() == 2);

  const double vmin = spec.pair_minimum().second;
  const auto m2 = minimize_cluster(spec, 2, o, 1);
  CHECK(m2.energy == doctest::Approx(vmin).epsilon(1e-10));
  CHECK(m2.converged);

  // Three pairs each contribute at least min v, and the equilateral triangle
  // at the pair minimum attains it.
  const auto m3 = minimize_cluster(spec, 3, o, 1);
  CHECK(m3.energy >= 3.0 * vmin - 1e-12);
  CHECK(m3.energy <= 3.0 * vmin + 1e-9);
  CHECK(m3.r_min == doctest::Approx(spec.pair_minimum().first).epsilon(1e-5));
}

TEST_CASE("build_table: k_max = 2 and argument checks") {
  const auto spec = PotentialSpec::default_lennard_jones();
  GroundStateOptions o;
  o.dim = 1;
  const auto t = build_table(spec, 2, o, 3);
  REQUIRE(t.k_max() == 2);
  CHECK(t.E(1) == 0.0);
  CHECK(t.E(2) == doctest::Approx(spec.pair_minimum().second).epsilon(1e-10));
  CHECK_FALSE(t.e_infty.has_value());
  CHECK_THROWS_AS(build_table(spec, 1, o, 3), ParameterError);
}

TEST_CASE("build_table: epsilon scaling is exact and runs are deterministic") {
  const auto spec = PotentialSpec::default_lennard_jones();
  GroundStateOptions o;
  o.dim = 2;
  o.multistarts = 30;
  const auto a = build_table(spec, 6, o, 5);
  const auto b = build_table(spec.scaled(2.0), 6, o, 5);
  for (int k = 1; k <= 6; ++k) CHECK(b.E(k) == 2.0 * a.E(k));
  CHECK(table_to_json(a) == table_to_json(build_table(spec, 6, o, 5)));
}

TEST_CASE("default 2-d table: invariants") {
  const auto spec = PotentialSpec::default_lennard_jones();
  const auto& t = default_table_2d();
  const double vmin = spec.pair_minimum().second;
  REQUIRE(t.k_max() == 12);
  CHECK(t.E(1) == 0.0);
  for (int k = 2; k <= 12; ++k) CHECK(t.E(k) <= t.E(k - 1) + vmin + 1e-9);
  for (int k = 1; k <= 12; ++k)
    for (int m = 1; k + m <= 12; ++m) CHECK(t.E(k + m) <= t.E(k) + t.E(m) + 1e-9);

  REQUIRE(t.e_infty.has_value());
  double min_ratio = 0.0;
  for (int k = 1; k <= 12; ++k) min_ratio = std::min(min_ratio, t.E(k) / k);
  CHECK(*t.e_infty < min_ratio);
  REQUIRE(t.nu_star.has_value());
  CHECK(*t.nu_star > 0.0);

  const auto s = check_structural_assumptions(t, spec.r_hc(), 3.0);
  CHECK(s.r_min_ok);
  CHECK(s.min_r_min >= spec.r_hc());
  CHECK(s.diameter_ok);
  CHECK(s.max_diameter_ratio < 3.0);
  CHECK(t.entries[0].diameter == 0.0);
}

TEST_CASE("property: table energies bound random connected configurations") {
  const auto spec = PotentialSpec::default_lennard_jones();
  const auto& t = default_table_2d();
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(11));
    const auto x = random_connected(rng, spec, k, 2, t.R);
    CHECK(total_energy(spec, x, 2).value() >= t.E(k) - 1e-9);
  }
}

TEST_CASE("estimate_e_infty and compute_nu_star on synthetic tables") {
  std::vector<double> E;
  for (int k = 1; k <= 12; ++k) E.push_back(-2.0 * k + 3.0 * std::sqrt(static_cast<double>(k)));
  const auto fit = estimate_e_infty(synthetic_table(E, std::nullopt, 2));
  CHECK(fit.e_infty == doctest::Approx(-2.0).epsilon(1e-9));

  std::vector<double> lin;
  for (int k = 1; k <= 8; ++k) lin.push_back(-static_cast<double>(k));
  const auto f2 = estimate_e_infty(synthetic_table(lin, std::nullopt, 1), true);
  CHECK(f2.e_infty == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(f2.residual == doctest::Approx(0.0));
  CHECK_THROWS_AS(estimate_e_infty(synthetic_table({0.0, -1.0}, std::nullopt, 1)), ParameterError);

  int argmin = 0;
  CHECK(compute_nu_star(synthetic_table({0.0, -1.0, -1.2}, -0.6), &argmin) ==
        doctest::Approx(0.2).epsilon(1e-14));
  CHECK(argmin == 2);

  std::vector<double> shifted;
  for (int k = 1; k <= 6; ++k) shifted.push_back(1.0 - k);
  CHECK(compute_nu_star(synthetic_table(shifted, -1.0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(compute_nu_star(synthetic_table({0.0, -3.0}, -1.0)), NumericalError);
}

TEST_CASE("table JSON round trip") {
  const auto& t = default_table_2d();
  const std::string js = table_to_json(t);
  const auto back = table_from_json(js);
  CHECK(table_to_json(back) == js);
  for (int k = 1; k <= t.k_max(); ++k) CHECK(back.E(k) == t.E(k));
  CHECK_THROWS_AS(table_from_json("{\"spec_id\": 3}"), ConfigError);
}
