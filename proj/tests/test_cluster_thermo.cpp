#include <doctest.h>

#include <cmath>
#include <sstream>

#include "clustergas/cluster_thermo.hpp"
#include "clustergas/errors.hpp"
#include "clustergas/oracle.hpp"
#include "generators.hpp"
#include "quadrature_oracles.hpp"

using namespace clustergas;
using clustergas::testing::boltzmann;
using clustergas::testing::default_breaks;
using clustergas::testing::random_distribution;
using clustergas::testing::random_m_rho;
using clustergas::testing::simpson;

namespace {

const PotentialSpec& lj() {
  static const PotentialSpec spec = PotentialSpec::default_lennard_jones();
  return spec;
}

const GroundStateTable& table_1d() {
  static const GroundStateTable t = [] {
    GroundStateOptions o;
    o.dim = 1;
    o.multistarts = 20;
    return build_table(lj(), 6, o, 3);
  }();
  return t;
}

}  // namespace

TEST_CASE("z_cluster: k = 1 and the two-particle integral") {
  const double R = 2.0;
  ZOptions q;
  CHECK(z_cluster(lj(), 1, 3.0, 1, R, std::nullopt, q, 1).z == 1.0);
  CHECK(z_cluster(lj(), 1, 3.0, 1, R, 5.0, q, 1).z == 1.0);

  const double ref = simpson([&](double r) { return boltzmann(lj(), 2.0, r); }, 0.0, R,
                             default_breaks(lj()));
  const auto z2 = z_cluster(lj(), 2, 2.0, 1, R, std::nullopt, q, 1);
  CHECK(z2.z == doctest::Approx(ref).epsilon(1e-8));
  CHECK(z2.f == doctest::Approx(-std::log(ref) / 4.0).epsilon(1e-8));
  CHECK_FALSE(z2.flagged);

  const auto hot = z_cluster(lj(), 2, 1e-6, 1, R, std::nullopt, q, 1);
  CHECK(hot.z == doctest::Approx(R - lj().r_hc()).epsilon(1e-5));

  ZOptions is;
  is.method = ZMethod::importance_sampling;
  is.samples = 1 << 16;
  const auto a = z_cluster(lj(), 3, 1.0, 1, R, std::nullopt, is, 9);
  const auto b = z_cluster(lj(), 3, 1.0, 1, R, std::nullopt, is, 9);
  CHECK(a.z == b.z);
  const auto exact = z_cluster(lj(), 3, 1.0, 1, R, std::nullopt, q, 9);
  CHECK(std::abs(a.z - exact.z) <= 3.0 * a.z_stderr);
}

TEST_CASE("cayley_upper_bound") {
  CHECK(cayley_upper_bound(1, 4.0, 0.0, 2.0, 1) == 1.0);
  CHECK(cayley_upper_bound(2, 3.0, -1.0, 2.0, 1) == doctest::Approx(std::exp(3.0) * 2.0).epsilon(1e-14));
  const double E3 = table_1d().E(3);
  const double z3 = quadrature_z_cluster(lj(), 3, 2.0, 1, 2.0).value;
  CHECK(cayley_upper_bound(3, 2.0, E3, 2.0, 1) >= z3);
}

TEST_CASE("lattice_lower_bound") {
  const double R = 2.0;
  const double delta = (R - lj().r_hc()) / 6.0;
  const double C = lattice_constant(lj(), delta, R, 1);
  CHECK(C == doctest::Approx(2.0).epsilon(1e-9));
  const double lb1 = lattice_lower_bound(lj(), 1, 1.0, delta, 3.0, R, 1);
  CHECK(lb1 == doctest::Approx(delta * std::exp(-C)).epsilon(1e-12));
  CHECK(3.0 >= lb1);

  const PotentialSpec narrow = PotentialSpec::lennard_jones(1.0, 1.1, 1.0, 0.95, 0.1);
  const double d2 = (R - narrow.r_hc()) / 6.0;
  CHECK(lattice_constant(narrow, d2, R, 2) == 0.0);
  CHECK(lattice_lower_bound(narrow, 3, 5.0, d2, 10.0, R, 2) ==
        doctest::Approx(std::pow(ball_volume(2, 0.5 * d2), 3)).epsilon(1e-14));

  const double a = 4.0;
  const auto z = quadrature_z_cluster(lj(), 2, 5.0, 1, R, a);
  CHECK(lattice_lower_bound(lj(), 2, 5.0, delta, a, R, 1) <= a * z.value);

  CHECK_THROWS_WITH_AS(lattice_lower_bound(lj(), 2, 1.0, 0.5, a, R, 1), doctest::Contains("delta"),
                       ParameterError);
  CHECK_THROWS_WITH_AS(lattice_lower_bound(lj(), 2, 1.0, delta, 1.0, R, 1), doctest::Contains("a_k"),
                       ParameterError);
}

TEST_CASE("f_cluster_lower") {
  CHECK(f_cluster_lower(1, 0.0, 2.0, 2.0, 1) == 0.0);
  CHECK(f_cluster_lower(2, -1.0, 1.0, 2.0, 1) == doctest::Approx(-0.5 - 0.5 * std::log(2.0)).epsilon(1e-15));
  ZOptions q;
  for (int k = 2; k <= 4; ++k)
    for (double beta : {1.0, 5.0}) {
      const auto est = z_cluster(lj(), k, beta, 1, 2.0, std::nullopt, q, 1);
      CHECK(f_cluster_lower(k, table_1d().E(k), beta, 2.0, 1) <= est.f + 3.0 * est.f_stderr + 1e-12);
    }
}

TEST_CASE("entropy_terms") {
  const std::vector<double> delta{1.0};
  const auto d = entropy_terms(delta);
  CHECK(d.entropy == 0.0);
  CHECK(d.bound == 1.0);

  std::vector<double> geo(200);
  for (int k = 1; k <= 200; ++k) geo[k - 1] = std::pow(0.5, k);
  const auto g = entropy_terms(geo);
  CHECK(g.entropy == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(g.bound == doctest::Approx(1.0 + std::log(2.0)).epsilon(1e-12));

  const auto u = entropy_terms(std::vector<double>{0.5, 0.5});
  CHECK(u.entropy == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(u.bound == doctest::Approx(1.0 + std::log(1.5)).epsilon(1e-15));

  CHECK_THROWS_AS(entropy_terms(std::vector<double>{0.5, 0.4}), ParameterError);
  CHECK_THROWS_AS(entropy_terms(std::vector<double>{-0.1, 1.1}), ParameterError);
}

TEST_CASE("property: entropy bound on random distributions") {
  Rng rng(31);
  for (int t = 0; t < 2000; ++t) {
    const auto p = random_distribution(rng, 1 + static_cast<int>(rng.below(40)));
    const auto e = entropy_terms(p);
    CHECK(e.holds);
  }
}

TEST_CASE("relative_entropy_lower") {
  CHECK(relative_entropy_lower({}, 0.7).value == 0.0);
  CHECK(relative_entropy_lower({{1, 0.7}}, 0.7).value == 0.0);
  Rng rng(32);
  for (int t = 0; t < 500; ++t) {
    const double rho = rng.uniform(0.01, 3.0);
    const auto r = relative_entropy_lower(random_m_rho(rng, 1 + static_cast<int>(rng.below(30)), rho), rho);
    CHECK(r.holds);
    CHECK(r.value >= -2.0 * rho);
  }
  CHECK_THROWS_AS(relative_entropy_lower({{2, 1.0}}, 1.0), ParameterError);
}

TEST_CASE("ideal_free_energy") {
  IdealModel m{2.0, 0.3, {{1, -0.2}, {2, -0.6}, {3, -0.5}}, -0.4, "test"};
  CHECK(ideal_free_energy(m, {}) == doctest::Approx(0.3 * -0.4).epsilon(1e-15));
  const double r2 = 0.15;
  CHECK(ideal_free_energy(m, {{2, r2}}) ==
        doctest::Approx(0.3 * -0.6 + 0.5 * r2 * (std::log(r2) - 1.0)).epsilon(1e-14));
  CHECK_THROWS_AS(ideal_free_energy(m, {{5, 0.01}}), ParameterError);

  Rng rng(33);
  for (int t = 0; t < 100; ++t) {
    const auto a = random_m_rho(rng, 3, 0.3), b = random_m_rho(rng, 3, 0.3);
    std::map<int, double> mid;
    for (int k = 1; k <= 3; ++k) mid[k] = 0.5 * (a.at(k) + b.at(k));
    CHECK(ideal_free_energy(m, mid) <=
          0.5 * (ideal_free_energy(m, a) + ideal_free_energy(m, b)) + 1e-15);
  }
}

TEST_CASE("minimize_ideal") {
  IdealModel single{3.0, 0.2, {{2, -1.0}}, 0.0, "test"};
  const auto s = minimize_ideal(single);
  CHECK(s.binding);
  CHECK(s.rho_vec.at(2) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(s.stationarity_residual <= 1e-10);
  CHECK(s.slackness_residual <= 1e-10);

  IdealModel slack{1.0, 1.0, {{1, 1.0}, {2, 1.2}}, 0.0, "test"};
  const auto sl = minimize_ideal(slack);
  CHECK_FALSE(sl.binding);
  CHECK(sl.eta == 0.0);
  CHECK(sl.rho_vec.at(1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));

  // Low temperature: mass concentrates on the variational minimiser.
  const auto t = synthetic_table({0.0, -1.0, -1.2}, -0.6);
  const double beta = 50.0;
  for (double nu : {2.0, 0.5}) {
    IdealModel m{beta, std::exp(-beta * nu), {}, *t.e_infty, "table"};
    for (int k = 1; k <= 3; ++k) m.f[k] = t.E(k) / k;
    const auto r = minimize_ideal(m);
    const int k_nu = mu(nu, t).argmin.front().k();
    CHECK(k_nu * r.rho_vec.at(k_nu) / m.rho > 0.999);
    CHECK(r.stationarity_residual <= 1e-10);
    CHECK(r.slackness_residual <= 1e-10 * m.rho);
  }

  // Two-size model whose unconstrained optimum overfills rho, so the
  // minimiser lies on the face r1 + 2 r2 = 1; scan it directly.
  IdealModel g{1.0, 1.0, {{1, 0.1}, {2, -0.05}}, 0.0, "test"};
  const auto gm = minimize_ideal(g);
  CHECK(gm.binding);
  auto on_face = [](double r2) {
    auto xl = [](double r) { return r > 0.0 ? r * (std::log(r) - 1.0) : 0.0; };
    const double r1 = 1.0 - 2.0 * r2;
    return r1 * 0.1 - 0.1 * r2 + xl(r1) + xl(r2);
  };
  double lo = 0.0, hi = 0.5;
  for (int i = 0; i < 200; ++i) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (on_face(m1) < on_face(m2)) hi = m2;
    else lo = m1;
  }
  const double best = on_face(0.5 * (lo + hi));
  CHECK(gm.value == doctest::Approx(best).epsilon(1e-10));
  CHECK(gm.rho_vec.at(2) == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-6));
}

TEST_CASE("sandwich") {
  SandwichInput in;
  in.beta = 5.0;
  in.rho = 1e-3;
  in.dim = 1;
  in.R = 2.0;
  in.f_inf = -0.9;
  in.f_inf_upper = -0.7;
  in.terms[2] = SandwichTerm{-0.45, 0.0, 4.0, -0.4, 0.0};
  const auto z = sandwich(in, {});
  CHECK(z.lower == doctest::Approx(in.rho * in.f_inf).epsilon(1e-15));
  CHECK(z.upper == doctest::Approx(in.rho * in.f_inf_upper).epsilon(1e-15));
  CHECK_THROWS_WITH_AS(sandwich(in, {{3, 1e-4}}), doctest::Contains("k=3"), ParameterError);
  in.terms[2].a = 2000.0;
  CHECK_THROWS_WITH_AS(sandwich(in, {{2, 1e-4}}), doctest::Contains("(a_k + R)^d < k/rho"),
                       ParameterError);

  ZOptions q;
  const double nu = 1.5;
  double gaps[2];
  int i = 0;
  for (double beta : {5.0, 20.0}) {
    const double rho = std::exp(-beta * nu);
    const auto input = build_sandwich_input(lj(), 1, 2.0, beta, rho, 4, q, 7, {});
    const auto s = sandwich(input, {{2, 0.5 * rho}});
    CHECK(std::isfinite(s.lower));
    CHECK(std::isfinite(s.upper));
    CHECK(s.consistent);
    CHECK(s.lower <= s.upper);
    gaps[i++] = (s.upper - s.lower) / rho;
  }
  CHECK(gaps[1] < gaps[0]);
}

TEST_CASE("uniform_certificate") {
  const auto& t = table_1d();
  const double beta = 50.0, rho = std::exp(-beta * 1.5);
  CHECK_THROWS_AS(uniform_certificate(lj(), t, QVector(), beta, rho, {}), ParameterError);

  const auto spec = lj().with_holder(measure_holder(lj(), 1.1));
  const auto zero = uniform_certificate(spec, t, QVector(), beta, rho, {});
  CHECK(zero.center == doctest::Approx(rho * *t.e_infty).epsilon(1e-14));
  CHECK(zero.lower <= zero.center);
  CHECK(zero.center <= zero.upper);
  CHECK((zero.upper - zero.lower) / rho <= 100.0 * std::log(beta) / beta);

  const auto wide = uniform_certificate(spec, t, QVector::unit(2), beta, rho, {});
  const auto narrow = uniform_certificate(spec, t, QVector::unit(2), 2.0 * beta, std::exp(-2.0 * beta * 1.5), {});
  const double w1 = (wide.upper - wide.lower) / rho;
  const double w2 = (narrow.upper - narrow.lower) / std::exp(-2.0 * beta * 1.5);
  CHECK(w1 / w2 >= 1.5);

  ZOptions q;
  const auto input = build_sandwich_input(lj(), 1, 2.0, beta, rho, 4, q, 7, {});
  const auto s = sandwich(input, {{2, 0.5 * rho}});
  const double mid = 0.5 * (s.lower + s.upper);
  CHECK(wide.lower <= mid);
  CHECK(mid <= wide.upper);

  const auto strict = lj().with_holder(HolderData{1.0, 10.0, 1.2});
  CHECK_THROWS_AS(uniform_certificate(strict, t, QVector::unit(2), beta, rho, {}), ParameterError);
}

TEST_CASE("estimate export") {
  ZOptions q;
  std::vector<ClusterFreeEnergyEstimate> rows{z_cluster(lj(), 2, 1.0, 1, 2.0, 4.0, q, 1)};
  std::ostringstream os;
  write_estimates_csv(os, rows);
  CHECK(os.str().rfind("k,beta,a,z,stderr,f,cayley_ub,lattice_lb\n", 0) == 0);
  const std::string js = estimates_to_json(rows);
  CHECK(js.find("\"method\": \"quadrature\"") != std::string::npos);
}
