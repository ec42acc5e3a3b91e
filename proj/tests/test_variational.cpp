#include <doctest.h>

#include <cmath>
#include <sstream>

#include "clustergas/errors.hpp"
#include "clustergas/variational.hpp"
#include "generators.hpp"

using namespace clustergas;
using clustergas::testing::random_admissible_table;

namespace {

GroundStateTable small_table() { return synthetic_table({0.0, -1.0, -1.2}, -0.6); }

/// min over the simplex grid (support <= 4, step 1/50) of the objective
/// sum_k q_k (E_k - nu)/k + (1 - sum_k q_k) e_infty, evaluated directly.
double simplex_search(const GroundStateTable& t, double nu) {
  const int n = 50;
  double c[4];
  for (int k = 1; k <= 4; ++k) c[k - 1] = (t.E(k) - nu) / k - *t.e_infty;
  double best = INFINITY;
  for (int a = 0; a <= n; ++a)
    for (int b = 0; a + b <= n; ++b)
      for (int d = 0; a + b + d <= n; ++d)
        for (int e = 0; a + b + d + e <= n; ++e) {
          const double g = *t.e_infty + (a * c[0] + b * c[1] + d * c[2] + e * c[3]) / n;
          best = std::min(best, g);
        }
  return best;
}

}  // namespace

TEST_CASE("g_nu examples") {
  const auto t = small_table();
  CHECK(g_nu(QVector(), t, 0.3) == -0.6);
  CHECK(g_nu(QVector::unit(1), t, 0.7) == doctest::Approx(-0.7).epsilon(1e-15));
  const auto t2 = synthetic_table({0.0, -1.0}, -0.6);
  CHECK(g_nu(QVector({{1, 0.5}, {2, 0.5}}), t2, 0.5) == doctest::Approx(-0.625).epsilon(1e-15));
  CHECK_THROWS_WITH_AS(g_nu(QVector::unit(7), t, 0.5), doctest::Contains("k=7"), ParameterError);
}

TEST_CASE("mu examples") {
  const auto t = small_table();
  const MuResult m = mu(0.5, t);
  CHECK(m.value == doctest::Approx(-0.75).epsilon(1e-15));
  REQUIRE(m.argmin.size() == 1);
  CHECK(m.argmin[0] == Branch::cluster(2));
  CHECK(m.gap == doctest::Approx(0.15).epsilon(1e-12));

  const MuResult low = mu(0.1, t);
  CHECK(low.value == -0.6);
  REQUIRE(low.argmin.size() == 1);
  CHECK(low.argmin[0].is_bulk());

  const MuResult high = mu(10.0, t);
  CHECK(high.value == doctest::Approx(-10.0).epsilon(1e-15));
  CHECK(high.argmin == std::vector<Branch>{Branch::cluster(1)});
}

TEST_CASE("kinks and profile") {
  const auto t = small_table();
  const auto ks = kinks(t);
  REQUIRE(ks.size() == 2);
  CHECK(ks[0].nu == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(ks[0].left.is_bulk());
  CHECK(ks[0].right == Branch::cluster(2));
  CHECK(ks[1].nu == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ks[1].left == Branch::cluster(2));
  CHECK(ks[1].right == Branch::cluster(1));

  const auto single = kinks(synthetic_table({0.0}, -0.8));
  REQUIRE(single.size() == 1);
  CHECK(single[0].nu == doctest::Approx(0.8).epsilon(1e-15));

  const auto p = profile(t, 0.05, 2.0, 400);
  CHECK(p.nu_grid.size() == 400);
  CHECK(p.nu_star == doctest::Approx(compute_nu_star(t)).epsilon(1e-9));
  for (std::size_t i = 1; i + 1 < p.mu.size(); ++i)
    CHECK(p.mu[i + 1] - 2.0 * p.mu[i] + p.mu[i - 1] <= 1e-9);

  std::ostringstream os, ks_os;
  write_profile_csv(os, p);
  CHECK(os.str().rfind("nu,mu,argmin,gap\n", 0) == 0);
  CHECK(os.str().find("BULK") != std::string::npos);
  write_kinks_csv(ks_os, ks);
  const std::string kcsv = ks_os.str();
  CHECK(kcsv.rfind("nu_kink,left_branch,right_branch\n", 0) == 0);
  CHECK(kcsv.find(",BULK,k=2\n") != std::string::npos);
  CHECK(kcsv.find("\n1,k=2,k=1\n") != std::string::npos);
  CHECK_THROWS_AS(profile(t, 1.0, 0.5, 10), ParameterError);
}

TEST_CASE("minimizer examples") {
  const auto t = small_table();
  CHECK(minimizer(10.0, t) == std::vector<QVector>{QVector::unit(1)});
  CHECK(minimizer(0.1, t) == std::vector<QVector>{QVector()});
  CHECK(minimizer(0.5, t) == std::vector<QVector>{QVector::unit(2)});
  CHECK(minimizer(1.0, t).size() == 2);
}

TEST_CASE("concentration_bound examples") {
  const auto t = small_table();
  const auto exact = concentration_bound(0.5, t, 0.0);
  CHECK(exact.bound == 1.0);
  const auto half = concentration_bound(0.5, t, 0.075);
  CHECK(half.bound == doctest::Approx(0.5).epsilon(1e-12));
  const auto low = concentration_bound(0.1, t, 0.05);
  CHECK(low.regime == ConcentrationBound::Regime::below_nu_star);
  CHECK(low.bound == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(concentration_bound(0.2, t, 0.1), ParameterError);
  CHECK_THROWS_AS(concentration_bound(1.0, t, 0.1), ParameterError);
}

TEST_CASE("property: minimizers attain mu on random admissible tables") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const auto t = random_admissible_table(rng, 2 + static_cast<int>(rng.below(9)));
    for (int i = 0; i < 50; ++i) {
      const double nu = rng.uniform(0.0, 6.0);
      const MuResult m = mu(nu, t);
      for (const QVector& q : minimizer(nu, t))
        CHECK(g_nu(q, t, nu) == doctest::Approx(m.value).epsilon(1e-12));
    }
    const auto ks = kinks(t);
    REQUIRE_FALSE(ks.empty());
    CHECK(ks.front().nu == doctest::Approx(*t.nu_star).epsilon(1e-9));
    for (const Kink& k : ks) CHECK(k.nu >= *t.nu_star - 1e-12);
  }
}

TEST_CASE("property: mu equals a brute-force simplex search") {
  Rng rng(78);
  for (int trial = 0; trial < 10; ++trial) {
    const auto t = random_admissible_table(rng, 4);
    for (int i = 0; i < 5; ++i) {
      const double nu = rng.uniform(0.0, 6.0);
      CHECK(mu(nu, t).value == doctest::Approx(simplex_search(t, nu)).epsilon(1e-12));
    }
  }
}

TEST_CASE("property: joint scaling scales mu and keeps the argmin") {
  Rng rng(79);
  for (int trial = 0; trial < 50; ++trial) {
    const auto t = random_admissible_table(rng, 6);
    const double lambda = rng.uniform(0.1, 10.0);
    std::vector<double> E;
    for (int k = 1; k <= t.k_max(); ++k) E.push_back(lambda * t.E(k));
    const auto s = synthetic_table(E, lambda * *t.e_infty);
    const double nu = rng.uniform(0.0, 6.0);
    const MuResult a = mu(nu, t), b = mu(lambda * nu, s);
    CHECK(b.value == doctest::Approx(lambda * a.value).epsilon(1e-12));
    CHECK(a.argmin == b.argmin);
  }
}
