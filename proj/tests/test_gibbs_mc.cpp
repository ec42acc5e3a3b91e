#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "clustergas/errors.hpp"
#include "clustergas/gibbs_mc.hpp"
#include "quadrature_oracles.hpp"

using namespace clustergas;
using clustergas::testing::boltzmann;
using clustergas::testing::default_breaks;
using clustergas::testing::simpson;

namespace {

const PotentialSpec& lj() {
  static const PotentialSpec spec = PotentialSpec::default_lennard_jones();
  return spec;
}

MCParams short_params() {
  MCParams p;
  p.n_sweeps = 4000;
  p.burn_in_sweeps = 500;
  p.measure_every = 5;
  p.replicas = 2;
  p.seed = 11;
  return p;
}

}  // namespace

TEST_CASE("run_canonical: a single particle is a singleton") {
  const auto r = run_canonical(lj(), 2, 1, 4.0, 1.0, 2.0, short_params());
  REQUIRE(r.q_bar.count(1));
  CHECK(r.q_bar.at(1).mean == 1.0);
  CHECK(r.q_bar.size() == 1);
  CHECK(r.energy.mean == 0.0);
}

TEST_CASE("run_canonical: determinism under a fixed seed") {
  const auto a = run_canonical(lj(), 2, 12, 8.0, 1.5, 2.0, short_params());
  const auto b = run_canonical(lj(), 2, 12, 8.0, 1.5, 2.0, short_params());
  CHECK(mc_result_to_json(a) == mc_result_to_json(b));
  std::ostringstream ta, tb;
  write_trace_csv(ta, a);
  write_trace_csv(tb, b);
  CHECK(ta.str() == tb.str());
  CHECK(a.final_configuration == b.final_configuration);

  auto p = short_params();
  p.seed = 12;
  CHECK(mc_result_to_json(run_canonical(lj(), 2, 12, 8.0, 1.5, 2.0, p)) != mc_result_to_json(a));
}

TEST_CASE("run_canonical: bookkeeping invariants") {
  const auto r = run_canonical(lj(), 2, 20, 8.0, 2.0, 2.0, short_params());
  CHECK(r.max_identity_error <= 1e-12);
  CHECK(r.max_energy_drift <= 1e-8);
  double total = 0.0;
  for (auto [k, e] : r.q_bar) total += e.mean;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  for (const auto& row : r.trace) {
    double s = row.overflow_mass;
    for (double q : row.q) s += q;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(r.final_configuration.in_box());
  CHECK(total_energy(lj(), r.final_configuration).is_finite());
  CHECK(r.trace.size() == static_cast<std::size_t>((4000 - 500) / 5));
}

TEST_CASE("run_canonical: two particles on a segment match quadrature") {
  const double L = 5.0, R = 2.0, beta = 1.0;
  // Pair separations in [0, L]^2 have density 2 (L - r).
  auto w = [&](double r) { return 2.0 * (L - r) * boltzmann(lj(), beta, r); };
  auto breaks = default_breaks(lj());
  breaks.push_back(R);
  const double p_pair = simpson(w, 0.0, R, breaks) / simpson(w, 0.0, L, breaks);

  MCParams p;
  p.n_sweeps = 100000;
  p.burn_in_sweeps = 2000;
  p.measure_every = 2;
  p.replicas = 4;
  p.seed = 5;
  const auto r = run_canonical(lj(), 1, 2, L, beta, R, p);
  const auto q2 = r.q_bar.at(2);
  CHECK(q2.stderr_ > 0.0);
  CHECK(std::abs(q2.mean - p_pair) <= 4.0 * q2.stderr_);
  CHECK(equilibration_check(r).pass);
}

TEST_CASE("run_canonical: an ideal particle samples the uniform law") {
  const PotentialSpec free(0.0, 1.0, CustomForm{[](double) { return 0.0; }, "zero"});
  MCParams p;
  p.n_sweeps = 42000;
  p.burn_in_sweeps = 2000;
  p.replicas = 1;
  p.snapshot_every = 20;
  p.seed = 3;
  const double L = 3.0;
  const auto r = run_canonical(free, 1, 1, L, 1.0, 1.0, p);
  std::vector<double> x;
  for (const auto& c : r.snapshots) x.push_back(c.coords()[0] / L);
  REQUIRE(x.size() == 2000);
  std::sort(x.begin(), x.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double n = static_cast<double>(x.size());
    ks = std::max({ks, std::abs((i + 1) / n - x[i]), std::abs(x[i] - i / n)});
  }
  CHECK(ks < 0.05);
}

TEST_CASE("equilibration_check flags duplicated replicas") {
  auto r = run_canonical(lj(), 2, 10, 8.0, 1.0, 2.0, short_params());
  CHECK_FALSE(equilibration_check(r).zero_variance_anomaly);
  REQUIRE(r.replicas.size() == 2);
  r.replicas[1] = r.replicas[0];
  const auto rep = equilibration_check(r);
  CHECK(rep.zero_variance_anomaly);
  CHECK_FALSE(rep.pass);
}

TEST_CASE("initial_configuration") {
  const auto c = initial_configuration(lj(), 2, 30, 10.0, 4);
  CHECK(c.size() == 30);
  CHECK(c.in_box());
  CHECK(total_energy(lj(), c).is_finite());
  CHECK(c == initial_configuration(lj(), 2, 30, 10.0, 4));
  CHECK_THROWS_WITH_AS(initial_configuration(lj(), 1, 100, 10.0, 1), doctest::Contains("random-packing"),
                       ParameterError);
  CHECK(rsa_jamming_fraction(1) == doctest::Approx(0.7476));
}

TEST_CASE("lln_experiment: regime and kink handling") {
  const auto table = synthetic_table({0.0, -1.0, -2.0, -3.0}, -1.0);
  auto p = short_params();
  p.n_sweeps = 2000;
  p.burn_in_sweeps = 200;
  const auto rep = lln_experiment(lj(), table, 1.5, {1.0, 2.0}, 4, p);
  CHECK(rep.regime == "bounded");
  CHECK(rep.target_k == 1);
  CHECK(rep.points.size() == 2);
  CHECK(rep.comparisons == 1);
  CHECK(rep.points[0].rho == doctest::Approx(std::exp(-1.5)));
  CHECK(lln_report_to_json(rep).find("\"regime\"") != std::string::npos);

  const auto low = lln_experiment(lj(), table, 0.5, {1.0}, 4, p);
  CHECK(low.regime == "unbounded");
  CHECK_THROWS_AS(lln_experiment(lj(), table, 1.0, {1.0}, 4, p), ParameterError);
}
