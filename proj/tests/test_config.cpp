#include <doctest.h>

#include "clustergas/config.hpp"
#include "clustergas/errors.hpp"

using namespace clustergas;

TEST_CASE("parse_config: minimal file takes defaults") {
  const auto c = parse_config("[box]\ndim = 2\n");
  CHECK(c.box.dim == 2);
  CHECK(c.box.R == 2.0);
  CHECK(c.potential.r_hc == 0.8);
  CHECK(c.mc == MCParams{});
  CHECK(c.potential_spec().fingerprint() == PotentialSpec::default_lennard_jones().fingerprint());
}

TEST_CASE("parse_config: values, comments and strings") {
  const auto c = parse_config(R"(# run
[potential]
form = "inverse_power"   # power law
c12 = 2.0
c6 = 1.5
b = 2.5

[box]
dim = 1
N = 40
beta = 3.5

[mc]
n_sweeps = 1000
seed = 99
)");
  CHECK(c.potential.form == "inverse_power");
  CHECK(c.potential.c12 == 2.0);
  CHECK(c.box.N == 40);
  CHECK(c.box.beta == 3.5);
  CHECK_FALSE(c.box.L);
  CHECK(c.mc.n_sweeps == 1000);
  CHECK(c.mc.seed == 99);
}

TEST_CASE("parse_config: errors name the key path") {
  CHECK_THROWS_WITH_AS(parse_config("[potential]\nsigma = 1\n"), "missing required key box.dim",
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("[box]\ndim = 2\n[potental]\nsigma = 1\n"),
                       doctest::Contains("unknown key potental.sigma"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("[box]\ndim = 2\ndim = 3\n"),
                       doctest::Contains("duplicate key box.dim"), ConfigError);
  CHECK_THROWS_AS(parse_config("[box]\ndim = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[box]\ndim = \"two\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[box]\ndim = 2\n[potential]\nholder_exponent = 1\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/run.toml"), ConfigError);
}

TEST_CASE("to_toml round trip") {
  Config c = parse_config("[box]\ndim = 3\nL = 12.5\n");
  c.potential.holder_exponent = 1.0;
  c.potential.holder_constant = 7.25;
  c.potential.holder_r_min = 1.1;
  c.mc.step_size = 0.3;
  c.mc.snapshot_every = 10;
  c.variational.nu_max = 2.5;
  CHECK(parse_config(to_toml(c)) == c);
}
