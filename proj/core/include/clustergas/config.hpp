#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "clustergas/gibbs_mc.hpp"
#include "clustergas/potential.hpp"

namespace clustergas {

struct PotentialConfig {
  /// "lennard_jones" or "inverse_power".
  std::string form = "lennard_jones";
  double r_hc = 0.8;
  double b = 1.8;
  double epsilon = 1.0;
  double sigma = 1.0;
  double c12 = 1.0;
  double c6 = 1.0;
  double taper_width = 0.4;
  std::optional<double> holder_exponent;
  std::optional<double> holder_constant;
  std::optional<double> holder_r_min;

  friend bool operator==(const PotentialConfig&, const PotentialConfig&) = default;
};

struct BoxConfig {
  int dim = 0;
  double R = 2.0;
  std::optional<int> N;
  std::optional<double> L;
  std::optional<double> beta;

  friend bool operator==(const BoxConfig&, const BoxConfig&) = default;
};

struct VariationalConfig {
  int k_max = 12;
  int multistarts = 0;
  int hops = 4;
  double nu_min = 0.05;
  double nu_max = 4.0;
  int grid_count = 400;
  std::uint64_t seed = 1;

  friend bool operator==(const VariationalConfig&, const VariationalConfig&) = default;
};

/// Run configuration: sections [potential], [box], [mc], [variational] of a
/// small TOML subset (key = number | "string" | true/false, # comments).
struct Config {
  PotentialConfig potential;
  BoxConfig box;
  MCParams mc;
  VariationalConfig variational;

  PotentialSpec potential_spec() const;

  friend bool operator==(const Config&, const Config&) = default;
};

/// Unknown sections or keys and missing required keys throw ConfigError
/// naming the key path.
Config parse_config(const std::string& text);
Config load_config(const std::filesystem::path& path);

/// Every key, defaults included; parse_config(to_toml(c)) == c.
std::string to_toml(const Config& c);

}  // namespace clustergas
