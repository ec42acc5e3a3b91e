#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "clustergas/extended_real.hpp"
#include "clustergas/geometry.hpp"

namespace clustergas {

/// 4 eps [(sigma/r)^12 - (sigma/r)^6], multiplied by a C^1 cubic taper on
/// (b - taper_width, b) so that v(b) = 0.
struct LennardJonesForm {
  double epsilon = 1.0;
  double sigma = 1.0;
  double taper_width = 0.4;
};

/// c12 r^-12 - c6 r^-6 with the same taper. taper_width = 0 means a hard
/// cut at b (discontinuous unless v(b) = 0).
struct InversePowerForm {
  double c12 = 1.0;
  double c6 = 1.0;
  double taper_width = 0.0;
};

/// Arbitrary v on [r_hc, b). No closed-form derivative; gradients fall back
/// to central differences.
struct CustomForm {
  std::function<double(double)> v;
  std::string name = "custom";
  double energy_scale = 1.0;
  double length_scale = 1.0;
};

using PotentialForm = std::variant<LennardJonesForm, InversePowerForm, CustomForm>;

/// Uniform Hoelder data |v(r) - v(r')| <= constant |r - r'|^exponent on
/// [r_min, inf).
struct HolderData {
  double exponent = 1.0;
  double constant = 0.0;
  double r_min = 0.0;
};

/// A pair potential v with hard core r_hc and support radius b.
/// Immutable; cheap to copy.
class PotentialSpec {
public:
  PotentialSpec(double r_hc, double b, PotentialForm form,
                std::optional<HolderData> holder = std::nullopt);

  /// r_hc = 0.8, b = 1.8, eps = sigma = 1, taper 0.4.
  static PotentialSpec default_lennard_jones();
  static PotentialSpec lennard_jones(double r_hc, double b, double epsilon, double sigma,
                                     double taper_width);

  double r_hc() const { return r_hc_; }
  double b() const { return b_; }
  const PotentialForm& form() const { return form_; }
  const std::optional<HolderData>& holder() const { return holder_; }

  /// Characteristic energy (eps for Lennard-Jones); scales linearly with eps.
  double energy_scale() const;
  /// Characteristic length (sigma for Lennard-Jones).
  double length_scale() const;
  bool has_analytic_derivative() const;

  /// v(r) for r >= r_hc. Zero for r >= b. No hard-core check.
  double finite_value(double r) const;
  /// dv/dr for r >= r_hc (zero beyond b).
  double derivative(double r) const;

  /// (b - delta, b) on which v < 0, located numerically; nullopt if v is not
  /// strictly negative immediately below b.
  std::optional<std::pair<double, double>> attractive_window() const;

  /// Location and value of min v over [r_hc, b] (golden-section search after
  /// a dense bracket scan).
  std::pair<double, double> pair_minimum() const;

  /// Same spec with eps (energy scale) multiplied by lambda > 0.
  PotentialSpec scaled(double lambda) const;
  PotentialSpec with_holder(HolderData h) const;

  /// Stable hex digest of the parameters.
  std::string fingerprint() const;

private:
  double taper(double r, double* dtaper) const;

  double r_hc_;
  double b_;
  PotentialForm form_;
  std::optional<HolderData> holder_;
  // Normalised power-law coefficients (unused for CustomForm).
  double c12_ = 0.0;
  double c6_ = 0.0;
  double taper_width_ = 0.0;
};

/// v(r) on (0, inf): +inf iff r < r_hc, 0 for r >= b.
ExtendedReal evaluate(const PotentialSpec& spec, double r);

/// sum_{i<j} v(|x_i - x_j|) over a flat coordinate array. Terms are added
/// in sorted order, so the result is exactly invariant under relabelling.
ExtendedReal total_energy(const PotentialSpec& spec, std::span<const double> coords, int dim);
ExtendedReal total_energy(const PotentialSpec& spec, const Configuration& config);

/// Energy and gradient for local minimisation; returns false (and leaves
/// grad untouched) when a pair is inside the hard core.
bool energy_and_gradient(const PotentialSpec& spec, std::span<const double> coords, int dim,
                         double& energy, std::span<double> grad);

/// Measured Lipschitz (exponent 1) constant of v on [r_min, b].
HolderData measure_holder(const PotentialSpec& spec, double r_min);

struct ValidationCheck {
  std::string name;
  bool pass = false;
  double witness = 0.0;
  std::string detail;
};

struct StabilityProbe {
  int n = 0;
  double energy_per_particle = 0.0;
};

struct ValidationReport {
  /// One entry per clause (1)..(5), in order.
  std::vector<ValidationCheck> checks;
  std::vector<StabilityProbe> stability_evidence;
  /// Packing bound U_N/N >= (n_b/2) min v, where n_b bounds the number of
  /// hard-core-separated neighbours within b. Present only when r_hc > 0.
  std::optional<double> stability_lower_bound;
  bool blow_up_suspected = false;

  /// All structural checks (1),(3),(4),(5) pass.
  bool structural_ok() const;
};

/// Checks clauses (1),(3),(4),(5) structurally and reports evidence for the
/// stability clause (2) from multistart minimisation at the probe sizes.
ValidationReport validate_assumption_v(const PotentialSpec& spec, std::span<const int> probe_sizes,
                                       int probe_budget, int dim, std::uint64_t seed = 1);

}  // namespace clustergas
