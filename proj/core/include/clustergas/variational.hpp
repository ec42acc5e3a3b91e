#pragma once

#include <compare>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "clustergas/ground_state.hpp"

namespace clustergas {

/// A branch of the variational problem: a finite cluster size k, or BULK,
/// the e_infty branch standing for clusters of unbounded size.
class Branch {
public:
  static Branch bulk() { return Branch(0); }
  static Branch cluster(int k);

  bool is_bulk() const { return k_ == 0; }
  /// Cluster size; throws for BULK.
  int k() const;
  /// "k=<int>" or "BULK".
  std::string to_string() const;

  friend bool operator==(const Branch&, const Branch&) = default;
  /// Orders finite k ascending, BULK last.
  friend std::strong_ordering operator<=>(const Branch& a, const Branch& b);

private:
  explicit Branch(int k) : k_(k) {}
  int k_;
};

/// q in Q over a finite support; the remaining mass 1 - sum q_k is the
/// mass escaping to unbounded clusters.
class QVector {
public:
  QVector() = default;
  explicit QVector(std::map<int, double> entries);

  const std::map<int, double>& entries() const { return entries_; }
  double get(int k) const;
  double total() const;
  double escaped_mass() const { return 1.0 - total(); }
  static QVector unit(int k) { return QVector({{k, 1.0}}); }

  friend bool operator==(const QVector&, const QVector&) = default;

private:
  std::map<int, double> entries_;
};

/// sum_k q_k (E_k - nu)/k + (1 - sum_k q_k) e_infty.
double g_nu(const QVector& q, const GroundStateTable& table, double nu);

struct MuResult {
  double value = 0.0;
  /// Branches attaining the minimum within 1e-12, sorted.
  std::vector<Branch> argmin;
  /// Second-lowest candidate minus the minimum (0 at ties).
  double gap = 0.0;
};

MuResult mu(double nu, const GroundStateTable& table);

struct Kink {
  double nu = 0.0;
  Branch left = Branch::bulk();
  Branch right = Branch::bulk();
};

/// Slope changes of nu -> mu(nu), from the exact lower envelope of the
/// affine branches. Sorted by nu; the first one is nu*.
std::vector<Kink> kinks(const GroundStateTable& table);

struct VariationalProfile {
  std::vector<double> nu_grid;
  std::vector<double> mu;
  std::vector<std::vector<Branch>> argmin;
  std::vector<double> gap;
  std::vector<Kink> kinks;
  double nu_star = 0.0;
};

VariationalProfile profile(const GroundStateTable& table, double nu_min, double nu_max,
                           int grid_count);

/// Extreme points of the minimising face of g_nu: delta_k for each finite
/// k in M(nu), the zero vector for BULK.
std::vector<QVector> minimizer(double nu, const GroundStateTable& table);

struct ConcentrationBound {
  enum class Regime { below_nu_star, above_nu_star };
  Regime regime = Regime::below_nu_star;
  double nu_star = 0.0;
  double gap = 0.0;
  std::vector<Branch> argmin;
  /// below nu*: upper bound on sum q_k/k. above nu*: lower bound on the
  /// mass carried by M(nu) (escaped mass counts when BULK is in M).
  double bound = 0.0;
};

/// Constraints implied on any q with g_nu(q) - mu(nu) <= eta.
ConcentrationBound concentration_bound(double nu, const GroundStateTable& table, double eta);

void write_profile_csv(std::ostream& os, const VariationalProfile& p);
void write_kinks_csv(std::ostream& os, const std::vector<Kink>& kinks);

}  // namespace clustergas
