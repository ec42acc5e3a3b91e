#include "clustergas/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "clustergas/errors.hpp"
#include "clustergas/io.hpp"
#include "clustergas/parallel.hpp"

namespace clustergas {

Branch Branch::cluster(int k) {
  if (k < 1) throw ParameterError("Branch: cluster size must be >= 1");
  return Branch(k);
}

int Branch::k() const {
  if (is_bulk()) throw DomainError("Branch: BULK has no finite size");
  return k_;
}

std::string Branch::to_string() const { return is_bulk() ? "BULK" : "k=" + std::to_string(k_); }

std::strong_ordering operator<=>(const Branch& a, const Branch& b) {
  const int ka = a.is_bulk() ? std::numeric_limits<int>::max() : a.k_;
  const int kb = b.is_bulk() ? std::numeric_limits<int>::max() : b.k_;
  return ka <=> kb;
}

QVector::QVector(std::map<int, double> entries) : entries_(std::move(entries)) {
  double s = 0.0;
  for (auto [k, q] : entries_) {
    if (k < 1) throw ParameterError("QVector: cluster sizes must be >= 1");
    if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("QVector: q_k must lie in [0, 1]");
    s += q;
  }
  if (s > 1.0 + 1e-12) throw ParameterError("QVector: total mass exceeds 1");
}

double QVector::get(int k) const {
  auto it = entries_.find(k);
  return it == entries_.end() ? 0.0 : it->second;
}

double QVector::total() const {
  double s = 0.0;
  for (auto [k, q] : entries_) s += q;
  return s;
}

namespace {

double require_e_infty(const GroundStateTable& t) {
  if (!t.e_infty) throw ParameterError("variational: table has no e_infty");
  return *t.e_infty;
}

/// Crossing point of two branches, in closed form.
double crossing(const GroundStateTable& t, const Branch& a, const Branch& b) {
  if (a.is_bulk()) return t.E(b.k()) - b.k() * *t.e_infty;
  if (b.is_bulk()) return t.E(a.k()) - a.k() * *t.e_infty;
  const double k = a.k(), m = b.k();
  return (k * t.E(b.k()) - m * t.E(a.k())) / (k - m);
}

}  // namespace

double g_nu(const QVector& q, const GroundStateTable& table, double nu) {
  const double e = require_e_infty(table);
  double s = 0.0, mass = 0.0;
  for (auto [k, qk] : q.entries()) {
    if (k > table.k_max())
      throw ParameterError("g_nu: q is supported on k=" + std::to_string(k) +
                           ", which is not tabulated (k_max=" + std::to_string(table.k_max()) + ")");
    s += qk * (table.E(k) - nu) / k;
    mass += qk;
  }
  return s + (1.0 - mass) * e;
}

MuResult mu(double nu, const GroundStateTable& table) {
  const double e = require_e_infty(table);
  std::vector<std::pair<double, Branch>> cand;
  cand.reserve(table.k_max() + 1);
  for (int k = 1; k <= table.k_max(); ++k) cand.emplace_back((table.E(k) - nu) / k, Branch::cluster(k));
  cand.emplace_back(e, Branch::bulk());
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : cand) best = std::min(best, c.first);
  MuResult r;
  r.value = best;
  double second = std::numeric_limits<double>::infinity();
  for (const auto& c : cand) {
    if (c.first <= best + 1e-12) r.argmin.push_back(c.second);
    else second = std::min(second, c.first);
  }
  std::sort(r.argmin.begin(), r.argmin.end());
  r.gap = r.argmin.size() > 1 ? 0.0 : second - best;
  return r;
}

std::vector<Kink> kinks(const GroundStateTable& table) {
  require_e_infty(table);
  // Lower envelope of lines in order of decreasing slope (bulk, k_max..1),
  // which is the order in which they appear on the envelope as nu grows.
  std::vector<Branch> lines{Branch::bulk()};
  for (int k = table.k_max(); k >= 1; --k) lines.push_back(Branch::cluster(k));
  std::vector<Branch> hull;
  for (const Branch& l : lines) {
    while (hull.size() >= 2 &&
           crossing(table, hull[hull.size() - 2], l) <= crossing(table, hull[hull.size() - 2], hull.back()))
      hull.pop_back();
    hull.push_back(l);
  }
  std::vector<Kink> out;
  for (std::size_t i = 0; i + 1 < hull.size(); ++i)
    out.push_back({crossing(table, hull[i], hull[i + 1]), hull[i], hull[i + 1]});
  return out;
}

VariationalProfile profile(const GroundStateTable& table, double nu_min, double nu_max,
                           int grid_count) {
  if (!(nu_min < nu_max)) throw ParameterError("profile: need nu_min < nu_max");
  if (grid_count < 3) throw ParameterError("profile: grid_count must be >= 3");
  VariationalProfile p;
  p.nu_grid.resize(grid_count);
  p.mu.resize(grid_count);
  p.argmin.resize(grid_count);
  p.gap.resize(grid_count);
  for (int i = 0; i < grid_count; ++i)
    p.nu_grid[i] = nu_min + (nu_max - nu_min) * static_cast<double>(i) / (grid_count - 1);
  parallel_for(static_cast<std::size_t>(grid_count), [&](std::size_t i) {
    MuResult r = mu(p.nu_grid[i], table);
    p.mu[i] = r.value;
    p.argmin[i] = std::move(r.argmin);
    p.gap[i] = r.gap;
  });
  p.kinks = kinks(table);
  p.nu_star = p.kinks.empty() ? compute_nu_star(table) : p.kinks.front().nu;
  return p;
}

std::vector<QVector> minimizer(double nu, const GroundStateTable& table) {
  const MuResult r = mu(nu, table);
  std::vector<QVector> face;
  for (const Branch& b : r.argmin) face.push_back(b.is_bulk() ? QVector() : QVector::unit(b.k()));
  return face;
}

ConcentrationBound concentration_bound(double nu, const GroundStateTable& table, double eta) {
  if (!(eta >= 0.0)) throw ParameterError("concentration_bound: eta must be >= 0");
  const double ns = table.nu_star ? *table.nu_star : compute_nu_star(table);
  if (std::abs(nu - ns) <= 1e-9)
    throw ParameterError("concentration_bound: nu is within 1e-9 of nu*, where both bounds degenerate");
  ConcentrationBound cb;
  cb.nu_star = ns;
  const MuResult r = mu(nu, table);
  cb.gap = r.gap;
  cb.argmin = r.argmin;
  if (nu < ns) {
    cb.regime = ConcentrationBound::Regime::below_nu_star;
    cb.bound = eta / (ns - nu);
  } else {
    cb.regime = ConcentrationBound::Regime::above_nu_star;
    if (!(r.gap > 0.0))
      throw ParameterError("concentration_bound: nu lies on the kink set (zero gap)");
    cb.bound = 1.0 - eta / r.gap;
  }
  return cb;
}

void write_profile_csv(std::ostream& os, const VariationalProfile& p) {
  os << "nu,mu,argmin,gap\n";
  for (std::size_t i = 0; i < p.nu_grid.size(); ++i) {
    std::string am;
    for (std::size_t j = 0; j < p.argmin[i].size(); ++j) am += (j ? ";" : "") + p.argmin[i][j].to_string();
    os << fmt_double(p.nu_grid[i]) << ',' << fmt_double(p.mu[i]) << ',' << am << ','
       << fmt_double(p.gap[i]) << '\n';
  }
}

void write_kinks_csv(std::ostream& os, const std::vector<Kink>& ks) {
  os << "nu_kink,left_branch,right_branch\n";
  for (const auto& k : ks)
    os << fmt_double(k.nu) << ',' << k.left.to_string() << ',' << k.right.to_string() << '\n';
}

}  // namespace clustergas
