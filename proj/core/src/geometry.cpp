#include "clustergas/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "clustergas/errors.hpp"

namespace clustergas {

Configuration::Configuration(int dim, double box_side, std::vector<double> coords)
    : dim_(dim), box_side_(box_side), coords_(std::move(coords)) {
  if (dim < 1 || dim > 3) throw ParameterError("configuration: dim must be 1, 2 or 3");
  if (!(box_side > 0.0)) throw ParameterError("configuration: box side must be > 0");
  if (coords_.size() % static_cast<std::size_t>(dim) != 0)
    throw ParameterError("configuration: coordinate count is not a multiple of dim");
}

double Configuration::volume() const { return std::pow(box_side_, dim_); }

void Configuration::push_back(std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(dim_))
    throw ParameterError("configuration: point has wrong dimension");
  coords_.insert(coords_.end(), x.begin(), x.end());
}

bool Configuration::in_box() const {
  return std::all_of(coords_.begin(), coords_.end(),
                     [&](double c) { return c >= 0.0 && c <= box_side_; });
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double d = a[c] - b[c];
    s += d * d;
  }
  return s;
}

double ball_volume(int dim, double r) {
  switch (dim) {
    case 1: return 2.0 * r;
    case 2: return std::numbers::pi * r * r;
    case 3: return 4.0 / 3.0 * std::numbers::pi * r * r * r;
    default: throw ParameterError("ball_volume: dim must be 1, 2 or 3");
  }
}

std::map<int, long> ClusterDecomposition::counts() const {
  std::map<int, long> out;
  for (int s : sizes) ++out[s];
  return out;
}

bool same_partition(const ClusterDecomposition& a, const ClusterDecomposition& b) {
  if (a.labels.size() != b.labels.size() || a.sizes.size() != b.sizes.size()) return false;
  // Labels are bijectively related iff the map a->b is consistent both ways.
  std::vector<int> ab(a.sizes.size(), -1), ba(b.sizes.size(), -1);
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    const int la = a.labels[i], lb = b.labels[i];
    if (ab[la] == -1 && ba[lb] == -1) {
      ab[la] = lb;
      ba[lb] = la;
    } else if (ab[la] != lb || ba[lb] != la) {
      return false;
    }
  }
  return true;
}

CellList::CellList(int dim, double cell_side) : dim_(dim), cell_side_(cell_side) {
  if (!(cell_side > 0.0)) throw ParameterError("cell list: cell side must be > 0");
}

std::size_t CellList::KeyHash::operator()(const Key& k) const noexcept {
  std::uint64_t h = 0x9E3779B97F4A7C15ULL;
  for (auto v : k.i) {
    h ^= static_cast<std::uint64_t>(v) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

CellList::Key CellList::key_of(std::span<const double> x) const {
  Key k;
  for (int c = 0; c < dim_; ++c) k.i[c] = static_cast<std::int64_t>(std::floor(x[c] / cell_side_));
  return k;
}

void CellList::clear() {
  cells_.clear();
  where_.clear();
}

void CellList::insert(std::size_t particle, std::span<const double> x) {
  const Key k = key_of(x);
  cells_[k].push_back(particle);
  where_[particle] = k;
}

void CellList::remove(std::size_t particle) {
  auto w = where_.find(particle);
  if (w == where_.end()) return;
  auto it = cells_.find(w->second);
  auto& v = it->second;
  auto pos = std::find(v.begin(), v.end(), particle);
  *pos = v.back();
  v.pop_back();
  if (v.empty()) cells_.erase(it);
  where_.erase(w);
}

void CellList::move(std::size_t particle, std::span<const double> x) {
  const Key k = key_of(x);
  auto w = where_.find(particle);
  if (w != where_.end() && w->second == k) return;
  remove(particle);
  insert(particle, x);
}

namespace {

struct UnionFind {
  std::vector<int> parent, rank;
  explicit UnionFind(std::size_t n) : parent(n), rank(n, 0) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank[a] < rank[b]) std::swap(a, b);
    parent[b] = a;
    if (rank[a] == rank[b]) ++rank[a];
  }
};

}  // namespace

ClusterDecomposition decompose(const Configuration& config, double R) {
  if (!(R > 0.0)) throw ParameterError("decompose: R must be > 0");
  const std::size_t n = config.size();
  ClusterDecomposition out;
  out.connectivity_radius = R;
  if (n == 0) return out;

  CellList cells(config.dim(), R);
  for (std::size_t i = 0; i < n; ++i) cells.insert(i, config.position(i));

  UnionFind uf(n);
  const double R2 = R * R;
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = config.position(i);
    cells.for_each_near(xi, [&](std::size_t j) {
      if (j > i && squared_distance(xi, config.position(j)) <= R2)
        uf.unite(static_cast<int>(i), static_cast<int>(j));
    });
  }

  std::vector<int> root_label(n, -1);
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int r = uf.find(static_cast<int>(i));
    if (root_label[r] == -1) {
      root_label[r] = static_cast<int>(out.sizes.size());
      out.sizes.push_back(0);
    }
    out.labels[i] = root_label[r];
    ++out.sizes[root_label[r]];
  }
  return out;
}

ClusterStats stats(const ClusterDecomposition& decomp, double volume, double rho_ref) {
  if (!(volume > 0.0)) throw ParameterError("stats: volume must be > 0");
  if (!(rho_ref > 0.0)) throw ParameterError("stats: rho_ref must be > 0");
  ClusterStats s;
  s.counts = decomp.counts();
  for (auto [k, nk] : s.counts) {
    const double rho_k = static_cast<double>(nk) / volume;
    s.rho[k] = rho_k;
    s.q[k] = k * rho_k / rho_ref;
  }
  return s;
}

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_configuration_csv(std::ostream& os, const Configuration& config) {
  static const char* names[] = {"x", "y", "z"};
  os << "id";
  for (int c = 0; c < config.dim(); ++c) os << ',' << names[c];
  os << '\n';
  for (std::size_t i = 0; i < config.size(); ++i) {
    os << i;
    for (double v : config.position(i)) os << ',' << fmt17(v);
    os << '\n';
  }
}

Configuration read_configuration_csv(std::istream& is, double box_side) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("configuration csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  int dim = 0;
  if (line == "id,x") dim = 1;
  else if (line == "id,x,y") dim = 2;
  else if (line == "id,x,y,z") dim = 3;
  else throw ConfigError("configuration csv: bad header '" + line + "'");
  Configuration config(dim, box_side);
  std::size_t row = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::getline(ls, cell, ',');
    double x[3] = {0, 0, 0};
    for (int c = 0; c < dim; ++c) {
      if (!std::getline(ls, cell, ','))
        throw ConfigError("configuration csv: short row " + std::to_string(row + 1));
      x[c] = std::stod(cell);
    }
    config.push_back(std::span<const double>(x, dim));
    ++row;
  }
  if (!config.in_box()) throw ConfigError("configuration csv: coordinate outside [0, L]");
  return config;
}

void write_decomposition_csv(std::ostream& os, const ClusterDecomposition& decomp) {
  os << "id,cluster_id\n";
  for (std::size_t i = 0; i < decomp.labels.size(); ++i) os << i << ',' << decomp.labels[i] << '\n';
}

}  // namespace clustergas
