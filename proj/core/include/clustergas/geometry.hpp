#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <unordered_map>
#include <vector>

namespace clustergas {

/// N particles in the hard-wall box [0, L]^d, d in {1, 2, 3}.
/// Coordinates are stored flat: particle i occupies [i*d, i*d + d).
class Configuration {
public:
  Configuration(int dim, double box_side, std::vector<double> coords = {});

  int dim() const { return dim_; }
  double box_side() const { return box_side_; }
  double volume() const;
  std::size_t size() const { return coords_.size() / static_cast<std::size_t>(dim_); }
  bool empty() const { return coords_.empty(); }

  std::span<const double> position(std::size_t i) const {
    return {coords_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<double> position(std::size_t i) {
    return {coords_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<const double> coords() const { return coords_; }
  std::span<double> coords() { return coords_; }

  void push_back(std::span<const double> x);

  /// True iff every coordinate lies in [0, L].
  bool in_box() const;

  friend bool operator==(const Configuration&, const Configuration&) = default;

private:
  int dim_;
  double box_side_;
  std::vector<double> coords_;
};

double squared_distance(std::span<const double> a, std::span<const double> b);

/// Volume of the d-dimensional ball of radius r.
double ball_volume(int dim, double r);

/// Connected components of the graph linking particles at distance <= R.
struct ClusterDecomposition {
  double connectivity_radius = 0.0;
  /// labels[i] is the cluster id of particle i; ids are 0..sizes.size()-1,
  /// assigned in order of the smallest particle index in each cluster.
  std::vector<int> labels;
  /// sizes[c] is the cardinality of cluster c.
  std::vector<int> sizes;

  std::size_t cluster_count() const { return sizes.size(); }
  /// k -> N_k, the number of clusters of size k.
  std::map<int, long> counts() const;
};

/// Same partition of {0..N-1}, regardless of label numbering.
bool same_partition(const ClusterDecomposition& a, const ClusterDecomposition& b);

/// Cluster-size statistics of a decomposition: N_k, rho_k = N_k/|Lambda| and
/// q_k = k rho_k / rho_ref.
struct ClusterStats {
  std::map<int, long> counts;
  std::map<int, double> rho;
  std::map<int, double> q;
};

/// Grid of cubic cells (side `cell_side`) over the box, stored sparsely so
/// that huge dilute boxes cost memory proportional to N only.
class CellList {
public:
  CellList(int dim, double cell_side);

  void clear();
  void insert(std::size_t particle, std::span<const double> x);
  void remove(std::size_t particle);
  void move(std::size_t particle, std::span<const double> x);

  /// Calls f(j) for every stored particle in the 3^d cells around x.
  template <class F>
  void for_each_near(std::span<const double> x, F&& f) const {
    const Key c = key_of(x);
    for_each_neighbor_cell(c, [&](const Key& k) {
      auto it = cells_.find(k);
      if (it == cells_.end()) return;
      for (std::size_t j : it->second) f(j);
    });
  }

private:
  struct Key {
    std::int64_t i[3] = {0, 0, 0};
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };

  Key key_of(std::span<const double> x) const;

  template <class F>
  void for_each_neighbor_cell(const Key& c, F&& f) const {
    const int span_y = dim_ >= 2 ? 1 : 0;
    const int span_z = dim_ >= 3 ? 1 : 0;
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -span_y; dy <= span_y; ++dy)
        for (int dz = -span_z; dz <= span_z; ++dz) {
          Key k = c;
          k.i[0] += dx;
          k.i[1] += dy;
          k.i[2] += dz;
          f(k);
        }
  }

  int dim_;
  double cell_side_;
  std::unordered_map<Key, std::vector<std::size_t>, KeyHash> cells_;
  std::unordered_map<std::size_t, Key> where_;
};

/// R-connectivity decomposition via a cell grid of side R plus union-find.
/// Pairs at distance exactly R are connected.
ClusterDecomposition decompose(const Configuration& config, double R);

ClusterStats stats(const ClusterDecomposition& decomp, double volume, double rho_ref);

// CSV interchange: `id,x[,y[,z]]` for configurations, `id,cluster_id` for
// decompositions.
void write_configuration_csv(std::ostream& os, const Configuration& config);
Configuration read_configuration_csv(std::istream& is, double box_side);
void write_decomposition_csv(std::ostream& os, const ClusterDecomposition& decomp);

}  // namespace clustergas
