#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "clustergas/potential.hpp"

namespace clustergas::testing {

/// Composite Simpson rule on [lo, hi] split at `breaks`, n panels per piece.
inline double simpson(const std::function<double(double)>& f, double lo, double hi,
                      std::vector<double> breaks, int n = 20000) {
  breaks.push_back(lo);
  breaks.push_back(hi);
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0, prev = lo;
  for (double x : breaks) {
    if (x <= prev || x > hi) continue;
    const double h = (x - prev) / n;
    double s = f(prev) + f(x);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(prev + i * h);
    total += s * h / 3.0;
    prev = x;
  }
  return total;
}

inline double boltzmann(const PotentialSpec& spec, double beta, double r) {
  return r < spec.r_hc() ? 0.0 : std::exp(-beta * spec.finite_value(r));
}

/// Breakpoints of the default family: hard core, taper start, support.
inline std::vector<double> default_breaks(const PotentialSpec& spec, double taper = 0.4) {
  return {spec.r_hc(), spec.b() - taper, spec.b()};
}

}  // namespace clustergas::testing
