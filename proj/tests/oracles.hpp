#pragma once

#include <algorithm>
#include <array>
#include <limits>
#include <vector>

#include "udsdm/t2fls.hpp"

// Independent reference computations shared by the unit tests and the
// acceptance binary.
namespace udsdm::oracle {

// Exhaustive search over the firing box, each coordinate stepped by `step`
// from its lower to its upper bound (the upper bound itself included).
inline Interval grid_type_reduce(const std::vector<Interval>& firings, const std::vector<Interval>& centroids,
                                 double step) {
  const std::size_t n = firings.size();
  std::vector<std::vector<double>> axes(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (double f = firings[k].lower; f < firings[k].upper; f += step) axes[k].push_back(f);
    axes[k].push_back(firings[k].upper);
  }
  Interval best{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  std::vector<std::size_t> idx(n, 0);
  while (true) {
    double num_l = 0.0, num_r = 0.0, den = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double f = axes[k][idx[k]];
      num_l += f * centroids[k].lower;
      num_r += f * centroids[k].upper;
      den += f;
    }
    if (den > 0.0) {
      best.lower = std::min(best.lower, num_l / den);
      best.upper = std::max(best.upper, num_r / den);
    }
    std::size_t k = 0;
    while (k < n && ++idx[k] == axes[k].size()) idx[k++] = 0;
    if (k == n) break;
  }
  return best;
}

// Type-1 Mamdani center-of-sets with point consequents.
inline double type1_cos(const TermSets& sets, const RuleBase& rb, const std::array<double, 3>& x) {
  double num = 0.0, den = 0.0;
  for (const auto& r : rb.rules) {
    double f = 1.0;
    for (std::size_t i = 0; i < 3; ++i) f = std::min(f, sets[static_cast<std::size_t>(r.antecedents[i])].upper_mf(x[i]));
    num += f * rb.consequent_centroids[static_cast<std::size_t>(r.consequent)].lower;
    den += f;
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace udsdm::oracle
