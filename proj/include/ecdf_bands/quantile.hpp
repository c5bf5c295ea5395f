#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace ecdfb {

/// Empirical quantile with linear interpolation between order statistics (R type 7).
inline double quantile_type7(std::vector<double> values, double prob) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

}  // namespace ecdfb
