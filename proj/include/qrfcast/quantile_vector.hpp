#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace qrfcast {

/// Paired probability levels and values; the unit of exchange between pipeline stages.
struct QuantileVector {
  std::vector<double> levels;
  std::vector<double> values;

  std::size_t size() const { return levels.size(); }

  bool operator==(const QuantileVector &) const = default;

  /// Throws std::invalid_argument unless levels are strictly increasing in (0,1),
  /// values are finite and non-decreasing, and both have the same length.
  void validate() const {
    if (levels.size() != values.size()) throw std::invalid_argument("quantile levels/values length mismatch");
    if (levels.empty()) throw std::invalid_argument("empty quantile vector");
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (!(levels[i] > 0.0 && levels[i] < 1.0)) throw std::invalid_argument("quantile level outside (0,1)");
      if (!std::isfinite(values[i])) throw std::invalid_argument("non-finite quantile value");
      if (i > 0 && !(levels[i] > levels[i - 1])) throw std::invalid_argument("quantile levels not strictly increasing");
      if (i > 0 && values[i] < values[i - 1]) throw std::invalid_argument("quantile values decrease with level");
    }
  }

  /// Value at an exact grid level; throws if the level is not on the grid.
  double at_level(double level) const {
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (std::abs(levels[i] - level) < 1e-12) return values[i];
    }
    throw std::out_of_range("level not on quantile grid");
  }
};

/// Shared level grid: 0.01, 0.02, ..., 0.99 plus the 95% interval endpoints 0.025
/// and 0.975 (0.05/0.95 and 0.10/0.90 are already on the percentile grid).
inline const std::vector<double> &standard_levels() {
  static const std::vector<double> grid = [] {
    std::vector<double> g;
    for (int k = 1; k <= 99; ++k) g.push_back(k / 100.0);
    g.push_back(0.025);
    g.push_back(0.975);
    std::sort(g.begin(), g.end());
    return g;
  }();
  return grid;
}

}  // namespace qrfcast
