#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "qrfcast/error_model.hpp"
#include "qrfcast/quantile_vector.hpp"
#include "qrfcast/time.hpp"

namespace qrfcast {

struct CombinedForecast {
  Hour valid_time;
  int lead_hours = 0;
  QuantileVector quantiles;
  int contributing_count = 0;
};

/// Quantile averaging (Vincentization): each output quantile is the equal-weight
/// mean of the same-level input quantiles.
inline QuantileVector vincentize(std::span<const QuantileVector> inputs) {
  if (inputs.empty()) throw std::invalid_argument("vincentize: empty input list");
  const auto &levels = inputs.front().levels;
  for (const auto &q : inputs) {
    if (q.levels != levels || q.values.size() != levels.size()) {
      throw std::invalid_argument("vincentize: inputs have mismatched levels");
    }
  }
  QuantileVector out{levels, std::vector<double>(levels.size(), 0.0)};
  const double n = static_cast<double>(inputs.size());
  for (std::size_t k = 0; k < levels.size(); ++k) {
    // Mean taken as an offset from the first input so identical inputs reproduce exactly.
    const double base = inputs.front().values[k];
    double offset = 0.0;
    for (const auto &q : inputs) offset += q.values[k] - base;
    out.values[k] = base + offset / n;
    if (k > 0 && out.values[k] < out.values[k - 1]) out.values[k] = out.values[k - 1];
  }
  return out;
}

/// Combines the probabilistic forecasts of every model covering one valid time.
/// Works for any number of contributors, including a single long-range model.
inline CombinedForecast combine_timestep(std::span<const ProbabilisticForecast> forecasts, int lead_hours) {
  if (forecasts.empty()) throw std::invalid_argument("combine_timestep: no forecasts");
  std::vector<QuantileVector> inputs;
  inputs.reserve(forecasts.size());
  for (const auto &f : forecasts) {
    if (f.valid_time != forecasts.front().valid_time) {
      throw std::invalid_argument("combine_timestep: forecasts for different valid times");
    }
    inputs.push_back(f.quantiles);
  }
  return CombinedForecast{forecasts.front().valid_time, lead_hours, vincentize(inputs),
                          static_cast<int>(forecasts.size())};
}

}  // namespace qrfcast
