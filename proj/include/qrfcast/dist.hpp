#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qrfcast/quantile_vector.hpp"
#include "qrfcast/random.hpp"

namespace qrfcast {

struct Knot {
  double value = 0.0;
  double probability = 0.0;

  bool operator==(const Knot &) const = default;
};

/// Full predictive distribution built from a quantile vector: a linear CDF between
/// knots and exponential tails beyond the outermost knots.
///
/// The lower tail is F(x) = p0 * exp(a * (x - v0)) and the upper tail is
/// 1 - F(x) = (1 - pn) * exp(-b * (x - vn)). Each tail carries exactly the
/// probability left outside the knots, and its rate makes the density continuous
/// with the neighbouring linear segment. A knot at probability 0 or 1 means the
/// corresponding tail is absent (bounded support).
///
/// A vector whose values are all equal gives a point mass; density and the
/// log score are undefined for it.
class PiecewiseCDF {
 public:
  static PiecewiseCDF point_mass(double value) {
    PiecewiseCDF d;
    d.point_ = value;
    d.knots_ = {{value, 1.0}};
    return d;
  }

  /// Builds from explicit knots with strictly increasing values and probabilities
  /// in [0,1]. Used directly for bounded shapes such as Uniform(0,1) = {(0,0),(1,1)}.
  static PiecewiseCDF from_knots(std::vector<Knot> knots) {
    if (knots.size() < 2) throw std::invalid_argument("need at least two knots");
    for (std::size_t i = 0; i < knots.size(); ++i) {
      const auto &k = knots[i];
      if (!std::isfinite(k.value) || !(k.probability >= 0.0 && k.probability <= 1.0)) {
        throw std::invalid_argument("knot outside valid range");
      }
      if (i > 0 && !(k.value > knots[i - 1].value && k.probability > knots[i - 1].probability)) {
        throw std::invalid_argument("knots must be strictly increasing in value and probability");
      }
    }
    PiecewiseCDF d;
    d.knots_ = std::move(knots);
    const auto &lo0 = d.knots_[0];
    const auto &lo1 = d.knots_[1];
    const auto &hi0 = d.knots_[d.knots_.size() - 2];
    const auto &hi1 = d.knots_.back();
    if (lo0.probability > 0.0) {
      d.lower_rate_ = (lo1.probability - lo0.probability) / (lo1.value - lo0.value) / lo0.probability;
    }
    if (hi1.probability < 1.0) {
      d.upper_rate_ = (hi1.probability - hi0.probability) / (hi1.value - hi0.value) / (1.0 - hi1.probability);
    }
    return d;
  }

  bool is_degenerate() const { return point_.has_value(); }
  std::optional<double> point() const { return point_; }
  const std::vector<Knot> &knots() const { return knots_; }
  double lower_rate() const { return lower_rate_; }
  double upper_rate() const { return upper_rate_; }
  double lower_tail_mass() const { return is_degenerate() ? 0.0 : knots_.front().probability; }
  double upper_tail_mass() const { return is_degenerate() ? 0.0 : 1.0 - knots_.back().probability; }

  double cdf(double x) const {
    if (point_) return x >= *point_ ? 1.0 : 0.0;
    const auto &first = knots_.front();
    const auto &last = knots_.back();
    if (x < first.value) {
      return first.probability > 0.0 ? first.probability * std::exp(lower_rate_ * (x - first.value)) : 0.0;
    }
    if (x >= last.value) {
      return last.probability < 1.0 ? 1.0 - (1.0 - last.probability) * std::exp(-upper_rate_ * (x - last.value))
                                    : 1.0;
    }
    const auto i = segment_of(x);
    const auto &a = knots_[i];
    const auto &b = knots_[i + 1];
    return a.probability + (b.probability - a.probability) * (x - a.value) / (b.value - a.value);
  }

  double quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile: probability must be in (0,1)");
    if (point_) return *point_;
    const auto &first = knots_.front();
    const auto &last = knots_.back();
    if (p < first.probability) return first.value + std::log(p / first.probability) / lower_rate_;
    if (p > last.probability) return last.value - std::log((1.0 - p) / (1.0 - last.probability)) / upper_rate_;
    auto it = std::lower_bound(knots_.begin(), knots_.end(), p,
                               [](const Knot &k, double prob) { return k.probability < prob; });
    if (it->probability == p) return it->value;
    const auto &b = *it;
    const auto &a = *(it - 1);
    return a.value + (b.value - a.value) * (p - a.probability) / (b.probability - a.probability);
  }

  double density(double x) const {
    const double ld = log_density(x);
    return std::isinf(ld) ? 0.0 : std::exp(ld);
  }

  /// Natural log of the density, evaluated in log space in the tails.
  double log_density(double x) const {
    if (point_) throw std::domain_error("density is undefined for a point-mass distribution");
    const auto &first = knots_.front();
    const auto &last = knots_.back();
    if (x < first.value) {
      if (first.probability == 0.0) return -std::numeric_limits<double>::infinity();
      return std::log(first.probability * lower_rate_) + lower_rate_ * (x - first.value);
    }
    if (x >= last.value) {
      if (last.probability == 1.0) {
        return x == last.value ? std::log(segment_density(knots_.size() - 2))
                               : -std::numeric_limits<double>::infinity();
      }
      return std::log((1.0 - last.probability) * upper_rate_) - upper_rate_ * (x - last.value);
    }
    return std::log(segment_density(segment_of(x)));
  }

  /// Inverse-transform samples from a seeded stream.
  std::vector<double> sample(std::size_t n, std::uint64_t seed) const {
    RandomStream rng(seed);
    std::vector<double> out(n);
    for (auto &v : out) v = quantile(rng.uniform());
    return out;
  }

  double prob_below(double threshold) const { return cdf(threshold); }

  /// Fraction of n seeded draws strictly below the threshold.
  double prob_below_sampled(double threshold, std::size_t n, std::uint64_t seed) const {
    if (n == 0) throw std::invalid_argument("prob_below_sampled: n must be positive");
    const auto draws = sample(n, seed);
    const auto below = std::count_if(draws.begin(), draws.end(), [&](double v) { return v < threshold; });
    return static_cast<double>(below) / static_cast<double>(n);
  }

  PiecewiseCDF shifted(double c) const {
    PiecewiseCDF d = *this;
    if (d.point_) *d.point_ += c;
    for (auto &k : d.knots_) k.value += c;
    return d;
  }

  double segment_density(std::size_t i) const {
    const auto &a = knots_[i];
    const auto &b = knots_[i + 1];
    return (b.probability - a.probability) / (b.value - a.value);
  }

 private:
  // Index i of the segment [v_i, v_{i+1}) containing x; requires v_0 <= x < v_n.
  std::size_t segment_of(double x) const {
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x, [](double v, const Knot &k) { return v < k.value; });
    return static_cast<std::size_t>(it - knots_.begin()) - 1;
  }

  std::vector<Knot> knots_;
  std::optional<double> point_;
  double lower_rate_ = 0.0;
  double upper_rate_ = 0.0;
};

/// Interpolated CDF from a quantile vector. Repeated quantile values collapse into
/// one knot carrying the highest of their levels; if every value is equal the
/// result is a point mass.
inline PiecewiseCDF build_cdf(const QuantileVector &q) {
  q.validate();
  std::vector<Knot> knots;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!knots.empty() && knots.back().value == q.values[i]) {
      knots.back().probability = q.levels[i];
    } else {
      knots.push_back({q.values[i], q.levels[i]});
    }
  }
  if (knots.size() == 1) return PiecewiseCDF::point_mass(knots.front().value);
  return PiecewiseCDF::from_knots(std::move(knots));
}

}  // namespace qrfcast
