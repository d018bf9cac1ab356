#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrfcast/dist.hpp"
#include "qrfcast/quantile_vector.hpp"
#include "qrfcast/text.hpp"
#include "qrfcast/time.hpp"

namespace qrfcast {

/// Central prediction intervals tracked in every score record.
inline constexpr std::array<double, 4> kIntervalWidths{0.5, 0.8, 0.9, 0.95};

struct ScoreRecord {
  Hour valid_time;
  int lead_hours = 0;
  double crps = 0.0;
  std::optional<double> log_score;  // nats; absent where undefined
  double abs_error_median = 0.0;
  std::vector<bool> interval_hits;  // aligned with kIntervalWidths; empty when not applicable
};

namespace detail {

inline std::size_t interval_index(double width) {
  for (std::size_t i = 0; i < kIntervalWidths.size(); ++i) {
    if (std::abs(kIntervalWidths[i] - width) < 1e-12) return i;
  }
  throw std::invalid_argument("interval width " + std::to_string(width) + " is not tracked");
}

// Integrals of F^2 and (1 - F)^2 over [a, b] for each piece of a PiecewiseCDF.
// Infinite endpoints are allowed only where the integrand vanishes.

inline double linear_sq(double width, double fa, double fb) { return width * (fa * fa + fa * fb + fb * fb) / 3.0; }

// Lower tail F(x) = m * exp(r (x - v0)).
inline double lower_tail_f2(double fb, double rate) { return fb * fb / (2.0 * rate); }
inline double lower_tail_g2(double a, double b, double fa, double fb, double rate) {
  return (b - a) - 2.0 * (fb - fa) / rate + (fb * fb - fa * fa) / (2.0 * rate);
}
// Upper tail S(x) = 1 - F(x) = m * exp(-r (x - vn)).
inline double upper_tail_g2(double sa, double rate) { return sa * sa / (2.0 * rate); }
inline double upper_tail_f2(double a, double b, double sa, double sb, double rate) {
  return (b - a) - 2.0 * (sa - sb) / rate + (sa * sa - sb * sb) / (2.0 * rate);
}

}  // namespace detail

/// Fraction of records whose observation fell inside the central interval of the given width.
inline double interval_coverage(std::span<const ScoreRecord> records, double width) {
  const auto idx = detail::interval_index(width);
  std::size_t n = 0;
  std::size_t hits = 0;
  for (const auto &r : records) {
    if (r.interval_hits.empty()) continue;
    ++n;
    if (r.interval_hits[idx]) ++hits;
  }
  if (n == 0) throw std::invalid_argument("interval_coverage: no records");
  return static_cast<double>(hits) / static_cast<double>(n);
}

inline double mae_median(std::span<const ScoreRecord> records) {
  if (records.empty()) throw std::invalid_argument("mae_median: no records");
  std::vector<double> errs;
  errs.reserve(records.size());
  for (const auto &r : records) errs.push_back(r.abs_error_median);
  std::sort(errs.begin(), errs.end());
  return std::accumulate(errs.begin(), errs.end(), 0.0) / static_cast<double>(errs.size());
}

/// Exact CRPS: integral of (F(x) - 1{x >= y})^2, piece by piece.
inline double crps(const PiecewiseCDF &d, double y) {
  if (d.is_degenerate()) return std::abs(y - *d.point());
  const auto &k = d.knots();
  double total = 0.0;

  // Lower tail (-inf, v0).
  const double v0 = k.front().value;
  if (d.lower_tail_mass() > 0.0) {
    const double rate = d.lower_rate();
    if (y >= v0) {
      total += detail::lower_tail_f2(k.front().probability, rate);
    } else {
      total += detail::lower_tail_f2(d.cdf(y), rate);
      total += detail::lower_tail_g2(y, v0, d.cdf(y), k.front().probability, rate);
    }
  } else if (y < v0) {
    total += v0 - y;
  }

  // Linear segments.
  for (std::size_t i = 0; i + 1 < k.size(); ++i) {
    const double a = k[i].value;
    const double b = k[i + 1].value;
    const double fa = k[i].probability;
    const double fb = k[i + 1].probability;
    if (y <= a) {
      total += detail::linear_sq(b - a, 1.0 - fa, 1.0 - fb);
    } else if (y >= b) {
      total += detail::linear_sq(b - a, fa, fb);
    } else {
      const double fy = fa + (fb - fa) * (y - a) / (b - a);
      total += detail::linear_sq(y - a, fa, fy);
      total += detail::linear_sq(b - y, 1.0 - fy, 1.0 - fb);
    }
  }

  // Upper tail (vn, inf).
  const double vn = k.back().value;
  if (d.upper_tail_mass() > 0.0) {
    const double rate = d.upper_rate();
    const double sn = 1.0 - k.back().probability;
    if (y <= vn) {
      total += detail::upper_tail_g2(sn, rate);
    } else {
      const double sy = sn * std::exp(-rate * (y - vn));
      total += detail::upper_tail_f2(vn, y, sn, sy, rate);
      total += detail::upper_tail_g2(sy, rate);
    }
  } else if (y > vn) {
    total += y - vn;
  }
  return total;
}

struct MonteCarloEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Sample CRPS estimator E|X - y| - E|X - X'|/2 over n seeded draws, with the
/// pairwise term averaged over all distinct pairs. The standard error comes
/// from the first-order (influence-function) variance of that U-statistic.
inline MonteCarloEstimate crps_mc_estimate(const PiecewiseCDF &d, double y, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("crps_mc: need at least two draws");
  if (d.is_degenerate()) return {std::abs(y - *d.point()), 0.0};
  auto x = d.sample(n, seed);
  std::sort(x.begin(), x.end());
  const double nd = static_cast<double>(n);

  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  const double total = prefix[n];

  double abs_dev = 0.0;
  double pair_sum = 0.0;
  std::vector<double> influence(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double below = x[i] * static_cast<double>(i) - prefix[i];
    const double above = (total - prefix[i + 1]) - x[i] * static_cast<double>(n - i - 1);
    const double mean_pair = (below + above) / (nd - 1.0);  // average |x_i - x_j| over j != i
    const double dy = std::abs(x[i] - y);
    abs_dev += dy;
    pair_sum += below;
    influence[i] = dy - mean_pair;
  }
  const double e_xy = abs_dev / nd;
  const double e_xx = pair_sum / (nd * (nd - 1.0) / 2.0);
  const double mean_inf = std::accumulate(influence.begin(), influence.end(), 0.0) / nd;
  double var = 0.0;
  for (double g : influence) var += (g - mean_inf) * (g - mean_inf);
  var /= (nd - 1.0);
  return {e_xy - 0.5 * e_xx, std::sqrt(var / nd)};
}

inline double crps_mc(const PiecewiseCDF &d, double y, std::size_t n, std::uint64_t seed) {
  return crps_mc_estimate(d, y, n, seed).value;
}

/// Negative log predictive density at y.
inline double log_score(const PiecewiseCDF &d, double y) { return -d.log_density(y); }

/// Pinball loss rho_tau(y - q_tau) at every level of q.
inline std::vector<double> quantile_score(const QuantileVector &q, double y) {
  std::vector<double> out(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double u = y - q.values[i];
    out[i] = u >= 0.0 ? q.levels[i] * u : (q.levels[i] - 1.0) * u;
  }
  return out;
}

/// Interval score for the central interval of the given width (alpha = 1 - width).
inline double interval_score(const PiecewiseCDF &d, double y, double width) {
  if (!(width > 0.0 && width < 1.0)) throw std::invalid_argument("interval width must be in (0,1)");
  const double alpha = 1.0 - width;
  const double lower = d.quantile(alpha / 2.0);
  const double upper = d.quantile(1.0 - alpha / 2.0);
  double score = upper - lower;
  if (y < lower) score += 2.0 / alpha * (lower - y);
  if (y > upper) score += 2.0 / alpha * (y - upper);
  return score;
}

/// Scores a predictive distribution against one observation.
inline ScoreRecord score_distribution(const PiecewiseCDF &d, double y, Hour valid_time, int lead_hours) {
  ScoreRecord r;
  r.valid_time = valid_time;
  r.lead_hours = lead_hours;
  r.crps = crps(d, y);
  if (!d.is_degenerate()) r.log_score = log_score(d, y);
  r.abs_error_median = std::abs(y - d.quantile(0.5));
  for (double w : kIntervalWidths) {
    const double lo = d.quantile((1.0 - w) / 2.0);
    const double hi = d.quantile((1.0 + w) / 2.0);
    r.interval_hits.push_back(y >= lo && y <= hi);
  }
  return r;
}

inline double median_of(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty set");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

/// CRPS of the empirical distribution of raw ensemble values.
inline double ensemble_crps(std::vector<double> values, double y) {
  if (values.empty()) throw std::invalid_argument("ensemble_crps: no members");
  std::sort(values.begin(), values.end());
  const double m = static_cast<double>(values.size());
  double abs_dev = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    abs_dev += std::abs(values[i] - y);
    pairs += values[i] * (2.0 * static_cast<double>(i) + 1.0 - m);  // sum over j of |x_i - x_j| / 2
  }
  return abs_dev / m - pairs / (m * m);
}

/// Log score of a normal fitted to the raw ensemble; absent with fewer than two
/// members or zero spread.
inline std::optional<double> ensemble_log_score(const std::vector<double> &values, double y) {
  if (values.size() < 2) return std::nullopt;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0)) return std::nullopt;
  const double z = (y - mean) / sd;
  return 0.5 * std::log(2.0 * 3.14159265358979323846) + std::log(sd) + 0.5 * z * z;
}

/// Scores the raw NWP comparator: median of the available forecasts and the
/// empirical-ensemble CRPS. No interval hits.
inline ScoreRecord score_raw_ensemble(const std::vector<double> &values, double y, Hour valid_time, int lead_hours) {
  ScoreRecord r;
  r.valid_time = valid_time;
  r.lead_hours = lead_hours;
  r.crps = ensemble_crps(values, y);
  r.log_score = ensemble_log_score(values, y);
  r.abs_error_median = std::abs(y - median_of(values));
  return r;
}

struct MetricSummary {
  std::string metric;
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
  std::vector<double> points;  // sorted ascending
};

struct LeadAggregate {
  int lead_hours = 0;
  std::vector<MetricSummary> metrics;

  const MetricSummary *find(const std::string &name) const {
    for (const auto &m : metrics) {
      if (m.metric == name) return &m;
    }
    return nullptr;
  }
};

namespace detail {

inline MetricSummary summarise(std::string name, std::vector<double> values) {
  std::sort(values.begin(), values.end());
  MetricSummary s;
  s.metric = std::move(name);
  s.n = values.size();
  if (!values.empty()) {
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
    if (s.n > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - s.mean) * (v - s.mean);
      s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
  }
  s.points = std::move(values);
  return s;
}

}  // namespace detail

/// Groups records by lead hour. Metric names carry `prefix` (e.g. "nwp_").
/// Coverage metrics are named hit50, hit80, hit90, hit95; their mean is the coverage.
inline std::vector<LeadAggregate> aggregate_by_lead(std::span<const ScoreRecord> records, const std::string &prefix = "") {
  std::map<int, std::vector<const ScoreRecord *>> groups;
  for (const auto &r : records) groups[r.lead_hours].push_back(&r);
  std::vector<LeadAggregate> out;
  for (const auto &[lead, group] : groups) {
    LeadAggregate agg;
    agg.lead_hours = lead;
    std::vector<double> crps_v, log_v, mae_v;
    std::vector<std::vector<double>> hits(kIntervalWidths.size());
    for (const auto *r : group) {
      crps_v.push_back(r->crps);
      if (r->log_score) log_v.push_back(*r->log_score);
      mae_v.push_back(r->abs_error_median);
      for (std::size_t i = 0; i < r->interval_hits.size(); ++i) hits[i].push_back(r->interval_hits[i] ? 1.0 : 0.0);
    }
    agg.metrics.push_back(detail::summarise(prefix + "crps", std::move(crps_v)));
    agg.metrics.push_back(detail::summarise(prefix + "log_score", std::move(log_v)));
    agg.metrics.push_back(detail::summarise(prefix + "abs_err_median", std::move(mae_v)));
    for (std::size_t i = 0; i < kIntervalWidths.size(); ++i) {
      if (hits[i].empty()) continue;
      agg.metrics.push_back(detail::summarise(
          prefix + "hit" + std::to_string(static_cast<int>(std::lround(kIntervalWidths[i] * 100))), std::move(hits[i])));
    }
    out.push_back(std::move(agg));
  }
  return out;
}

inline void write_score_header(std::ostream &out) {
  out << "valid_time,lead_hours,crps,log_score,abs_err_median,hit50,hit80,hit90,hit95\n";
}

inline void write_score_row(std::ostream &out, const ScoreRecord &r) {
  out << format_hour(r.valid_time) << ',' << r.lead_hours << ',' << text::format_double(r.crps) << ',';
  if (r.log_score) out << text::format_double(*r.log_score);
  out << ',' << text::format_double(r.abs_error_median);
  for (std::size_t i = 0; i < kIntervalWidths.size(); ++i) {
    out << ',';
    if (i < r.interval_hits.size()) out << (r.interval_hits[i] ? 1 : 0);
  }
  out << '\n';
}

inline void write_aggregates(std::ostream &out, std::span<const LeadAggregate> aggregates, bool header = true) {
  if (header) out << "lead_hours,metric,mean,sd,n\n";
  for (const auto &a : aggregates) {
    for (const auto &m : a.metrics) {
      if (m.n == 0) continue;
      out << a.lead_hours << ',' << m.metric << ',' << text::format_double(m.mean) << ','
          << text::format_double(m.sd) << ',' << m.n << '\n';
    }
  }
}

}  // namespace qrfcast
