#pragma once

// Reference computations used by the tests. Deliberately naive: bisection,
// brute-force integration and sorting, nothing shared with the library code.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "qrfcast/dist.hpp"

namespace oracle {

inline double normal_cdf(double x, double mu = 0.0, double sigma = 1.0) {
  return 0.5 * std::erfc(-(x - mu) / (sigma * std::sqrt(2.0)));
}

// Normal quantile by bisection on erfc; good to ~1e-15 relative.
inline double normal_quantile(double p, double mu = 0.0, double sigma = 1.0) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (normal_cdf(mid) < p) lo = mid; else hi = mid;
  }
  return mu + sigma * 0.5 * (lo + hi);
}

inline double simpson(const std::function<double(double)> &f, double a, double b, int n = 2000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Integral of the density: trapezoid on every linear segment using one-sided
// limits at the knots, Simpson in the tails
// truncated after 12 e-foldings plus the analytic remainder.
inline double integrated_density(const qrfcast::PiecewiseCDF &d) {
  const auto &k = d.knots();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < k.size(); ++i) {
    const double a = k[i].value, b = k[i + 1].value;
    const double fa = d.density(std::nextafter(a, b));
    const double fb = d.density(std::nextafter(b, a));
    total += 0.5 * (fa + fb) * (b - a);
  }
  auto dens = [&](double x) { return d.density(x); };
  if (d.lower_tail_mass() > 0.0) {
    const double span = 12.0 / d.lower_rate();
    const double v0 = k.front().value;
    total += simpson(dens, v0 - span, std::nextafter(v0, -std::numeric_limits<double>::infinity()), 20000);
    total += d.lower_tail_mass() * std::exp(-12.0);
  }
  if (d.upper_tail_mass() > 0.0) {
    const double span = 12.0 / d.upper_rate();
    const double vn = k.back().value;
    total += simpson(dens, vn, vn + span, 20000);
    total += d.upper_tail_mass() * std::exp(-12.0);
  }
  return total;
}

// CRPS by direct numerical integration of (F(x) - 1{x >= y})^2.
inline double crps_numeric(const qrfcast::PiecewiseCDF &d, double y) {
  const auto &k = d.knots();
  std::vector<double> cuts;
  for (const auto &kn : k) cuts.push_back(kn.value);
  cuts.push_back(y);
  const double lo_tail = d.lower_tail_mass() > 0.0 ? 40.0 / d.lower_rate() : 0.0;
  const double hi_tail = d.upper_tail_mass() > 0.0 ? 40.0 / d.upper_rate() : 0.0;
  cuts.push_back(std::min(k.front().value, y) - lo_tail - 1.0);
  cuts.push_back(std::max(k.back().value, y) + hi_tail + 1.0);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  auto f = [&](double x) {
    const double step = x >= y ? 1.0 : 0.0;
    const double e = d.cdf(x) - step;
    return e * e;
  };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    // keep the indicator jump at y out of the Simpson nodes' interior
    total += simpson(f, std::nextafter(a, b), std::nextafter(b, a), 4000);
  }
  return total;
}

// One-sample Kolmogorov-Smirnov statistic against a CDF.
inline double ks_statistic(std::vector<double> x, const std::function<double(double)> &cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  return d;
}

// Random strictly increasing quantile vector on the given levels.
inline qrfcast::QuantileVector random_quantiles(std::mt19937_64 &rng, const std::vector<double> &levels) {
  std::uniform_real_distribution<double> centre(-20.0, 30.0);
  std::uniform_real_distribution<double> step(0.001, 0.6);
  qrfcast::QuantileVector q;
  q.levels = levels;
  double v = centre(rng);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    q.values.push_back(v);
    v += step(rng);
  }
  return q;
}

}  // namespace oracle
