#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qrfcast/dist.hpp"

using namespace qrfcast;

namespace {

std::vector<double> random_levels(std::mt19937_64 &rng) {
  switch (rng() % 3) {
    case 0: return standard_levels();
    case 1: return {0.1, 0.5, 0.9};
    default: {
      std::uniform_real_distribution<double> u(0.001, 0.999);
      std::vector<double> l;
      for (int i = 0; i < 15; ++i) l.push_back(u(rng));
      std::sort(l.begin(), l.end());
      l.erase(std::unique(l.begin(), l.end()), l.end());
      return l;
    }
  }
}

}  // namespace

TEST(Dist, UniformFromKnots) {
  const auto d = PiecewiseCDF::from_knots({{0, 0}, {1, 1}});
  EXPECT_EQ(d.cdf(-1), 0.0);
  EXPECT_EQ(d.cdf(0.25), 0.25);
  EXPECT_EQ(d.cdf(2), 1.0);
  EXPECT_EQ(d.quantile(0.7), 0.7);
  EXPECT_EQ(d.density(0.5), 1.0);
  EXPECT_EQ(d.density(-0.5), 0.0);
  EXPECT_EQ(d.lower_tail_mass(), 0.0);
  EXPECT_EQ(d.upper_tail_mass(), 0.0);
}

TEST(Dist, KnotsReproducedAndTailsCarryOutsideMass) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto q = oracle::random_quantiles(rng, random_levels(rng));
    const auto d = build_cdf(q);
    for (std::size_t i = 0; i < q.size(); ++i) {
      EXPECT_NEAR(d.cdf(q.values[i]), q.levels[i], 1e-12);
      EXPECT_NEAR(d.quantile(q.levels[i]), q.values[i], 1e-9);
    }
    EXPECT_EQ(d.lower_tail_mass(), q.levels.front());
    EXPECT_NEAR(d.upper_tail_mass(), 1.0 - q.levels.back(), 1e-15);
    // density is continuous where the tails meet the linear part
    const double v0 = q.values.front(), vn = q.values.back();
    EXPECT_NEAR(d.density(std::nextafter(v0, -1e9)), d.segment_density(0), 1e-9 * d.segment_density(0));
    EXPECT_NEAR(d.density(vn), d.segment_density(q.size() - 2), 1e-9 * d.segment_density(q.size() - 2));
  }
}

TEST(Dist, IntegratesToOne) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = build_cdf(oracle::random_quantiles(rng, random_levels(rng)));
    EXPECT_NEAR(oracle::integrated_density(d), 1.0, 1e-6);
  }
}

TEST(Dist, QuantileCdfRoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1e-6, 1 - 1e-6);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = build_cdf(oracle::random_quantiles(rng, random_levels(rng)));
    for (int i = 0; i < 200; ++i) {
      const double p = u(rng);
      EXPECT_NEAR(d.cdf(d.quantile(p)), p, 1e-9);
      const double x = d.quantile(p);
      EXPECT_NEAR(d.quantile(d.cdf(x)), x, 1e-9 * std::max(1.0, std::abs(x)));
    }
  }
}

TEST(Dist, CdfMonotoneAndBounded) {
  std::mt19937_64 rng(4);
  const auto d = build_cdf(oracle::random_quantiles(rng, standard_levels()));
  double prev = 0.0;
  for (double x = d.quantile(1e-9) - 5; x < d.quantile(1 - 1e-9) + 5; x += 0.01) {
    const double f = d.cdf(x);
    ASSERT_GE(f, prev);
    ASSERT_LE(f, 1.0);
    prev = f;
  }
}

TEST(Dist, SamplesPassKolmogorovSmirnov) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = build_cdf(oracle::random_quantiles(rng, random_levels(rng)));
    const auto s = d.sample(100000, 77 + trial);
    EXPECT_LT(oracle::ks_statistic(s, [&](double x) { return d.cdf(x); }), 0.01);
  }
}

TEST(Dist, SamplesAreSeeded) {
  const auto d = PiecewiseCDF::from_knots({{0, 0.1}, {1, 0.9}});
  EXPECT_EQ(d.sample(50, 1), d.sample(50, 1));
  EXPECT_NE(d.sample(50, 1), d.sample(50, 2));
  EXPECT_NEAR(d.prob_below_sampled(0.5, 100000, 3), d.prob_below(0.5), 0.005);
}

TEST(Dist, PointMassAndDuplicates) {
  QuantileVector flat{{0.1, 0.5, 0.9}, {2.0, 2.0, 2.0}};
  const auto pm = build_cdf(flat);
  ASSERT_TRUE(pm.is_degenerate());
  EXPECT_EQ(pm.cdf(1.999), 0.0);
  EXPECT_EQ(pm.cdf(2.0), 1.0);
  EXPECT_EQ(pm.quantile(0.3), 2.0);
  EXPECT_THROW(pm.log_density(2.0), std::domain_error);

  QuantileVector dup{{0.1, 0.2, 0.3, 0.9}, {0.0, 1.0, 1.0, 2.0}};
  const auto d = build_cdf(dup);
  ASSERT_EQ(d.knots().size(), 3u);
  EXPECT_EQ(d.knots()[1], (Knot{1.0, 0.3}));
  EXPECT_EQ(d.cdf(1.0), 0.3);
  EXPECT_NEAR(oracle::integrated_density(d), 1.0, 1e-6);
}

TEST(Dist, RejectsBadInputs) {
  const auto d = PiecewiseCDF::from_knots({{0, 0.1}, {1, 0.9}});
  EXPECT_THROW(d.quantile(0.0), std::invalid_argument);
  EXPECT_THROW(d.quantile(1.0), std::invalid_argument);
  EXPECT_THROW(PiecewiseCDF::from_knots({{0, 0.1}}), std::invalid_argument);
  EXPECT_THROW(PiecewiseCDF::from_knots({{0, 0.5}, {1, 0.4}}), std::invalid_argument);
  EXPECT_THROW(build_cdf(QuantileVector{{0.5, 0.4}, {0, 1}}), std::invalid_argument);
}

TEST(Dist, ShiftIsTranslation) {
  std::mt19937_64 rng(6);
  const auto d = build_cdf(oracle::random_quantiles(rng, standard_levels()));
  const auto s = d.shifted(3.5);
  for (double p : {0.001, 0.3, 0.5, 0.97, 0.9999}) EXPECT_NEAR(s.quantile(p), d.quantile(p) + 3.5, 1e-9);
}
