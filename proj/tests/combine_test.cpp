#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "qrfcast/combine.hpp"

using namespace qrfcast;

namespace {

QuantileVector normal_q(double mu, double sigma) {
  QuantileVector q{standard_levels(), {}};
  for (double p : q.levels) q.values.push_back(oracle::normal_quantile(p, mu, sigma));
  return q;
}

}  // namespace

TEST(Combine, NormalsAverageToNormal) {
  const std::vector<QuantileVector> in{normal_q(0, 1), normal_q(2, 3)};
  const auto out = vincentize(in);
  const auto expect = normal_q(1, 2);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(out.values[i], expect.values[i], 1e-9);
}

TEST(Combine, IdenticalInputsReproduceExactly) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto q = oracle::random_quantiles(rng, standard_levels());
    const std::vector<QuantileVector> copies(1 + trial % 17, q);
    EXPECT_EQ(vincentize(copies), q);
  }
}

// Properties: order-invariant (to rounding), monotone, translation-equivariant,
// and bounded by the per-level min/max of the inputs.
TEST(Combine, AlgebraicProperties) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<QuantileVector> in;
    const int n = 1 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) in.push_back(oracle::random_quantiles(rng, standard_levels()));
    const auto out = vincentize(in);
    EXPECT_NO_THROW(out.validate());
    auto shuffled = in;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto out2 = vincentize(shuffled);
    auto shifted = in;
    for (auto &q : shifted) for (auto &v : q.values) v += 5.0;
    const auto out3 = vincentize(shifted);
    for (std::size_t k = 0; k < out.size(); ++k) {
      EXPECT_NEAR(out.values[k], out2.values[k], 1e-10);
      EXPECT_NEAR(out3.values[k], out.values[k] + 5.0, 1e-10);
      double lo = 1e300, hi = -1e300;
      for (const auto &q : in) {
        lo = std::min(lo, q.values[k]);
        hi = std::max(hi, q.values[k]);
      }
      EXPECT_GE(out.values[k], lo - 1e-12);
      EXPECT_LE(out.values[k], hi + 1e-12);
    }
  }
}

TEST(Combine, RejectsBadInput) {
  EXPECT_THROW(vincentize(std::vector<QuantileVector>{}), std::invalid_argument);
  std::vector<QuantileVector> in{{{0.1, 0.5}, {0, 1}}, {{0.1, 0.6}, {0, 1}}};
  EXPECT_THROW(vincentize(in), std::invalid_argument);
  EXPECT_THROW(combine_timestep(std::vector<ProbabilisticForecast>{}, 1), std::invalid_argument);
}

TEST(Combine, TimestepCountsContributors) {
  std::vector<ProbabilisticForecast> fs;
  const Hour t = parse_hour("2020-01-05T00:00Z");
  for (int i = 0; i < 3; ++i) fs.push_back({"m" + std::to_string(i), t, 10 + i, normal_q(i, 1)});
  const auto c = combine_timestep(fs, 10);
  EXPECT_EQ(c.contributing_count, 3);
  EXPECT_EQ(c.valid_time, t);
  EXPECT_NEAR(c.quantiles.at_level(0.5), 1.0, 1e-12);
  const auto single = combine_timestep(std::span(fs).first(1), 10);
  EXPECT_EQ(single.quantiles, fs[0].quantiles);
  fs[1].valid_time = t + 1;
  EXPECT_THROW(combine_timestep(fs, 10), std::invalid_argument);
}
