#include <gtest/gtest.h>

#include "qrfcast/errors.hpp"
#include "qrfcast/random.hpp"
#include "qrfcast/text.hpp"
#include "qrfcast/time.hpp"

using namespace qrfcast;

TEST(Time, ParsesAndFormatsRoundTrip) {
  const Hour h = parse_hour("2020-01-01T00:00Z");
  EXPECT_EQ(h.value, 18262 * 24);
  EXPECT_EQ(format_hour(h), "2020-01-01T00:00Z");
  EXPECT_EQ(parse_hour("2020-03-01T05:00:00Z"), parse_hour("2020-02-29T05:00Z") + 24);
  EXPECT_EQ(format_hour(parse_hour("1969-12-31T23:00Z")), "1969-12-31T23:00Z");
  for (std::int64_t v = -50; v < 200000; v += 997) EXPECT_EQ(parse_hour(format_hour(Hour{v})), Hour{v});
}

TEST(Time, RejectsBadTimestamps) {
  EXPECT_THROW(parse_hour("2020-01-01T00:30Z"), DataError);
  EXPECT_THROW(parse_hour("2020-01-01T00:00"), DataError);
  EXPECT_THROW(parse_hour("2020-01-01T00:00+01:00"), DataError);
  EXPECT_THROW(parse_hour("2021-02-29T00:00Z"), DataError);
  EXPECT_THROW(parse_hour("2020-01-01T24:00Z"), DataError);
  EXPECT_THROW(parse_hour("20x0-01-01T00:00Z"), DataError);
  EXPECT_THROW(parse_hour(""), DataError);
}

TEST(Time, HourArithmetic) {
  const Hour a = parse_hour("2020-01-31T22:00Z");
  EXPECT_EQ(format_hour(a + 3), "2020-02-01T01:00Z");
  EXPECT_EQ((a + 168) - a, 168);
  EXPECT_LT(a, a + 1);
}

TEST(Random, StreamsAreReproducibleAndInRange) {
  RandomStream a(5), b(5), c = RandomStream::derived(5, 1);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    EXPECT_EQ(u, b.uniform());
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(c.below(7), 7u);
  }
  RandomStream d(6);
  EXPECT_EQ(RandomStream::derived(5, 1).uniform(), d.uniform());
}

TEST(Random, NormalMoments) {
  RandomStream r(11);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.015);
}

TEST(Text, FormatsShortestRoundTrip) {
  EXPECT_EQ(text::format_double(0.1), "0.1");
  EXPECT_EQ(text::format_double(-3.25), "-3.25");
  EXPECT_EQ(*text::parse_double(text::format_double(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_FALSE(text::parse_double("1.5x"));
  EXPECT_FALSE(text::parse_int("2.0"));
  EXPECT_EQ(*text::parse_int(" 42 "), 42);
}
