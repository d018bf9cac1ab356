#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "qrfcast/errors.hpp"
#include "qrfcast/synth.hpp"
#include "qrfcast/text.hpp"

using namespace qrfcast;

TEST(Synth, DeterministicForSeed) {
  auto cfg = SynthesisConfig::defaults();
  cfg.span_days = 5;
  const auto a = synthesize_dataset(cfg, 9);
  const auto b = synthesize_dataset(cfg, 9);
  const auto c = synthesize_dataset(cfg, 10);
  EXPECT_EQ(a.forecasts, b.forecasts);
  EXPECT_EQ(a.observations, b.observations);
  EXPECT_NE(a.observations, c.observations);
}

TEST(Synth, RespectsRosterShape) {
  auto cfg = SynthesisConfig::defaults();
  cfg.span_days = 20;
  const auto d = synthesize_dataset(cfg, 1);
  EXPECT_EQ(d.observations.size(), 20u * 24u);
  std::map<std::string, int> max_lead;
  std::map<std::string, std::set<int>> members;
  for (const auto &f : d.forecasts) {
    ASSERT_GE(f.lead_hours(), 0);
    ASSERT_LE(f.lead_hours(), kMaxLeadHours);
    max_lead[f.model_id] = std::max(max_lead[f.model_id], f.lead_hours());
    if (f.member) members[f.model_id].insert(*f.member);
    ASSERT_EQ(f.value, std::round(f.value * 100.0) / 100.0);
  }
  for (const auto &m : cfg.models) {
    EXPECT_EQ(max_lead[m.name], m.max_lead_hours) << m.name;
    if (m.ensemble_members > 1) {
      EXPECT_EQ(members[m.name].size(), static_cast<std::size_t>(m.ensemble_members));
    }
  }
  for (std::size_t i = 1; i < d.observations.size(); ++i) {
    EXPECT_EQ(d.observations[i].valid_time - d.observations[i - 1].valid_time, 1);
  }
}

// About 150 forecasts per hour on average once all runs are spun up.
TEST(Synth, DefaultDensityNearOneHundredFifty) {
  auto cfg = SynthesisConfig::defaults();
  cfg.span_days = 30;
  const auto d = synthesize_dataset(cfg, 2);
  std::map<Hour, int> per_hour;
  for (const auto &f : d.forecasts) ++per_hour[f.valid_time];
  double sum = 0;
  int n = 0;
  for (const auto &[t, c] : per_hour) {
    if (t - d.observations.front().valid_time < 24 * 8 || t > d.observations.back().valid_time) continue;
    sum += c;
    ++n;
  }
  EXPECT_NEAR(sum / n, 150.0, 15.0);
}

TEST(Synth, ErrorsGrowWithLead) {
  auto cfg = SynthesisConfig::defaults();
  cfg.span_days = 60;
  const auto d = synthesize_dataset(cfg, 5);
  double s_short = 0, s_long = 0;
  int n_short = 0, n_long = 0;
  for (const auto &f : d.forecasts) {
    if (f.model_id != "glu") continue;
    const auto y = d.observation_at(f.valid_time);
    if (!y) continue;
    const double e = *y - f.value;
    if (f.lead_hours() < 24) {
      s_short += e * e;
      ++n_short;
    } else if (f.lead_hours() >= 144) {
      s_long += e * e;
      ++n_long;
    }
  }
  EXPECT_GT(s_long / n_long, 1.5 * s_short / n_short);
}

TEST(Synth, ParsesConfig) {
  const auto cfg = parse_synthesis_config({{"span_days", "30"},
                                           {"models", "glu, mine"},
                                           {"init_cycle_hours", "6,12"},
                                           {"max_lead_hours", "168"},
                                           {"noise_base", "0.5"},
                                           {"ensemble_members", "1,4"}});
  EXPECT_EQ(cfg.span_days, 30);
  ASSERT_EQ(cfg.models.size(), 2u);
  EXPECT_EQ(cfg.models[0].bias_amplitude, 0.6);
  EXPECT_EQ(cfg.models[1].name, "mine");
  EXPECT_EQ(cfg.models[1].init_cycle_hours, 12);
  EXPECT_EQ(cfg.models[1].ensemble_members, 4);
  EXPECT_EQ(cfg.models[1].noise_base, 0.5);
  EXPECT_THROW(parse_synthesis_config({{"init_cycle_hours", "1,2"}}), ConfigError);
  EXPECT_THROW(parse_synthesis_config({{"max_lead_hours", "200"}}), ConfigError);
  EXPECT_THROW(parse_synthesis_config({{"span_days", "ten"}}), ConfigError);
}

TEST(Synth, ReadsKeyValueFile) {
  const auto path = std::filesystem::temp_directory_path() / "qrfcast_synth.cfg";
  std::ofstream(path) << "# comment\n[synth]\nspan_days = 12\nseed=4\n";
  const auto kv = text::read_key_values(path.string());
  EXPECT_EQ(kv.at("span_days"), "12");
  EXPECT_EQ(parse_synthesis_config(kv).seed, 4u);
  std::ofstream(path) << "span_days 12\n";
  EXPECT_THROW(text::read_key_values(path.string()), ConfigError);
}
