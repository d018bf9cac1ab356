#include <gtest/gtest.h>

#include <sstream>

#include "qrfcast/pipeline.hpp"
#include "qrfcast/synth.hpp"

using namespace qrfcast;

namespace {

const Dataset &dataset() {
  static const Dataset d = [] {
    auto cfg = SynthesisConfig::defaults();
    cfg.span_days = 30;
    auto data = synthesize_dataset(cfg, 21);
    data.forecasts = rank_label_members(std::move(data.forecasts));
    return data;
  }();
  return d;
}

PipelineConfig small_config() {
  PipelineConfig c;
  c.forest.num_trees = 40;
  return c;
}

std::string dump(const EvaluationReport &r) {
  std::ostringstream out;
  for (const auto &s : r.scenarios) {
    out << format_hour(s.origin) << '\n';
    for (const auto &rec : s.scores) write_score_row(out, rec);
    for (const auto &rec : s.nwp_scores) write_score_row(out, rec);
  }
  write_aggregates(out, r.aggregates);
  write_aggregates(out, r.nwp_aggregates);
  return out.str();
}

}  // namespace

TEST(Pipeline, FourteenDayWindowHasAboutFiftyThousandRows) {
  const auto origins = admissible_origins(dataset(), 14, 168);
  ASSERT_FALSE(origins.empty());
  const auto t = prepare_training(dataset(), origins.front(), small_config());
  EXPECT_GT(t.table.rows.size(), 40000u);
  EXPECT_LT(t.table.rows.size(), 60000u);
  EXPECT_LT(*t.latest_observation, origins.front());
}

TEST(Pipeline, AdmissibleOriginsHaveFullCoverage) {
  const auto origins = admissible_origins(dataset(), 14, 168);
  ASSERT_FALSE(origins.empty());
  const Hour first = dataset().observations.front().valid_time;
  const Hour last = dataset().observations.back().valid_time;
  for (const Hour o : origins) {
    ASSERT_GE(o - first, 14 * 24);
    ASSERT_LE(o + 168, last);
  }
  const auto fc = forecast_scenario(dataset(), origins[origins.size() / 2], small_config());
  EXPECT_EQ(fc.hours.size(), 168u);
  EXPECT_EQ(fc.uncovered_hours, 0u);
  for (std::size_t i = 0; i < fc.hours.size(); ++i) {
    const auto &h = fc.hours[i];
    EXPECT_EQ(h.lead_hours, static_cast<int>(i) + 1);
    EXPECT_EQ(h.combined.contributing_count, static_cast<int>(h.raw_values.size()));
    EXPECT_TRUE(h.observation.has_value());
    EXPECT_NO_THROW(h.combined.quantiles.validate());
    EXPECT_FALSE(h.distribution.is_degenerate());
  }
  // early hours are covered by many more models than the last day
  EXPECT_GT(fc.hours.front().combined.contributing_count, 3 * fc.hours.back().combined.contributing_count);
}

TEST(Pipeline, PretrainedForestGivesSameForecast) {
  const auto origin = admissible_origins(dataset(), 14, 168).front();
  const auto cfg = small_config();
  const auto t = prepare_training(dataset(), origin, cfg);
  const auto forest = Forest::train(t.table, cfg.forest);
  const auto a = forecast_scenario(dataset(), origin, cfg);
  const auto b = forecast_scenario(dataset(), origin, cfg, &forest);
  ASSERT_EQ(a.hours.size(), b.hours.size());
  for (std::size_t i = 0; i < a.hours.size(); ++i) EXPECT_EQ(a.hours[i].combined.quantiles, b.hours[i].combined.quantiles);
}

TEST(Pipeline, InsufficientTrainingData) {
  auto cfg = small_config();
  cfg.min_training_rows = 1000000;
  const auto origin = admissible_origins(dataset(), 14, 168).front();
  try {
    prepare_training(dataset(), origin, cfg);
    FAIL();
  } catch (const DataError &e) {
    EXPECT_NE(std::string(e.what()).find("insufficient training data"), std::string::npos);
  }
}

TEST(Pipeline, EvaluationIsDeterministicAndLeakFree) {
  EvaluationConfig ec;
  ec.pipeline = small_config();
  ec.n_scenarios = 4;
  ec.seed = 3;
  const auto a = evaluate(dataset(), ec);
  ec.jobs = 2;
  const auto b = evaluate(dataset(), ec);
  EXPECT_EQ(dump(a), dump(b));
  ASSERT_EQ(a.scenarios.size(), 4u);
  for (const auto &s : a.scenarios) {
    EXPECT_TRUE(s.leakage_free);
    EXPECT_EQ(s.scores.size(), 168u);
    EXPECT_EQ(s.nwp_scores.size(), 168u);
  }
  EXPECT_EQ(a.aggregates.size(), 168u);
  ec.seed = 4;
  EXPECT_NE(dump(evaluate(dataset(), ec)), dump(a));
}

TEST(Pipeline, ShortDatasetIsRejected) {
  auto cfg = SynthesisConfig::defaults();
  cfg.span_days = 10;
  auto data = synthesize_dataset(cfg, 1);
  EvaluationConfig ec;
  ec.n_scenarios = 1;
  try {
    evaluate(data, ec);
    FAIL();
  } catch (const DataError &e) {
    EXPECT_NE(std::string(e.what()).find("dataset too short"), std::string::npos);
  }
}

TEST(Pipeline, OriginsDrawnWithSeed) {
  const std::vector<Hour> adm{Hour{1}, Hour{2}, Hour{3}, Hour{4}};
  EXPECT_EQ(draw_origins(adm, 50, 9), draw_origins(adm, 50, 9));
  EXPECT_NE(draw_origins(adm, 50, 9), draw_origins(adm, 50, 10));
  EXPECT_THROW(draw_origins({}, 1, 1), DataError);
}
