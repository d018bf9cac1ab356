#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qrfcast/combine.hpp"
#include "qrfcast/dist.hpp"
#include "qrfcast/error_model.hpp"
#include "qrfcast/errors.hpp"
#include "qrfcast/ingest.hpp"
#include "qrfcast/parallel.hpp"
#include "qrfcast/qrf.hpp"
#include "qrfcast/quantile_vector.hpp"
#include "qrfcast/random.hpp"
#include "qrfcast/scoring.hpp"

namespace qrfcast {

struct PipelineConfig {
  ForestConfig forest;
  int train_days = 14;
  int horizon_hours = kMaxLeadHours;
  std::vector<double> levels = standard_levels();
  std::size_t min_training_rows = 1000;
  int jobs = 1;  // threads used for tree growing
};

/// Post-processed forecast for one hour after the origin.
struct HourForecast {
  Hour valid_time;
  int lead_hours = 0;  // hours after the origin
  CombinedForecast combined;
  PiecewiseCDF distribution;
  std::vector<double> raw_values;  // current deterministic forecasts covering this hour
  std::optional<double> observation;
};

struct StageTimings {
  double slice_seconds = 0.0;
  double train_seconds = 0.0;
  double predict_seconds = 0.0;
};

struct ScenarioForecast {
  Hour origin;
  std::size_t training_rows = 0;
  std::size_t skipped_unmatched = 0;      // training forecasts without an observation
  std::size_t skipped_unknown_label = 0;  // current forecasts whose label never appeared in training
  std::size_t uncovered_hours = 0;        // hours after the origin with no current forecast
  std::optional<Hour> latest_training_observation;
  StageTimings timings;
  std::vector<HourForecast> hours;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

/// Error table for the training window ending at `origin`, plus the latest
/// observation time any training row used.
struct TrainingData {
  ErrorTable table;
  std::optional<Hour> latest_observation;
  ScenarioSlice slice;
};

inline TrainingData prepare_training(const Dataset &labelled, Hour origin, const PipelineConfig &config) {
  TrainingData out;
  out.slice = slice_scenario(labelled, ScenarioWindow{origin, config.train_days, config.horizon_hours});
  out.table = build_error_table(out.slice.train);
  for (const auto &f : out.slice.train.forecasts) {
    if (out.slice.train.observation_at(f.valid_time) &&
        (!out.latest_observation || *out.latest_observation < f.valid_time)) {
      out.latest_observation = f.valid_time;
    }
  }
  if (out.table.rows.size() < config.min_training_rows) {
    throw DataError("insufficient training data: " + std::to_string(out.table.rows.size()) + " error rows (minimum " +
                    std::to_string(config.min_training_rows) + ")");
  }
  return out;
}

/// Full pipeline for one forecast origin: learn error profiles on the training
/// window, convert each model's current forecast to quantiles, Vincentize per
/// hour and interpolate a full distribution. Expects rank-labelled forecasts.
/// `pretrained`, when given, replaces the forest training step.
inline ScenarioForecast forecast_scenario(const Dataset &labelled, Hour origin, const PipelineConfig &config,
                                          const Forest *pretrained = nullptr) {
  ScenarioForecast out;
  out.origin = origin;

  auto t0 = std::chrono::steady_clock::now();
  TrainingData training = prepare_training(labelled, origin, config);
  out.training_rows = training.table.rows.size();
  out.skipped_unmatched = training.table.skipped_unmatched;
  out.latest_training_observation = training.latest_observation;
  out.timings.slice_seconds = detail::seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  Forest trained;
  if (!pretrained) trained = Forest::train(training.table, config.forest, config.jobs);
  const Forest &forest = pretrained ? *pretrained : trained;
  out.timings.train_seconds = detail::seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const Dataset &eval = training.slice.eval;
  std::map<Hour, std::vector<const ForecastRecord *>> by_hour;
  for (const auto &f : eval.forecasts) {
    if (f.valid_time > origin) by_hour[f.valid_time].push_back(&f);
  }
  std::map<std::pair<int, std::string>, QuantileVector> cache;
  for (int h = 1; h <= config.horizon_hours; ++h) {
    const Hour t = origin + h;
    auto it = by_hour.find(t);
    if (it == by_hour.end()) {
      ++out.uncovered_hours;
      continue;
    }
    std::vector<ProbabilisticForecast> members;
    std::vector<double> raw;
    for (const auto *f : it->second) {
      raw.push_back(f->value);
      if (!forest.knows_label(f->model_label())) {
        ++out.skipped_unknown_label;
        continue;
      }
      const auto key = std::pair{f->lead_hours(), f->model_label()};
      auto cached = cache.find(key);
      if (cached == cache.end()) {
        cached = cache.emplace(key, forest.predict_quantiles(CovariateVector{key.first, key.second}, config.levels)).first;
      }
      members.push_back(to_probabilistic(*f, cached->second));
    }
    if (members.empty()) {
      ++out.uncovered_hours;
      continue;
    }
    HourForecast hf;
    hf.valid_time = t;
    hf.lead_hours = h;
    hf.combined = combine_timestep(members, h);
    hf.distribution = build_cdf(hf.combined.quantiles);
    hf.raw_values = std::move(raw);
    hf.observation = eval.observation_at(t);
    out.hours.push_back(std::move(hf));
  }
  out.timings.predict_seconds = detail::seconds_since(t0);
  return out;
}

/// Origins whose training window lies inside the data, whose horizon ends at or
/// before the last observation, and whose current model runs cover every hour
/// of the horizon.
inline std::vector<Hour> admissible_origins(const Dataset &labelled, int train_days, int horizon_hours) {
  if (labelled.observations.empty() || labelled.forecasts.empty()) return {};
  const auto span = dataset_span(labelled);
  const Hour first = span->first;
  const Hour last_obs = labelled.observations.back().valid_time;

  // Per model: init time -> last valid time of that run.
  std::map<std::string, std::map<Hour, Hour>> runs;
  for (const auto &f : labelled.forecasts) {
    auto &end = runs[f.model_id][f.init_time];
    end = std::max(end, f.valid_time);
  }
  std::vector<Hour> out;
  for (Hour h = first + std::int64_t{24} * train_days; h + horizon_hours <= last_obs; h = h + 1) {
    std::optional<Hour> reach;
    for (const auto &[model, inits] : runs) {
      auto it = inits.upper_bound(h);
      if (it == inits.begin()) continue;
      --it;
      if (!reach || *reach < it->second) reach = it->second;
    }
    if (reach && *reach >= h + horizon_hours) out.push_back(h);
  }
  return out;
}

struct EvaluationConfig {
  PipelineConfig pipeline;
  int n_scenarios = 200;
  std::uint64_t seed = 1;
  int jobs = 1;  // scenarios evaluated concurrently
};

struct ScenarioOutcome {
  std::size_t index = 0;
  Hour origin;
  std::vector<ScoreRecord> scores;
  std::vector<ScoreRecord> nwp_scores;
  std::size_t training_rows = 0;
  std::size_t skipped_unmatched = 0;
  std::size_t skipped_unknown_label = 0;
  std::size_t uncovered_hours = 0;
  std::size_t missing_observations = 0;
  bool leakage_free = true;
  StageTimings timings;
};

struct EvaluationReport {
  std::vector<ScenarioOutcome> scenarios;
  std::vector<LeadAggregate> aggregates;
  std::vector<LeadAggregate> nwp_aggregates;

  std::vector<ScoreRecord> all_scores() const {
    std::vector<ScoreRecord> out;
    for (const auto &s : scenarios) out.insert(out.end(), s.scores.begin(), s.scores.end());
    return out;
  }
  std::vector<ScoreRecord> all_nwp_scores() const {
    std::vector<ScoreRecord> out;
    for (const auto &s : scenarios) out.insert(out.end(), s.nwp_scores.begin(), s.nwp_scores.end());
    return out;
  }
};

/// Seeded uniform draw with replacement from the admissible origins.
inline std::vector<Hour> draw_origins(const std::vector<Hour> &admissible, int n, std::uint64_t seed) {
  if (admissible.empty()) throw DataError("no admissible origin");
  RandomStream rng(seed);
  std::vector<Hour> out;
  for (int i = 0; i < n; ++i) out.push_back(admissible[rng.below(admissible.size())]);
  return out;
}

inline ScenarioOutcome evaluate_scenario(const Dataset &labelled, Hour origin, const PipelineConfig &config) {
  const auto fc = forecast_scenario(labelled, origin, config);
  ScenarioOutcome out;
  out.origin = origin;
  out.training_rows = fc.training_rows;
  out.skipped_unmatched = fc.skipped_unmatched;
  out.skipped_unknown_label = fc.skipped_unknown_label;
  out.uncovered_hours = fc.uncovered_hours;
  out.timings = fc.timings;
  out.leakage_free = !fc.latest_training_observation || *fc.latest_training_observation < origin;
  for (const auto &h : fc.hours) {
    if (!h.observation) {
      ++out.missing_observations;
      continue;
    }
    out.scores.push_back(score_distribution(h.distribution, *h.observation, h.valid_time, h.lead_hours));
    out.nwp_scores.push_back(score_raw_ensemble(h.raw_values, *h.observation, h.valid_time, h.lead_hours));
  }
  return out;
}

/// Multi-scenario backtest: seeded origins, one forest per scenario, scores for
/// the post-processed forecast and the raw NWP comparator, aggregated by lead.
inline EvaluationReport evaluate(const Dataset &labelled, const EvaluationConfig &config) {
  if (config.n_scenarios < 1) throw ConfigError("n_scenarios must be >= 1");
  const auto admissible =
      admissible_origins(labelled, config.pipeline.train_days, config.pipeline.horizon_hours);
  if (admissible.empty()) {
    throw DataError("dataset too short: no origin has " + std::to_string(config.pipeline.train_days) +
                    " training days before it and a fully covered, observed " +
                    std::to_string(config.pipeline.horizon_hours) + "-hour horizon after it");
  }
  const auto origins = draw_origins(admissible, config.n_scenarios, config.seed);

  EvaluationReport report;
  report.scenarios.resize(origins.size());
  PipelineConfig per_scenario = config.pipeline;
  if (config.jobs > 1) per_scenario.jobs = 1;
  parallel_for(origins.size(), config.jobs, [&](std::size_t i) {
    report.scenarios[i] = evaluate_scenario(labelled, origins[i], per_scenario);
    report.scenarios[i].index = i;
  });
  const auto scores = report.all_scores();
  const auto nwp = report.all_nwp_scores();
  report.aggregates = aggregate_by_lead(scores);
  report.nwp_aggregates = aggregate_by_lead(nwp, "nwp_");
  return report;
}

}  // namespace qrfcast
