#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "qrfcast/errors.hpp"
#include "qrfcast/ingest.hpp"
#include "qrfcast/random.hpp"
#include "qrfcast/text.hpp"
#include "qrfcast/time.hpp"

namespace qrfcast {

/// One synthetic NWP model. Forecast error standard deviation at lead L is
/// noise_base + noise_growth * L; the mean bias is bias_amplitude * (0.25 + L / 168).
struct SyntheticModel {
  std::string name;
  int init_cycle_hours = 6;
  int max_lead_hours = kMaxLeadHours;
  double bias_amplitude = 0.0;
  double noise_growth = 0.0;
  double noise_base = 0.0;
  int ensemble_members = 1;
};

struct SynthesisConfig {
  int span_days = 90;
  Hour start = parse_hour("2020-01-01T00:00Z");
  std::vector<SyntheticModel> models;
  // Share of each model's error driven by a weather signal common to all models.
  double common_error_fraction = 0.95;
  // Ensemble member spread, as a fraction of the model's error standard deviation.
  double ensemble_spread = 0.35;
  // Lag-one autocorrelation of the hourly observation residual and of forecast errors.
  double observation_ar = 0.95;
  double error_ar = 0.9;
  std::uint64_t seed = 1;

  /// Seven-model roster resembling a UK road-surface setup, one of them a 12-member ensemble.
  static SynthesisConfig defaults() {
    SynthesisConfig c;
    c.models = {
        {"glu", 6, 168, 0.6, 0.012, 0.60, 1},   {"glm", 12, 144, -0.4, 0.011, 0.55, 1},
        {"eur_eu", 12, 120, 0.3, 0.012, 0.60, 1}, {"eur_uk", 6, 120, -0.2, 0.011, 0.55, 1},
        {"ukv", 3, 54, 0.25, 0.010, 0.50, 1},    {"enuk", 12, 48, -0.3, 0.011, 0.55, 12},
        {"pvrn", 1, 6, 0.1, 0.020, 0.35, 1},
    };
    return c;
  }

  void validate() const {
    if (span_days <= 0) throw ConfigError("span_days must be positive");
    if (models.empty()) throw ConfigError("model roster is empty");
    for (const auto &m : models) {
      if (m.name.empty()) throw ConfigError("model with empty name");
      if (m.init_cycle_hours <= 0) throw ConfigError("init_cycle_hours must be positive for " + m.name);
      if (m.max_lead_hours < 0 || m.max_lead_hours > kMaxLeadHours) {
        throw ConfigError("max_lead_hours must be in [0,168] for " + m.name);
      }
      if (m.ensemble_members < 1) throw ConfigError("ensemble_members must be >= 1 for " + m.name);
      if (m.noise_base < 0 || m.noise_growth < 0) throw ConfigError("noise scales must be non-negative");
    }
    if (common_error_fraction < 0 || common_error_fraction > 1) {
      throw ConfigError("common_error_fraction must be in [0,1]");
    }
  }
};

namespace detail {

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string &key, const std::string &value, Parse parse) {
  std::vector<T> out;
  for (auto item : text::split(value, ',')) {
    item = text::trim(item);
    const auto parsed = parse(item);
    if (!parsed) throw ConfigError("bad value '" + std::string(item) + "' in " + key);
    out.push_back(static_cast<T>(*parsed));
  }
  return out;
}

}  // namespace detail

/// Reads a flat key/value synthesis config. Per-model keys take comma-separated
/// lists aligned with `models`; keys that are absent keep the default roster values.
inline SynthesisConfig parse_synthesis_config(const std::map<std::string, std::string> &kv) {
  auto cfg = SynthesisConfig::defaults();
  auto number = [](std::string_view s) { return text::parse_double(s); };
  auto integer = [](std::string_view s) { return text::parse_int(s); };

  for (const auto &[key, value] : kv) {
    if (key == "span_days") {
      const auto v = text::parse_int(value);
      if (!v) throw ConfigError("bad span_days");
      cfg.span_days = static_cast<int>(*v);
    } else if (key == "seed") {
      const auto v = text::parse_int(value);
      if (!v) throw ConfigError("bad seed");
      cfg.seed = static_cast<std::uint64_t>(*v);
    } else if (key == "start") {
      cfg.start = parse_hour(text::trim(value));
    } else if (key == "common_error_fraction" || key == "ensemble_spread" || key == "observation_ar" ||
               key == "error_ar") {
      const auto v = text::parse_double(value);
      if (!v) throw ConfigError("bad " + key);
      (key == "common_error_fraction" ? cfg.common_error_fraction
       : key == "ensemble_spread"     ? cfg.ensemble_spread
       : key == "observation_ar"      ? cfg.observation_ar
                                      : cfg.error_ar) = *v;
    }
  }

  if (auto it = kv.find("models"); it != kv.end()) {
    std::vector<SyntheticModel> roster;
    const auto defaults = SynthesisConfig::defaults().models;
    for (auto name : text::split(it->second, ',')) {
      name = text::trim(name);
      if (name.empty()) continue;
      SyntheticModel m{std::string(name)};
      for (const auto &d : defaults) {
        if (d.name == name) m = d;
      }
      roster.push_back(m);
    }
    cfg.models = roster;
  }

  auto apply = [&](const std::string &key, auto parse, auto assign) {
    auto it = kv.find(key);
    if (it == kv.end()) return;
    using Value = std::decay_t<decltype(*parse(std::string_view{}))>;
    const auto values = detail::parse_list<Value>(key, it->second, parse);
    if (values.size() == 1) {
      for (auto &m : cfg.models) assign(m, values[0]);
    } else if (values.size() == cfg.models.size()) {
      for (std::size_t i = 0; i < values.size(); ++i) assign(cfg.models[i], values[i]);
    } else {
      throw ConfigError(key + " needs one value or one per model (" + std::to_string(cfg.models.size()) + ")");
    }
  };
  apply("init_cycle_hours", integer, [](SyntheticModel &m, long long v) { m.init_cycle_hours = static_cast<int>(v); });
  apply("max_lead_hours", integer, [](SyntheticModel &m, long long v) { m.max_lead_hours = static_cast<int>(v); });
  apply("ensemble_members", integer, [](SyntheticModel &m, long long v) { m.ensemble_members = static_cast<int>(v); });
  apply("bias_amplitude", number, [](SyntheticModel &m, double v) { m.bias_amplitude = v; });
  apply("noise_growth", number, [](SyntheticModel &m, double v) { m.noise_growth = v; });
  apply("noise_base", number, [](SyntheticModel &m, double v) { m.noise_base = v; });

  cfg.validate();
  return cfg;
}

namespace detail {

inline double round_centi(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace detail

/// Generates a single-site dataset: observations are a seasonal plus diurnal
/// sinusoid with an AR(1) residual; each model run forecasts observation plus a
/// lead-dependent bias and lead-dependent, temporally correlated noise.
inline Dataset synthesize_dataset(const SynthesisConfig &config, std::uint64_t seed) {
  config.validate();
  const std::int64_t hours = std::int64_t{24} * config.span_days;
  const Hour start = config.start;

  Dataset out;
  out.site_id = "synthetic";

  // Observations.
  RandomStream obs_rng = RandomStream::derived(seed, 0);
  const double phi = config.observation_ar;
  double residual = 0.0;
  std::vector<double> truth(static_cast<std::size_t>(hours));
  for (std::int64_t i = 0; i < hours; ++i) {
    const Hour t = start + i;
    const double day_of_year = std::fmod(static_cast<double>(t.value) / 24.0, 365.25);
    const double hour_of_day = static_cast<double>(((t.value % 24) + 24) % 24);
    residual = phi * residual + std::sqrt(1.0 - phi * phi) * 1.5 * obs_rng.normal();
    const double seasonal = 6.0 * std::sin(2.0 * std::numbers::pi * (day_of_year - 110.0) / 365.25);
    const double diurnal = 4.0 * std::sin(2.0 * std::numbers::pi * (hour_of_day - 9.0) / 24.0);
    truth[static_cast<std::size_t>(i)] = detail::round_centi(8.0 + seasonal + diurnal + residual);
    out.observations.push_back({t, truth[static_cast<std::size_t>(i)]});
  }

  // Weather signal no model captures: standard-normal AR(1) in valid time, shared by all runs.
  RandomStream common_rng = RandomStream::derived(seed, 1);
  const double rho = config.error_ar;
  std::vector<double> common(static_cast<std::size_t>(hours));
  double c = common_rng.normal();
  for (std::int64_t i = 0; i < hours; ++i) {
    if (i > 0) c = rho * c + std::sqrt(1.0 - rho * rho) * common_rng.normal();
    common[static_cast<std::size_t>(i)] = c;
  }

  const double shared = config.common_error_fraction;
  const double own = std::sqrt(1.0 - shared * shared);
  for (std::size_t m = 0; m < config.models.size(); ++m) {
    const auto &model = config.models[m];
    RandomStream rng = RandomStream::derived(seed, 2 + m);
    const bool is_ensemble = model.ensemble_members > 1;
    for (std::int64_t init = 0; init < hours; init += model.init_cycle_hours) {
      double run_noise = rng.normal();
      std::vector<double> member_noise(static_cast<std::size_t>(model.ensemble_members));
      for (auto &v : member_noise) v = rng.normal();
      for (int lead = 0; lead <= model.max_lead_hours && init + lead < hours; ++lead) {
        if (lead > 0) {
          run_noise = rho * run_noise + std::sqrt(1.0 - rho * rho) * rng.normal();
          for (auto &v : member_noise) v = rho * v + std::sqrt(1.0 - rho * rho) * rng.normal();
        }
        const auto idx = static_cast<std::size_t>(init + lead);
        const double sigma = model.noise_base + model.noise_growth * lead;
        const double bias = model.bias_amplitude * (0.25 + lead / 168.0);
        const double control = truth[idx] + bias + sigma * (shared * common[idx] + own * run_noise);
        for (int k = 0; k < model.ensemble_members; ++k) {
          ForecastRecord r;
          r.model_id = model.name;
          r.label = model.name;
          if (is_ensemble) r.member = k;
          r.init_time = start + init;
          r.valid_time = start + init + lead;
          const double spread = is_ensemble ? config.ensemble_spread * sigma * member_noise[static_cast<std::size_t>(k)] : 0.0;
          r.value = detail::round_centi(control + spread);
          out.forecasts.push_back(std::move(r));
        }
      }
    }
  }
  sort_forecasts(out.forecasts);
  return out;
}

}  // namespace qrfcast
