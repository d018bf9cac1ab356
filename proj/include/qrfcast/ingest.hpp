#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "qrfcast/errors.hpp"
#include "qrfcast/text.hpp"
#include "qrfcast/time.hpp"

namespace qrfcast {

inline constexpr int kMaxLeadHours = 168;

/// One deterministic forecast value for one model/member/init-time/valid-time.
///
/// `label` is the covariate the error model sees. It equals `model_id` on load and
/// becomes `model_id + "_r" + rank` for ensemble members after rank labelling.
struct ForecastRecord {
  std::string model_id;
  std::optional<int> member;
  Hour init_time;
  Hour valid_time;
  double value = 0.0;
  std::string label;

  int lead_hours() const { return static_cast<int>(valid_time - init_time); }
  const std::string &model_label() const { return label.empty() ? model_id : label; }

  bool operator==(const ForecastRecord &) const = default;
};

struct ObservationRecord {
  Hour valid_time;
  double value = 0.0;

  bool operator==(const ObservationRecord &) const = default;
};

struct ScenarioWindow {
  Hour forecast_origin;
  int train_days = 14;
  int horizon_hours = kMaxLeadHours;

  Hour train_begin() const { return forecast_origin - std::int64_t{24} * train_days; }
  Hour horizon_end() const { return forecast_origin + horizon_hours; }
};

struct Dataset {
  std::vector<ForecastRecord> forecasts;
  std::vector<ObservationRecord> observations;
  std::string site_id = "site";

  /// Observation value at `t`, if present. Requires observations sorted by time.
  std::optional<double> observation_at(Hour t) const {
    auto it = std::lower_bound(observations.begin(), observations.end(), t,
                               [](const ObservationRecord &o, Hour h) { return o.valid_time < h; });
    if (it == observations.end() || it->valid_time != t) return std::nullopt;
    return it->value;
  }
};

struct ScenarioSlice {
  Dataset train;
  Dataset eval;
};

inline bool forecast_order(const ForecastRecord &a, const ForecastRecord &b) {
  return std::tie(a.model_id, a.member, a.init_time, a.valid_time) <
         std::tie(b.model_id, b.member, b.init_time, b.valid_time);
}

inline void sort_forecasts(std::vector<ForecastRecord> &records) {
  std::stable_sort(records.begin(), records.end(), forecast_order);
}

inline void sort_observations(std::vector<ObservationRecord> &records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const ObservationRecord &a, const ObservationRecord &b) { return a.valid_time < b.valid_time; });
}

namespace detail {

[[noreturn]] inline void fail_row(const std::string &path, int line_no, const std::string &why) {
  throw DataError(path + ":" + std::to_string(line_no) + ": " + why);
}

inline std::ifstream open_csv(const std::string &path, std::string_view expected_header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string header;
  if (!std::getline(in, header) || text::trim(header) != expected_header) {
    throw DataError(path + ":1: expected header '" + std::string(expected_header) + "'");
  }
  return in;
}

}  // namespace detail

inline ForecastRecord parse_forecast_row(std::string_view line, const std::string &path, int line_no) {
  const auto fields = text::split(text::trim(line), ',');
  if (fields.size() != 5) detail::fail_row(path, line_no, "expected 5 fields");
  ForecastRecord r;
  r.model_id = std::string(text::trim(fields[0]));
  if (r.model_id.empty()) detail::fail_row(path, line_no, "empty model_id");
  if (!text::trim(fields[1]).empty()) {
    const auto m = text::parse_int(fields[1]);
    if (!m || *m < 0) detail::fail_row(path, line_no, "member must be a non-negative integer");
    r.member = static_cast<int>(*m);
  }
  try {
    r.init_time = parse_hour(text::trim(fields[2]));
    r.valid_time = parse_hour(text::trim(fields[3]));
  } catch (const DataError &e) {
    detail::fail_row(path, line_no, e.what());
  }
  const auto v = text::parse_double(fields[4]);
  if (!v || !std::isfinite(*v)) detail::fail_row(path, line_no, "value is not a finite number");
  r.value = *v;
  if (r.valid_time < r.init_time) detail::fail_row(path, line_no, "negative lead time");
  if (r.lead_hours() > kMaxLeadHours) {
    detail::fail_row(path, line_no, "lead time " + std::to_string(r.lead_hours()) + "h outside [0,168]");
  }
  r.label = r.model_id;
  return r;
}

/// Loads forecasts.csv. Any bad row fails the whole load; result is sorted by
/// (model_id, member, init_time, valid_time).
inline std::vector<ForecastRecord> load_forecasts(const std::string &path) {
  auto in = detail::open_csv(path, "model_id,member,init_time,valid_time,value_degC");
  std::vector<ForecastRecord> out;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    out.push_back(parse_forecast_row(line, path, line_no));
  }
  sort_forecasts(out);
  return out;
}

inline std::vector<ObservationRecord> load_observations(const std::string &path) {
  auto in = detail::open_csv(path, "valid_time,value_degC");
  std::vector<ObservationRecord> out;
  std::map<Hour, int> seen;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(text::trim(line), ',');
    if (fields.size() != 2) detail::fail_row(path, line_no, "expected 2 fields");
    ObservationRecord r;
    try {
      r.valid_time = parse_hour(text::trim(fields[0]));
    } catch (const DataError &e) {
      detail::fail_row(path, line_no, e.what());
    }
    const auto v = text::parse_double(fields[1]);
    if (!v || !std::isfinite(*v)) detail::fail_row(path, line_no, "value is not a finite number");
    r.value = *v;
    if (auto [it, inserted] = seen.emplace(r.valid_time, line_no); !inserted) {
      detail::fail_row(path, line_no,
                       "duplicate observation at " + format_hour(r.valid_time) + " (first on line " +
                           std::to_string(it->second) + ")");
    }
    out.push_back(r);
  }
  sort_observations(out);
  return out;
}

inline void write_forecasts(std::ostream &out, const std::vector<ForecastRecord> &records) {
  out << "model_id,member,init_time,valid_time,value_degC\n";
  for (const auto &r : records) {
    out << r.model_id << ',';
    if (r.member) out << *r.member;
    out << ',' << format_hour(r.init_time) << ',' << format_hour(r.valid_time) << ','
        << text::format_double(r.value) << '\n';
  }
}

inline void write_observations(std::ostream &out, const std::vector<ObservationRecord> &records) {
  out << "valid_time,value_degC\n";
  for (const auto &r : records) {
    out << format_hour(r.valid_time) << ',' << text::format_double(r.value) << '\n';
  }
}

/// Time span [first, last] covered by observations and forecast valid times.
inline std::optional<std::pair<Hour, Hour>> dataset_span(const Dataset &data) {
  std::optional<std::pair<Hour, Hour>> span;
  auto extend = [&span](Hour t) {
    if (!span) {
      span = std::pair{t, t};
    } else {
      span->first = std::min(span->first, t);
      span->second = std::max(span->second, t);
    }
  };
  for (const auto &o : data.observations) extend(o.valid_time);
  for (const auto &f : data.forecasts) extend(f.valid_time);
  return span;
}

/// Latest init_time <= origin for every model_id.
inline std::map<std::string, Hour> current_runs(const std::vector<ForecastRecord> &forecasts, Hour origin) {
  std::map<std::string, Hour> latest;
  for (const auto &f : forecasts) {
    if (f.init_time > origin) continue;
    auto [it, inserted] = latest.emplace(f.model_id, f.init_time);
    if (!inserted && it->second < f.init_time) it->second = f.init_time;
  }
  return latest;
}

/// Splits a dataset into a training window strictly before the origin and an
/// evaluation window holding each model's current run and the later observations.
inline ScenarioSlice slice_scenario(const Dataset &data, const ScenarioWindow &window) {
  if (window.train_days <= 0 || window.horizon_hours <= 0) {
    throw ConfigError("train_days and horizon_hours must be positive");
  }
  const Hour origin = window.forecast_origin;
  const Hour begin = window.train_begin();
  const Hour end = window.horizon_end();
  const auto span = dataset_span(data);
  if (!span || span->first > begin || span->second < end) {
    throw DataError("dataset does not cover scenario window [" + format_hour(begin) + ", " + format_hour(end) + "]");
  }

  ScenarioSlice out;
  out.train.site_id = data.site_id;
  out.eval.site_id = data.site_id;

  const auto latest = current_runs(data.forecasts, origin);
  for (const auto &f : data.forecasts) {
    if (f.valid_time >= begin && f.valid_time < origin && f.init_time < origin) {
      out.train.forecasts.push_back(f);
    }
    if (f.valid_time >= origin && f.valid_time <= end) {
      auto it = latest.find(f.model_id);
      if (it != latest.end() && it->second == f.init_time) out.eval.forecasts.push_back(f);
    }
  }
  for (const auto &o : data.observations) {
    if (o.valid_time >= begin && o.valid_time < origin) out.train.observations.push_back(o);
    if (o.valid_time >= origin && o.valid_time <= end) out.eval.observations.push_back(o);
  }
  return out;
}

}  // namespace qrfcast
