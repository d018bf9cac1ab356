#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "qrfcast/errors.hpp"
#include "qrfcast/ingest.hpp"
#include "qrfcast/quantile_vector.hpp"
#include "qrfcast/text.hpp"

namespace qrfcast {

/// Observed forecast error (observation minus forecast) with its covariates.
struct ErrorSample {
  int lead_hours = 0;
  std::string model_label;
  double error = 0.0;

  bool operator==(const ErrorSample &) const = default;
};

struct ErrorTable {
  std::vector<ErrorSample> rows;
  std::vector<std::string> label_set;  // sorted, distinct
  std::size_t skipped_unmatched = 0;   // forecasts without a matching observation

  bool empty() const { return rows.empty(); }

  void rebuild_label_set() {
    std::set<std::string> labels;
    for (const auto &r : rows) labels.insert(r.model_label);
    label_set.assign(labels.begin(), labels.end());
  }
};

struct ProbabilisticForecast {
  std::string model_label;
  Hour valid_time;
  int lead_hours = 0;
  QuantileVector quantiles;
};

/// Relabels exchangeable ensemble members by their rank within each
/// (model_id, init_time, valid_time) group: model_id + "_r" + k, k = 1 for the
/// smallest value. Ties keep member index order. Records without a member index
/// keep their model_id as label. Output order matches input order.
inline std::vector<ForecastRecord> rank_label_members(std::vector<ForecastRecord> records) {
  using Key = std::tuple<std::string, Hour, Hour>;
  std::map<Key, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto &r = records[i];
    if (!r.member) {
      r.label = r.model_id;
      continue;
    }
    groups[Key{r.model_id, r.init_time, r.valid_time}].push_back(i);
  }
  for (auto &[key, idx] : groups) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (records[a].value != records[b].value) return records[a].value < records[b].value;
      return *records[a].member < *records[b].member;
    });
    for (std::size_t rank = 0; rank < idx.size(); ++rank) {
      auto &r = records[idx[rank]];
      r.label = r.model_id + "_r" + std::to_string(rank + 1);
    }
  }
  return records;
}

/// One row per forecast with a matching observation: error = observation - forecast.
/// Expects rank labels to be in place already.
inline ErrorTable build_error_table(const Dataset &train) {
  ErrorTable table;
  table.rows.reserve(train.forecasts.size());
  for (const auto &f : train.forecasts) {
    const auto y = train.observation_at(f.valid_time);
    if (!y) {
      ++table.skipped_unmatched;
      continue;
    }
    table.rows.push_back({f.lead_hours(), f.model_label(), *y - f.value});
  }
  if (table.rows.empty()) throw DataError("no forecast in the training window has a matching observation");
  table.rebuild_label_set();
  return table;
}

/// Shifts error quantiles by the deterministic forecast value, level by level.
inline ProbabilisticForecast to_probabilistic(const ForecastRecord &forecast, const QuantileVector &error_quantiles) {
  error_quantiles.validate();
  ProbabilisticForecast out{forecast.model_label(), forecast.valid_time, forecast.lead_hours(), error_quantiles};
  for (auto &v : out.quantiles.values) v += forecast.value;
  return out;
}

inline void write_error_table(std::ostream &out, const ErrorTable &table) {
  out << "lead_hours,model_label,error_degC\n";
  for (const auto &r : table.rows) {
    out << r.lead_hours << ',' << r.model_label << ',' << text::format_double(r.error) << '\n';
  }
}

}  // namespace qrfcast
