#pragma once

#include <charconv>
#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

#include "qrfcast/errors.hpp"

namespace qrfcast {

/// A UTC timestamp aligned to a whole hour, stored as hours since the Unix epoch.
struct Hour {
  std::int64_t value = 0;

  constexpr auto operator<=>(const Hour &) const = default;

  constexpr Hour operator+(std::int64_t hours) const { return Hour{value + hours}; }
  constexpr Hour operator-(std::int64_t hours) const { return Hour{value - hours}; }
  constexpr std::int64_t operator-(Hour other) const { return value - other.value; }
};

namespace detail {

inline int parse_int(std::string_view text, std::string_view what) {
  int out = 0;
  const auto *end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw DataError("invalid " + std::string(what) + " in timestamp");
  }
  return out;
}

}  // namespace detail

/// Parses "YYYY-MM-DDTHH:MMZ" or "YYYY-MM-DDTHH:MM:SSZ". Minutes and seconds must be zero.
inline Hour parse_hour(std::string_view text) {
  using namespace std::chrono;
  if (!text.empty() && (text.back() == 'Z' || text.back() == 'z')) {
    text.remove_suffix(1);
  } else {
    throw DataError("timestamp '" + std::string(text) + "' is not UTC (missing 'Z')");
  }
  if (text.size() != 16 && text.size() != 19) {
    throw DataError("malformed timestamp '" + std::string(text) + "Z'");
  }
  if (text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') || text[13] != ':' ||
      (text.size() == 19 && text[16] != ':')) {
    throw DataError("malformed timestamp '" + std::string(text) + "Z'");
  }
  const int y = detail::parse_int(text.substr(0, 4), "year");
  const int mo = detail::parse_int(text.substr(5, 2), "month");
  const int d = detail::parse_int(text.substr(8, 2), "day");
  const int h = detail::parse_int(text.substr(11, 2), "hour");
  const int mi = detail::parse_int(text.substr(14, 2), "minute");
  const int s = text.size() == 19 ? detail::parse_int(text.substr(17, 2), "second") : 0;

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 59) {
    throw DataError("timestamp '" + std::string(text) + "Z' is out of range");
  }
  if (mi != 0 || s != 0) {
    throw DataError("timestamp '" + std::string(text) + "Z' is not hour-aligned");
  }
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return Hour{static_cast<std::int64_t>(days) * 24 + h};
}

inline std::string format_hour(Hour t) {
  using namespace std::chrono;
  std::int64_t days = t.value / 24;
  std::int64_t h = t.value % 24;
  if (h < 0) {
    h += 24;
    days -= 1;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:00Z", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(h));
  return buf;
}

}  // namespace qrfcast
