#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace railtalk {

using Date = std::chrono::year_month_day;

std::optional<Date> parse_iso_date(std::string_view text);
std::string format_iso_date(const Date& d);
Date add_days(const Date& d, int days);
/// 1 = Monday ... 7 = Sunday.
unsigned iso_weekday(const Date& d);

/// Minutes after midnight from "HH:MM".
std::optional<int> parse_clock(std::string_view text);
std::string format_clock(int minutes);

/// Departure-time window used to filter connections. `main_only` is the
/// whole-day "main connections of the day" marker.
struct TimeRange {
  int from = 0;        // inclusive, minutes
  int to = 24 * 60;    // exclusive, minutes
  bool main_only = false;

  bool contains(int minutes) const { return minutes >= from && minutes < to; }
  bool operator==(const TimeRange&) const = default;
};

/// Normalized time values: "HH:MM" (a two-hour window starting there),
/// a part of day ("morning", "afternoon", "evening", "night"), or
/// kMainConnections.
inline constexpr std::string_view kMainConnections = "main-connections";

std::optional<TimeRange> time_range_for(std::string_view value);

/// Part of day containing a clock time.
std::string_view daypart_of(int minutes);

}  // namespace railtalk
