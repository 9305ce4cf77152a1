#include "railtalk/calendar.hpp"

#include <cstdio>

namespace railtalk {

using namespace std::chrono;

std::optional<Date> parse_iso_date(std::string_view text) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  const std::string s(text);
  if (s.size() != 10 || std::sscanf(s.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) return std::nullopt;
  const Date date{year{y}, month{m}, day{d}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_iso_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

Date add_days(const Date& d, int n) { return Date{sys_days{d} + days{n}}; }

unsigned iso_weekday(const Date& d) { return weekday{sys_days{d}}.iso_encoding(); }

std::optional<int> parse_clock(std::string_view text) {
  if (text.size() != 5 || text[2] != ':') return std::nullopt;
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!digit(text[0]) || !digit(text[1]) || !digit(text[3]) || !digit(text[4])) return std::nullopt;
  const int h = (text[0] - '0') * 10 + (text[1] - '0');
  const int m = (text[3] - '0') * 10 + (text[4] - '0');
  if (h > 23 || m > 59) return std::nullopt;
  return h * 60 + m;
}

std::string format_clock(int minutes) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d:%02d", minutes / 60, minutes % 60);
  return buf;
}

std::optional<TimeRange> time_range_for(std::string_view value) {
  if (value == kMainConnections) return TimeRange{0, 24 * 60, true};
  if (value == "morning") return TimeRange{0, 12 * 60, false};
  if (value == "afternoon") return TimeRange{12 * 60, 18 * 60, false};
  if (value == "evening") return TimeRange{18 * 60, 22 * 60, false};
  if (value == "night") return TimeRange{22 * 60, 24 * 60, false};
  if (auto t = parse_clock(value)) return TimeRange{*t, std::min(*t + 120, 24 * 60), false};
  return std::nullopt;
}

std::string_view daypart_of(int minutes) {
  if (minutes < 12 * 60) return "morning";
  if (minutes < 18 * 60) return "afternoon";
  if (minutes < 22 * 60) return "evening";
  return "night";
}

}  // namespace railtalk
