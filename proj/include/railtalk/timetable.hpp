#pragma once

#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "railtalk/calendar.hpp"
#include "railtalk/common.hpp"
#include "railtalk/lexicon.hpp"

namespace railtalk {

struct Connection {
  std::string departure;
  std::string arrival;
  int departs = 0;  // minutes after midnight
  int arrives = 0;
  unsigned days = 0;  // bit d set = runs on ISO weekday d (1..7)
  bool main = false;

  bool runs_on(unsigned iso_weekday) const { return (days >> iso_weekday) & 1u; }
  bool operator==(const Connection&) const = default;
};

/// Parameters of a database access. `time` holds a normalized time value
/// (see time_range_for); `relaxed` names the slots filled by defaults.
struct QueryParameters {
  std::string departure;
  std::string arrival;
  Date date;
  std::string time;
  std::set<std::string> relaxed;
};

/// Train connections, immutable after load.
///
/// File format: `dep_city,arr_city,dep_time,arr_time,days,main_flag` with
/// HH:MM times, days as ISO weekday digits ("12345" = Monday to Friday) and
/// main_flag 0 or 1. `#` starts a comment line.
class Timetable {
public:
  Timetable() = default;

  /// Cities are checked against the lexicon's city class when given.
  static Timetable load(const std::filesystem::path& path, const Lexicon* lexicon = nullptr);
  static Timetable parse(std::istream& in, const Lexicon* lexicon = nullptr, const std::string& source = "<timetable>");

  const std::vector<Connection>& connections() const { return connections_; }
  std::size_t size() const { return connections_.size(); }
  const std::set<std::string>& cities() const { return cities_; }

  /// Connections for the city pair running on the date, filtered by the
  /// time range, ordered by departure time (file order among equals).
  std::vector<Connection> query(const QueryParameters& params) const;

private:
  std::vector<Connection> connections_;
  std::set<std::string> cities_;
};

std::string describe(const Connection& c);

}  // namespace railtalk
