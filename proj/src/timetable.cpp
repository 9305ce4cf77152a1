#include "railtalk/timetable.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace railtalk {

Timetable Timetable::load(const std::filesystem::path& path, const Lexicon* lexicon) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), 0, "cannot open timetable file");
  return parse(in, lexicon, path.string());
}

Timetable Timetable::parse(std::istream& in, const Lexicon* lexicon, const std::string& source) {
  Timetable tt;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string row = trim(line);
    if (row.empty() || row[0] == '#') continue;
    const auto f = split(row, ',');
    if (f.size() != 6) throw LoadError(source, lineno, "expected 6 comma-separated fields");
    Connection c;
    c.departure = lowercase(trim(f[0]));
    c.arrival = lowercase(trim(f[1]));
    if (c.departure.empty() || c.arrival.empty()) throw LoadError(source, lineno, "empty city");
    if (c.departure == c.arrival) throw LoadError(source, lineno, "departure equals arrival");
    if (lexicon) {
      for (const auto* city : {&c.departure, &c.arrival}) {
        if (lexicon->tag_of(*city) != "city") throw LoadError(source, lineno, "unknown city '" + *city + "'");
      }
    }
    const auto dep = parse_clock(trim(f[2]));
    const auto arr = parse_clock(trim(f[3]));
    if (!dep || !arr) throw LoadError(source, lineno, "malformed clock time");
    c.departs = *dep;
    c.arrives = *arr;
    const std::string days = trim(f[4]);
    if (days.empty()) throw LoadError(source, lineno, "no service days");
    for (char d : days) {
      if (d < '1' || d > '7') throw LoadError(source, lineno, "service days must be digits 1-7");
      c.days |= 1u << static_cast<unsigned>(d - '0');
    }
    const std::string flag = trim(f[5]);
    if (flag != "0" && flag != "1") throw LoadError(source, lineno, "main flag must be 0 or 1");
    c.main = flag == "1";
    tt.cities_.insert(c.departure);
    tt.cities_.insert(c.arrival);
    tt.connections_.push_back(std::move(c));
  }
  return tt;
}

std::vector<Connection> Timetable::query(const QueryParameters& params) const {
  const auto range = time_range_for(params.time);
  if (!range) throw std::invalid_argument("unknown time value '" + params.time + "'");
  if (!params.date.ok()) throw std::invalid_argument("invalid query date");
  const unsigned wd = iso_weekday(params.date);
  std::vector<Connection> out;
  for (const auto& c : connections_) {
    if (c.departure != params.departure || c.arrival != params.arrival || !c.runs_on(wd)) continue;
    if (range->main_only ? !c.main : !range->contains(c.departs)) continue;
    out.push_back(c);
  }
  std::stable_sort(out.begin(), out.end(), [](const Connection& a, const Connection& b) { return a.departs < b.departs; });
  return out;
}

std::string describe(const Connection& c) {
  return format_clock(c.departs) + " from " + c.departure + " arriving in " + c.arrival + " at " + format_clock(c.arrives);
}

}  // namespace railtalk
