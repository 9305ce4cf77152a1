#include "railtalk/simulator.hpp"

#include <fstream>
#include <ostream>

#include "railtalk/numbers.hpp"
#include "railtalk/state_tags.hpp"

namespace railtalk {

namespace {

constexpr std::string_view kPersonaNames[] = {"cooperative", "over_answering", "restarting", "off_task",
                                              "oov_prone"};

const std::vector<std::string> kRealCities = {"milan", "rome",  "turin", "naples",  "florence", "venice",
                                              "bologna", "genoa", "bari", "palermo", "verona",  "pisa"};

std::string fill(const std::string& pattern, const std::string& value) {
  std::string out = pattern;
  const auto pos = out.find("{}");
  if (pos != std::string::npos) out.replace(pos, 2, value);
  return out;
}

std::string date_phrase(const Date& d, const Date& ref, Rng& rng, bool anchored) {
  using namespace std::chrono;
  const auto ahead = (sys_days{d} - sys_days{ref}).count();
  const std::string weekday(weekday_name(iso_weekday(d)));
  const std::string month(month_name(static_cast<unsigned>(d.month())));
  const std::string ordinal = *ordinal_word(static_cast<int>(static_cast<unsigned>(d.day())));
  std::vector<std::string> options;
  if (!anchored) {
    if (ahead >= 1 && ahead <= 7) return weekday;
    return month + " " + ordinal;
  }
  options = {"on " + month + " " + ordinal, "on the " + ordinal + " of " + month};
  if (ahead >= 1 && ahead <= 7) {
    options.push_back("on " + weekday);
    options.push_back("on " + weekday);
  }
  if (ahead == 1) options.push_back("tomorrow");
  return rng.pick(options);
}

std::string time_phrase(const std::string& value, Rng& rng, bool anchored) {
  if (auto t = parse_clock(value)) {
    const int h = *t / 60, m = *t % 60;
    std::string hour = *cardinal_word(h);
    if (m != 0) {
      const auto mw = cardinal_word(m);
      return (anchored ? "at " : "") + hour + " " + (mw ? *mw : "");
    }
    if (!anchored) return hour;
    const int h12 = h % 12 == 0 ? 12 : h % 12;
    std::vector<std::string> options = {"at " + hour, "around " + hour, "at " + hour + " oclock"};
    options.push_back("at " + *cardinal_word(h12) + (h < 12 ? " am" : " pm"));
    return rng.pick(options);
  }
  return anchored ? "in the " + value : value;
}

std::vector<std::string> words_of(const std::string& text) { return split_ws(text); }

}  // namespace

std::string Scenario::goal(Slot s) const {
  switch (s) {
    case Slot::departure: return departure;
    case Slot::arrival: return arrival;
    case Slot::date: return date;
    case Slot::time: return time;
  }
  return {};
}

std::vector<Scenario> parse_scenarios(std::istream& in, const std::string& source) {
  std::vector<Scenario> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    const auto f = split(line, '\t');
    if (f.size() != 6) throw LoadError(source, lineno, "expected 6 tab-separated fields");
    Scenario s{trim(f[0]), trim(f[1]), trim(f[2]), trim(f[3]), trim(f[4]), trim(f[5])};
    if (!parse_iso_date(s.date)) throw LoadError(source, lineno, "bad date '" + s.date + "'");
    if (!time_range_for(s.time) || s.time == kMainConnections) {
      throw LoadError(source, lineno, "bad time '" + s.time + "'");
    }
    if (s.departure == s.arrival) throw LoadError(source, lineno, "departure equals arrival");
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Scenario> load_scenarios(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), 0, "cannot open scenarios");
  return parse_scenarios(in, path.string());
}

std::string_view to_string(Persona p) { return kPersonaNames[static_cast<std::size_t>(p)]; }

std::optional<Persona> persona_from(std::string_view name) {
  for (Persona p : kPersonas) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

bool is_cooperative(Persona p) { return p != Persona::off_task; }

bool value_matches(Slot s, const std::string& acquired, const Scenario& goal) {
  const std::string want = goal.goal(s);
  if (acquired == want) return true;
  if (s == Slot::time) {
    if (auto t = parse_clock(want)) return acquired == daypart_of(*t);
  }
  return false;
}

std::string phrase_for(Slot s, const Scenario& sc, const Date& session_date, Rng& rng, bool anchored) {
  switch (s) {
    case Slot::departure:
      if (!anchored) return sc.departure;
      return fill(rng.pick(std::vector<std::string>{"from {}", "from {}", "i want to leave from {}", "leaving from {}",
                                                    "departing from {}"}),
                  sc.departure);
    case Slot::arrival:
      if (!anchored) return sc.arrival;
      return fill(rng.pick(std::vector<std::string>{"to {}", "to {}", "i am going to {}", "i want to go to {}",
                                                    "arriving in {}"}),
                  sc.arrival);
    case Slot::date: {
      const auto d = parse_iso_date(sc.date);
      return d ? date_phrase(*d, session_date, rng, anchored) : sc.date;
    }
    case Slot::time: return time_phrase(sc.time, rng, anchored);
  }
  return {};
}

UserTurn simulate_user(Persona persona, const Scenario& sc, const DialogueAct& act, const Lexicon& lexicon,
                       const Date& session_date, Rng& rng) {
  UserTurn turn;
  if (act.type == ActType::answer || act.type == ActType::reject || act.type == ActType::close) {
    turn.ends_call = true;
    return turn;
  }
  if (persona == Persona::off_task) {
    static const std::vector<std::string> lines = {"what is the weather like", "i would like a coffee",
                                                   "how much is the ticket", "my name is smith",
                                                   "well i need a coffee please"};
    turn.text = rng.pick(lines);
    return turn;
  }

  std::optional<Slot> wrong;
  for (Slot s : act.referenced_slots) {
    const auto it = act.values.find(s);
    if (it != act.values.end() && !value_matches(s, it->second, sc)) {
      wrong = s;
      break;
    }
  }
  if (act.type == ActType::explicit_confirm) {
    if (!wrong) {
      turn.text = rng.pick(std::vector<std::string>{"yes", "yes that is right", "correct", "yeah", "yes please"});
    } else {
      turn.text = "no " + phrase_for(*wrong, sc, session_date, rng, true);
    }
  } else if (wrong && act.type == ActType::implicit_confirm_and_prompt) {
    turn.text = "no " + phrase_for(*wrong, sc, session_date, rng, true);
  } else if (act.asks) {
    const Slot s = *act.asks;
    if (act.isolated) {
      turn.text = sc.goal(s);
    } else if (persona == Persona::over_answering && s == Slot::departure && act.type == ActType::prompt) {
      turn.text = phrase_for(Slot::departure, sc, session_date, rng) + " " +
                  phrase_for(Slot::arrival, sc, session_date, rng) + " " +
                  phrase_for(Slot::date, sc, session_date, rng);
    } else {
      turn.text = phrase_for(s, sc, session_date, rng);
    }
  } else {
    turn.text = "yes";
  }

  if (persona == Persona::restarting && rng.chance(0.6)) {
    auto w = words_of(turn.text);
    w.insert(w.begin(), w.front());
    turn.text = join(w, " ");
    turn.phenomena.push_back("restart");
  }
  if (persona == Persona::oov_prone && rng.chance(0.6)) {
    std::vector<std::string> fillers;
    for (const char* f : {"uhm", "erm", "hmm", "mhm"}) {
      if (!lexicon.contains(f)) fillers.push_back(f);
    }
    if (!fillers.empty()) {
      auto w = words_of(turn.text);
      w.insert(w.begin() + static_cast<std::ptrdiff_t>(rng.below(w.size() + 1)), rng.pick(fillers));
      turn.text = join(w, " ");
      turn.phenomena.push_back("oov");
    }
  }
  return turn;
}

TaggedCorpus generate_training_corpus(const Lexicon& lexicon, const Date& session_date, std::size_t per_tag,
                                      std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> all_cities;
  for (ClassId c : lexicon.classes_with_tag("city")) {
    for (const auto& m : lexicon.word_class(c).members) all_cities.push_back(m);
  }
  std::vector<std::string> stations;
  for (ClassId c : lexicon.classes_with_tag("station")) {
    for (const auto& m : lexicon.word_class(c).members) stations.push_back(m);
  }
  auto city = [&]() {
    if (all_cities.empty() || rng.chance(0.7)) return rng.pick(kRealCities);
    return rng.pick(all_cities);
  };
  auto random_goal = [&]() {
    Scenario sc;
    sc.departure = city();
    do {
      sc.arrival = city();
    } while (sc.arrival == sc.departure);
    sc.date = format_iso_date(add_days(session_date, 1 + static_cast<int>(rng.below(7))));
    if (rng.chance(0.7)) {
      sc.time = format_clock(60 * static_cast<int>(5 + rng.below(18)));
    } else {
      static const std::vector<std::string> parts = {"morning", "afternoon", "evening", "night"};
      sc.time = rng.pick(parts);
    }
    return sc;
  };
  auto with_station = [&](std::string text, const std::string& c) {
    if (stations.empty() || !rng.chance(0.15)) return text;
    for (const auto& s : stations) {
      if (s.rfind(c + " ", 0) == 0) {
        const auto pos = text.rfind(c);
        return text.replace(pos, c.size(), s);
      }
    }
    return text;
  };

  TaggedCorpus corpus;
  for (std::string_view tag : kStateTags) {
    for (std::size_t i = 0; i < per_tag; ++i) {
      const Scenario sc = random_goal();
      std::string text;
      const double u = rng.uniform();
      if (tag == "ask_departure") {
        if (u < 0.6) {
          text = with_station(phrase_for(Slot::departure, sc, session_date, rng), sc.departure);
        } else if (u < 0.85) {
          text = phrase_for(Slot::departure, sc, session_date, rng) + " " +
                 phrase_for(Slot::arrival, sc, session_date, rng) + " " + phrase_for(Slot::date, sc, session_date, rng);
        } else {
          text = sc.departure;
        }
      } else if (tag == "ask_arrival") {
        if (u < 0.8) {
          text = with_station(phrase_for(Slot::arrival, sc, session_date, rng), sc.arrival);
        } else if (u < 0.9) {
          text = sc.arrival;
        } else {
          text = "no " + phrase_for(Slot::departure, sc, session_date, rng);
        }
      } else if (tag == "ask_date") {
        if (u < 0.9) {
          text = phrase_for(Slot::date, sc, session_date, rng, u < 0.75);
        } else {
          text = "no " + phrase_for(Slot::arrival, sc, session_date, rng);
        }
      } else if (tag == "ask_time") {
        if (u < 0.9) {
          text = phrase_for(Slot::time, sc, session_date, rng, u < 0.8);
        } else {
          text = "no " + phrase_for(Slot::date, sc, session_date, rng);
        }
      } else if (tag == "confirm_slot") {
        if (u < 0.6) {
          text = rng.pick(std::vector<std::string>{"yes", "yes that is right", "correct", "yeah", "yes please"});
        } else {
          const Slot s = kSlots[rng.below(kSlots.size())];
          text = "no " + phrase_for(s, sc, session_date, rng);
        }
      } else {
        text = rng.pick(std::vector<std::string>{"thank you", "thanks goodbye", "goodbye", "no thank you",
                                                 "thank you goodbye", "ok thanks"});
      }
      corpus.push_back({std::string(tag), tokenize(text, lexicon)});
    }
  }
  return corpus;
}

void write_tagged_corpus(std::ostream& out, const TaggedCorpus& corpus) {
  for (const auto& s : corpus) out << s.tag << '\t' << detokenize(s.tokens) << '\n';
}

}  // namespace railtalk
