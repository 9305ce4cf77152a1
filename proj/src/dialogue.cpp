#include "railtalk/dialogue.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "railtalk/numbers.hpp"
#include "railtalk/state_tags.hpp"

namespace railtalk {

namespace {

constexpr std::string_view kSlotNames[] = {"departure", "arrival", "date", "time"};

template <class T>
bool contains(const std::vector<T>& v, const T& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

const std::vector<ConceptKind>& all_kinds() {
  static const std::vector<ConceptKind> kinds = {
      ConceptKind::departure_city, ConceptKind::arrival_city, ConceptKind::unanchored_city,
      ConceptKind::date,           ConceptKind::time,         ConceptKind::confirmation,
      ConceptKind::negation,       ConceptKind::correction,
  };
  return kinds;
}

bool is_city(Slot s) { return s == Slot::departure || s == Slot::arrival; }

Expectation ask_expectation(Slot s, bool isolated) {
  Expectation e;
  e.state_tag = "ask_" + std::string(to_string(s));
  e.isolated = isolated;
  if (isolated) {
    e.strength = Expectation::Strength::strict;
    e.expected_kinds = {kind_of(s), ConceptKind::unanchored_city};
    e.predicted_classes = {"city", "station"};
  } else {
    e.expected_kinds = all_kinds();
    e.predicted_classes = predicted_classes_for(s);
  }
  return e;
}

Expectation confirm_expectation() {
  Expectation e;
  e.state_tag = "confirm_slot";
  e.expected_kinds = all_kinds();
  e.predicted_classes = {"affirm", "negate"};
  return e;
}

Expectation closing_expectation() {
  Expectation e;
  e.state_tag = "post_answer";
  e.expected_kinds = all_kinds();
  e.predicted_classes = {"affirm", "negate"};
  return e;
}

std::string question(Slot s) {
  switch (s) {
    case Slot::departure: return "Where are you leaving from?";
    case Slot::arrival: return "Where are you going to?";
    case Slot::date: return "On which day do you want to travel?";
    case Slot::time: return "At what time do you want to leave?";
  }
  return "";
}

std::string short_question(Slot s) {
  switch (s) {
    case Slot::departure: return "Which city are you leaving from?";
    case Slot::arrival: return "Which city are you travelling to?";
    case Slot::date: return "Please tell me the day of travel.";
    case Slot::time: return "Please tell me the departure time.";
  }
  return "";
}

std::string capitalized(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string present(const DialogueState& st, const std::vector<Slot>& slots) {
  std::vector<std::string> parts;
  for (Slot s : slots) parts.push_back(render_value(s, st.slot(s).value));
  return join(parts, " ");
}

std::map<Slot, std::string> values_of(const DialogueState& st, const std::vector<Slot>& slots) {
  std::map<Slot, std::string> out;
  for (Slot s : slots) out[s] = st.slot(s).value;
  return out;
}

DialogueAct finish(DialogueState& st, DialogueAct act, Expectation e) {
  st.expectation = std::move(e);
  st.last_act = act;
  return act;
}

DialogueAct fail(DialogueState& st, const std::string& why) {
  st.outcome = Outcome::SF;
  st.phase = Phase::closing;
  st.pending.clear();
  st.confirm_targets.clear();
  DialogueAct act;
  act.type = ActType::close;
  act.text = "Sorry, " + why + ". I cannot help you with this request. Goodbye.";
  return finish(st, act, closing_expectation());
}

DialogueAct explicit_confirm(DialogueState& st, std::vector<Slot> targets, const std::string& preface = "") {
  st.phase = Phase::confirming;
  st.focus = targets.front();
  st.pending.clear();
  st.confirm_targets = targets;
  DialogueAct act;
  act.type = ActType::explicit_confirm;
  act.referenced_slots = targets;
  act.values = values_of(st, targets);
  std::vector<std::string> contrasts;
  for (Slot s : targets) {
    if (!st.slot(s).displaced.empty()) {
      contrasts.push_back("Earlier I understood " + render_value(s, st.slot(s).displaced) + ", now " +
                          render_value(s, st.slot(s).value) + ".");
    }
  }
  act.text = preface + (contrasts.empty() ? "" : join(contrasts, " ") + " ") + "Did I understand correctly: " +
             present(st, targets) + "?";
  return finish(st, act, confirm_expectation());
}

bool ready_to_query(const DialogueState& st) {
  return std::all_of(kSlots.begin(), kSlots.end(), [&](Slot s) { return st.slot(s).resolved(); });
}

DialogueAct decide(DialogueState& st, const StrategyConfig& config, const Timetable* timetable,
                   const std::string& preface = "") {
  if (ready_to_query(st)) {
    st.phase = Phase::querying;
    DialogueAct act = build_query_and_answer(st, timetable, config);
    act.text = preface + act.text;
    st.last_act = act;
    return act;
  }
  if (st.turns >= config.max_turns) return fail(st, "we ran out of time");

  std::vector<Slot> explicit_targets, hypotheses;
  for (Slot s : config.parameter_order) {
    const auto& ss = st.slot(s);
    if (ss.status != SlotStatus::hypothesized) continue;
    hypotheses.push_back(s);
    if (ss.needs_explicit || !ss.displaced.empty()) explicit_targets.push_back(s);
  }
  if (!explicit_targets.empty()) return explicit_confirm(st, explicit_targets, preface);

  for (Slot s : config.parameter_order) {
    const auto& ss = st.slot(s);
    if (ss.status != SlotStatus::empty || ss.relaxed) continue;
    st.phase = Phase::acquiring;
    st.focus = s;
    st.confirm_targets.clear();
    st.pending = hypotheses;
    DialogueAct act;
    act.asks = s;
    if (hypotheses.empty()) {
      act.type = ActType::prompt;
      act.text = preface + question(s);
    } else {
      act.type = ActType::implicit_confirm_and_prompt;
      act.referenced_slots = hypotheses;
      act.values = values_of(st, hypotheses);
      act.text = preface + capitalized(present(st, hypotheses)) + ". " + question(s);
    }
    return finish(st, act, ask_expectation(s, false));
  }
  // Everything filled; whatever is still a hypothesis gets one explicit check.
  return explicit_confirm(st, hypotheses, preface);
}

std::string relax_text(Slot s) {
  if (s == Slot::date) return "I could not get the date, so I will look for tomorrow. ";
  return "I could not get the time, so I will look for the main connections of the day. ";
}

DialogueAct repair(DialogueState& st, const StrategyConfig& config, const Timetable* timetable) {
  const Slot s = st.focus;
  const auto i = static_cast<std::size_t>(s);
  ++st.failure_counters[i];
  ++st.repair_attempts[i];

  if (is_optional(s) && st.repair_attempts[i] >= config.optional_repair_budget) {
    SlotState& ss = st.slot(s);
    ss = SlotState{};
    ss.relaxed = true;
    st.isolated = false;
    std::erase(st.confirm_targets, s);
    std::erase(st.pending, s);
    DialogueAct act = decide(st, config, timetable, relax_text(s));
    if (act.type != ActType::answer && act.type != ActType::reject && act.type != ActType::close) {
      act.type = ActType::relax_notice;
      st.last_act = act;
    }
    return act;
  }
  if (!is_optional(s) && st.repair_attempts[i] >= config.required_repair_budget) {
    return fail(st, "I could not understand the " + std::string(to_string(s)) + " city");
  }
  if (st.turns >= config.max_turns) return fail(st, "we ran out of time");

  if (st.phase == Phase::confirming && !st.confirm_targets.empty()) {
    return explicit_confirm(st, st.confirm_targets, "Sorry, I did not understand. ");
  }

  DialogueAct act;
  act.type = ActType::repair_request;
  act.asks = s;
  if (auto sw = should_switch_isolated(st, config)) {
    st.isolated = true;
    act.isolated = true;
    act.text = "Sorry, I did not understand. Please say only the name of the " + std::string(to_string(s)) + " city.";
    return finish(st, act, ask_expectation(s, true));
  }
  act.text = "Sorry, I did not understand. " + short_question(s);
  return finish(st, act, ask_expectation(s, false));
}

void confirm_slot(DialogueState& st, Slot s) {
  SlotState& ss = st.slot(s);
  if (ss.status != SlotStatus::hypothesized) return;
  ss.status = SlotStatus::confirmed;
  ss.needs_explicit = false;
  ss.displaced.clear();
}

}  // namespace

std::string_view to_string(Slot s) { return kSlotNames[static_cast<std::size_t>(s)]; }

std::string_view to_string(SlotStatus s) {
  switch (s) {
    case SlotStatus::empty: return "empty";
    case SlotStatus::hypothesized: return "hypothesized";
    case SlotStatus::confirmed: return "confirmed";
  }
  return "?";
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::acquiring: return "acquiring";
    case Phase::confirming: return "confirming";
    case Phase::querying: return "querying";
    case Phase::closing: return "closing";
  }
  return "?";
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::open: return "open";
    case Outcome::S: return "S";
    case Outcome::SC: return "SC";
    case Outcome::SF: return "SF";
    case Outcome::UF: return "UF";
  }
  return "?";
}

std::string_view to_string(Symptom s) {
  switch (s) {
    case Symptom::none: return "none";
    case Symptom::non_understanding: return "non_understanding";
    case Symptom::user_initiated_repair: return "user_initiated_repair";
    case Symptom::inconsistency: return "inconsistency";
  }
  return "?";
}

std::string_view to_string(ActType t) {
  switch (t) {
    case ActType::prompt: return "prompt";
    case ActType::implicit_confirm_and_prompt: return "implicit_confirm_and_prompt";
    case ActType::explicit_confirm: return "explicit_confirm";
    case ActType::repair_request: return "repair_request";
    case ActType::relax_notice: return "relax_notice";
    case ActType::answer: return "answer";
    case ActType::reject: return "reject";
    case ActType::close: return "close";
  }
  return "?";
}

std::optional<Slot> slot_from(std::string_view name) {
  for (Slot s : kSlots) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::optional<Outcome> outcome_from(std::string_view name) {
  for (Outcome o : {Outcome::open, Outcome::S, Outcome::SC, Outcome::SF, Outcome::UF}) {
    if (to_string(o) == name) return o;
  }
  return std::nullopt;
}

bool is_optional(Slot s) { return s == Slot::date || s == Slot::time; }

ConceptKind kind_of(Slot s) {
  switch (s) {
    case Slot::departure: return ConceptKind::departure_city;
    case Slot::arrival: return ConceptKind::arrival_city;
    case Slot::date: return ConceptKind::date;
    case Slot::time: return ConceptKind::time;
  }
  return ConceptKind::date;
}

std::optional<Slot> slot_of(ConceptKind kind) {
  switch (kind) {
    case ConceptKind::departure_city: return Slot::departure;
    case ConceptKind::arrival_city: return Slot::arrival;
    case ConceptKind::date: return Slot::date;
    case ConceptKind::time: return Slot::time;
    default: return std::nullopt;
  }
}

bool Expectation::expects(ConceptKind k) const { return contains(expected_kinds, k); }

std::vector<std::string> predicted_classes_for(Slot s) {
  switch (s) {
    case Slot::departure: return {"city", "station", "w:from"};
    case Slot::arrival: return {"city", "station", "w:to"};
    case Slot::date: return {"weekday", "month", "number", "relday", "w:on"};
    case Slot::time: return {"number", "daypart", "meridiem", "w:at"};
  }
  return {};
}

std::string render_value(Slot s, const std::string& value) {
  switch (s) {
    case Slot::departure: return "from " + value;
    case Slot::arrival: return "to " + value;
    case Slot::date: {
      if (auto d = parse_iso_date(value)) return "on " + std::string(weekday_name(iso_weekday(*d))) + " " + value;
      return "on " + value;
    }
    case Slot::time:
      if (value == kMainConnections) return "for the main connections of the day";
      if (parse_clock(value)) return "at " + value;
      return "in the " + value;
  }
  return value;
}

StrategyConfig StrategyConfig::parse(std::string_view text) {
  StrategyConfig c;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("strategy config: ") + e.what());
  }
  static const std::set<std::string> known = {"session_date", "parameter_order", "isolated_after_failures",
                                              "isolated_slots", "optional_repair_budget", "required_repair_budget",
                                              "explicit_confirm_below", "max_turns", "recognizer", "lm"};
  if (!j.is_object()) throw ConfigError("strategy config: expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!known.contains(k)) throw ConfigError("strategy config: unknown key '" + k + "'");
  }
  try {
    if (j.contains("session_date")) {
      auto d = parse_iso_date(j.at("session_date").get<std::string>());
      if (!d) throw ConfigError("strategy config: bad session_date");
      c.session_date = *d;
    }
    auto slots = [](const nlohmann::json& arr) {
      std::vector<Slot> out;
      for (const auto& v : arr) {
        auto s = slot_from(v.get<std::string>());
        if (!s) throw ConfigError("strategy config: unknown slot '" + v.get<std::string>() + "'");
        out.push_back(*s);
      }
      return out;
    };
    if (j.contains("parameter_order")) c.parameter_order = slots(j.at("parameter_order"));
    if (j.contains("isolated_slots")) {
      const auto v = slots(j.at("isolated_slots"));
      c.isolated_slots = {v.begin(), v.end()};
    }
    c.isolated_after_failures = j.value("isolated_after_failures", c.isolated_after_failures);
    c.optional_repair_budget = j.value("optional_repair_budget", c.optional_repair_budget);
    c.required_repair_budget = j.value("required_repair_budget", c.required_repair_budget);
    c.explicit_confirm_below = j.value("explicit_confirm_below", c.explicit_confirm_below);
    c.max_turns = j.value("max_turns", c.max_turns);
    if (j.contains("recognizer")) {
      const auto& r = j.at("recognizer");
      c.alpha = r.value("alpha", c.alpha);
      c.prediction_bonus = r.value("prediction_bonus", c.prediction_bonus);
    }
    if (j.contains("lm")) {
      const auto& l = j.at("lm");
      c.lm.lm.lambda = l.value("lambda", c.lm.lm.lambda);
      c.lm.lm.floor = l.value("floor", c.lm.lm.floor);
      c.lm.state_mixing = l.value("state_mixing", c.lm.state_mixing);
      c.lm.min_state_sentences = l.value("min_state_sentences", c.lm.min_state_sentences);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("strategy config: ") + e.what());
  }
  c.validate();
  return c;
}

StrategyConfig StrategyConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open strategy config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void StrategyConfig::validate() const {
  std::vector<Slot> sorted = parameter_order;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != std::vector<Slot>(kSlots.begin(), kSlots.end())) {
    throw ConfigError("parameter_order must list each slot once");
  }
  for (Slot s : isolated_slots) {
    if (!is_city(s)) throw ConfigError("isolated acquisition is only available for city slots");
  }
  if (isolated_after_failures < 1 || optional_repair_budget < 1 || required_repair_budget < 1 || max_turns < 1) {
    throw ConfigError("thresholds and budgets must be positive");
  }
  if (explicit_confirm_below < 0.0 || explicit_confirm_below > 1.0) {
    throw ConfigError("explicit_confirm_below must lie in [0, 1]");
  }
  if (alpha <= 0.0) throw ConfigError("alpha must be positive");
  if (lm.lm.lambda < 0.0 || lm.lm.lambda > 1.0 || lm.state_mixing < 0.0 || lm.state_mixing > 1.0) {
    throw ConfigError("interpolation weights must lie in [0, 1]");
  }
}

DialogueState start_session(const StrategyConfig& config) {
  DialogueState st;
  st.focus = config.parameter_order.front();
  DialogueAct act;
  act.type = ActType::prompt;
  act.asks = st.focus;
  act.text = "Welcome to the train timetable service. " + question(st.focus);
  finish(st, act, ask_expectation(st.focus, false));
  return st;
}

TurnAnalysis interpret(const DialogueState& st, const CaseFrame& frame, bool decode_ok) {
  TurnAnalysis a;
  a.speech_act = frame.speech_act;
  if (!decode_ok || (frame.slots.empty() && frame.speech_act == SpeechAct::empty)) {
    a.symptom = Symptom::non_understanding;
    return a;
  }
  const bool repair_act = frame.speech_act == SpeechAct::deny || frame.speech_act == SpeechAct::correct;
  std::vector<Slot> targets = st.confirm_targets;
  for (Slot s : st.pending) {
    if (!contains(targets, s)) targets.push_back(s);
  }

  std::set<Slot> anchored;
  for (const auto& [kind, value] : frame.slots) {
    if (auto s = slot_of(kind)) anchored.insert(*s);
  }
  auto single_city = [&](const std::vector<Slot>& from) -> std::optional<Slot> {
    std::vector<Slot> c;
    for (Slot s : from) {
      if (is_city(s) && !anchored.contains(s)) c.push_back(s);
    }
    if (c.size() == 1) return c.front();
    return std::nullopt;
  };
  auto bind_city = [&]() -> std::optional<Slot> {
    if (repair_act) {
      if (auto s = single_city(targets)) return s;
    }
    if (st.phase == Phase::acquiring && is_city(st.focus) && !anchored.contains(st.focus)) return st.focus;
    if (st.phase == Phase::confirming) return single_city(st.confirm_targets);
    return std::nullopt;
  };

  for (const auto& [kind, value] : frame.slots) {
    const auto it = frame.scores.find(kind);
    const double score = it == frame.scores.end() ? 1.0 : it->second;
    const auto slot = kind == ConceptKind::unanchored_city ? bind_city() : slot_of(kind);
    const bool strict = st.expectation.strength == Expectation::Strength::strict;
    if (!slot || !st.expectation.expects(kind) || (strict && *slot != st.focus)) {
      a.unexpected.push_back({kind, value, {}, score});
      continue;
    }
    a.matched.push_back({*slot, value, score});
  }

  auto value_differs = [&](const TurnAnalysis::Fill& f) {
    const auto& ss = st.slot(f.slot);
    return ss.status != SlotStatus::empty && ss.value != f.value;
  };
  if (repair_act) {
    for (const auto& f : a.matched) {
      if (value_differs(f)) a.corrections.push_back(f);
    }
    if (a.corrections.empty()) {
      for (Slot s : targets) {
        const bool reasserted = std::any_of(a.matched.begin(), a.matched.end(), [&](const TurnAnalysis::Fill& f) {
          return f.slot == s && f.value == st.slot(s).value;
        });
        if (!reasserted) a.denied.push_back(s);
      }
    }
    if (!a.corrections.empty() || !a.denied.empty()) {
      a.symptom = Symptom::user_initiated_repair;
    } else if (a.matched.empty()) {
      a.symptom = Symptom::non_understanding;
    }
    return a;
  }

  for (const auto& f : a.matched) {
    if (st.slot(f.slot).status == SlotStatus::confirmed && st.slot(f.slot).value != f.value) {
      a.corrections.push_back(f);
    }
  }
  if (!a.corrections.empty()) a.symptom = Symptom::inconsistency;
  if (frame.speech_act == SpeechAct::confirm) {
    for (Slot s : targets) {
      const bool contradicted = std::any_of(a.matched.begin(), a.matched.end(), [&](const TurnAnalysis::Fill& f) {
        return f.slot == s && f.value != st.slot(s).value;
      });
      if (!contradicted) a.affirmed.push_back(s);
    }
  }
  if (a.matched.empty() && a.affirmed.empty()) a.symptom = Symptom::non_understanding;
  return a;
}

DialogueAct next_turn(DialogueState& st, const TurnAnalysis& a, const StrategyConfig& config,
                      const Timetable* timetable) {
  if (!st.open()) throw std::logic_error("next_turn on a closed session");
  ++st.turns;
  if (a.symptom == Symptom::non_understanding) return repair(st, config, timetable);

  const bool was_isolated = st.isolated;
  st.isolated = false;
  st.failure_counters[static_cast<std::size_t>(st.focus)] = 0;

  auto fill = [&](const TurnAnalysis::Fill& f, bool force_explicit) {
    SlotState& ss = st.slot(f.slot);
    if (ss.status != SlotStatus::empty && ss.value == f.value) {
      ss.score = std::max(ss.score, f.score);
      return;
    }
    ss.value = f.value;
    ss.status = SlotStatus::hypothesized;
    ss.score = f.score;
    ss.relaxed = false;
    if (force_explicit || f.score < config.explicit_confirm_below) ss.needs_explicit = true;
  };
  auto is_correction = [&](const TurnAnalysis::Fill& f) {
    return std::any_of(a.corrections.begin(), a.corrections.end(),
                       [&](const TurnAnalysis::Fill& c) { return c.slot == f.slot; });
  };

  switch (a.symptom) {
    case Symptom::user_initiated_repair:
      for (const auto& c : a.corrections) {
        st.slot(c.slot).displaced.clear();
        fill(c, true);
      }
      for (Slot s : a.denied) {
        SlotState& ss = st.slot(s);
        if (!ss.displaced.empty()) {
          ss.value = ss.displaced;
          ss.status = SlotStatus::confirmed;
          ss.needs_explicit = false;
          ss.displaced.clear();
        } else {
          ss = SlotState{};
          ss.needs_explicit = true;
          ++st.repair_attempts[static_cast<std::size_t>(s)];
        }
      }
      for (const auto& f : a.matched) {
        if (!is_correction(f)) fill(f, false);
      }
      break;
    case Symptom::inconsistency:
      for (const auto& c : a.corrections) {
        SlotState& ss = st.slot(c.slot);
        const std::string old = ss.value;
        fill(c, true);
        ss.displaced = old;
      }
      for (const auto& f : a.matched) {
        if (!is_correction(f)) fill(f, false);
      }
      break;
    default: {
      for (Slot s : st.pending) {
        const bool replaced = std::any_of(a.matched.begin(), a.matched.end(), [&](const TurnAnalysis::Fill& f) {
          return f.slot == s && f.value != st.slot(s).value;
        });
        if (!replaced) confirm_slot(st, s);
      }
      for (Slot s : a.affirmed) confirm_slot(st, s);
      for (const auto& f : a.matched) {
        const SlotState& ss = st.slot(f.slot);
        if (ss.status == SlotStatus::hypothesized && ss.value == f.value && contains(st.confirm_targets, f.slot)) {
          confirm_slot(st, f.slot);
          continue;
        }
        fill(f, was_isolated && f.slot == st.focus);
      }
      break;
    }
  }
  return decide(st, config, timetable);
}

std::optional<IsolatedSwitch> should_switch_isolated(const DialogueState& st, const StrategyConfig& config) {
  if (st.phase != Phase::acquiring || !st.open()) return std::nullopt;
  if (!config.isolated_slots.contains(st.focus)) return std::nullopt;
  if (st.failure_counters[static_cast<std::size_t>(st.focus)] < config.isolated_after_failures) return std::nullopt;
  return IsolatedSwitch{st.focus, {"city", "station"}};
}

QueryParameters relax_constraints(DialogueState& st, const StrategyConfig& config) {
  if (st.slot(Slot::departure).status != SlotStatus::confirmed ||
      st.slot(Slot::arrival).status != SlotStatus::confirmed) {
    throw std::logic_error("relax_constraints needs both cities confirmed");
  }
  QueryParameters p;
  p.departure = st.slot(Slot::departure).value;
  p.arrival = st.slot(Slot::arrival).value;

  SlotState& date = st.slot(Slot::date);
  std::optional<Date> d;
  if (date.status == SlotStatus::confirmed && !date.relaxed) d = parse_iso_date(date.value);
  if (d) {
    p.date = *d;
  } else {
    p.date = add_days(config.session_date, 1);
    date = SlotState{format_iso_date(p.date), SlotStatus::empty, 0.0, true, false, {}};
    p.relaxed.insert("date");
  }

  SlotState& time = st.slot(Slot::time);
  if (time.status == SlotStatus::confirmed && !time.relaxed && time_range_for(time.value)) {
    p.time = time.value;
  } else {
    p.time = std::string(kMainConnections);
    time = SlotState{p.time, SlotStatus::empty, 0.0, true, false, {}};
    p.relaxed.insert("time");
  }
  return p;
}

DialogueAct build_query_and_answer(DialogueState& st, const Timetable* timetable, const StrategyConfig& config) {
  if (st.phase != Phase::querying) throw std::logic_error("build_query_and_answer outside the querying phase");
  if (!timetable) return fail(st, "the timetable is not available");
  QueryParameters p = relax_constraints(st, config);
  st.query = p;
  st.results = timetable->query(p);
  st.phase = Phase::closing;
  st.pending.clear();
  st.confirm_targets.clear();

  DialogueAct act;
  act.referenced_slots = {kSlots.begin(), kSlots.end()};
  act.values = {{Slot::departure, p.departure},
                {Slot::arrival, p.arrival},
                {Slot::date, format_iso_date(p.date)},
                {Slot::time, p.time}};
  const std::string request = render_value(Slot::departure, p.departure) + " " + render_value(Slot::arrival, p.arrival) +
                              " " + render_value(Slot::date, format_iso_date(p.date)) + " " +
                              render_value(Slot::time, p.time);
  if (st.results.empty()) {
    st.outcome = Outcome::SF;
    act.type = ActType::reject;
    act.text = "Sorry, there are no connections " + request + ". Goodbye.";
    return finish(st, act, closing_expectation());
  }
  st.outcome = p.relaxed.empty() ? Outcome::S : Outcome::SC;
  act.type = ActType::answer;
  act.connections = st.results;
  std::vector<std::string> lines;
  for (const auto& c : st.results) lines.push_back(format_clock(c.departs) + " arriving " + format_clock(c.arrives));
  act.text = "I found " + std::to_string(st.results.size()) + (st.results.size() == 1 ? " connection " : " connections ") +
             request + ": " + join(lines, "; ") + ".";
  return finish(st, act, closing_expectation());
}

}  // namespace railtalk
