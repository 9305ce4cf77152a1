#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "railtalk/state_tags.hpp"

using namespace railtalk;

namespace {

Timetable table_from(const std::string& text, const Lexicon* lex = nullptr) {
  std::istringstream in(text);
  return Timetable::parse(in, lex, "<test>");
}

std::string table_error(const std::string& text) {
  try {
    table_from(text, &oracle::shipped().lexicon);
  } catch (const LoadError& e) {
    return e.what();
  }
  return "";
}

QueryParameters params(std::string dep, std::string arr, std::string date, std::string time) {
  return {std::move(dep), std::move(arr), *parse_iso_date(date), std::move(time), {}};
}

// Drives a session with noiseless recognition.
struct Session {
  const Resources& r = oracle::shipped();
  DialogueState st = start_session(r.strategy);
  PipelineOptions noiseless;

  const TurnLogEntry& say(const std::string& text) { return run_turn(st, r, text, noiseless, 1 + st.turn_log.size()); }
  const TurnLogEntry& hear(const ConfusionNetwork& cn) { return run_turn_network(st, r, cn, noiseless); }
  const SlotState& slot(Slot s) const { return st.slot(s); }
};

SlotState held(const std::string& value, SlotStatus status) {
  SlotState s;
  s.value = value;
  s.status = status;
  return s;
}

ConfusionNetwork network(std::initializer_list<std::vector<Alternative>> slots) {
  ConfusionNetwork cn;
  for (const auto& alts : slots) cn.slots.push_back({alts, false});
  return cn;
}

}  // namespace

TEST(Timetable, ShippedTableLoads) {
  const auto& t = oracle::shipped().timetable;
  EXPECT_GT(t.size(), 0u);
  EXPECT_TRUE(t.cities().contains("milan"));
  EXPECT_TRUE(t.cities().contains("rome"));
}

TEST(Timetable, LoadErrors) {
  EXPECT_NE(table_error("milan,rome,07:40,09:25,1234567\n").find("expected 6"), std::string::npos);
  EXPECT_NE(table_error("milan,milan,07:40,09:25,1,1\n").find("departure equals arrival"), std::string::npos);
  EXPECT_NE(table_error("milan,atlantis,07:40,09:25,1,1\n").find("unknown city"), std::string::npos);
  EXPECT_NE(table_error("milan,rome,7h40,09:25,1,1\n").find("malformed clock"), std::string::npos);
  EXPECT_NE(table_error("milan,rome,07:40,09:25,,1\n").find("no service days"), std::string::npos);
  EXPECT_NE(table_error("milan,rome,07:40,09:25,8,1\n").find("digits 1-7"), std::string::npos);
  EXPECT_NE(table_error("milan,rome,07:40,09:25,1,2\n").find("main flag"), std::string::npos);
  const std::string e = table_error("# header\nmilan,rome,07:40,09:25,1,1\nmilan,rome,x,09:25,1,1\n");
  EXPECT_NE(e.find("<test>:3"), std::string::npos) << e;
  EXPECT_THROW(Timetable::load("/nonexistent/timetable.csv"), LoadError);
}

TEST(Timetable, QueryFiltersAndOrders) {
  const auto t = table_from(
      "a,b,18:00,19:00,12345,0\n"
      "a,b,08:30,09:30,1234567,1\n"
      "a,b,08:00,09:10,6,0\n"
      "a,b,09:15,10:00,12345,0\n"
      "b,a,09:00,10:00,12345,1\n");
  // 2024-05-13 is a Monday, 2024-05-11 a Saturday.
  auto deps = [&](const QueryParameters& p) {
    std::vector<std::string> out;
    for (const auto& c : t.query(p)) out.push_back(format_clock(c.departs));
    return out;
  };
  EXPECT_EQ(deps(params("a", "b", "2024-05-13", "08:00")), (std::vector<std::string>{"08:30", "09:15"}));
  EXPECT_EQ(deps(params("a", "b", "2024-05-11", "08:00")), (std::vector<std::string>{"08:00", "08:30"}));
  EXPECT_EQ(deps(params("a", "b", "2024-05-13", "evening")), (std::vector<std::string>{"18:00"}));
  EXPECT_EQ(deps(params("a", "b", "2024-05-13", std::string(kMainConnections))), (std::vector<std::string>{"08:30"}));
  EXPECT_TRUE(deps(params("b", "a", "2024-05-12", "morning")).empty());
  EXPECT_THROW(t.query(params("a", "b", "2024-05-13", "teatime")), std::invalid_argument);
}

TEST(Strategy, ShippedConfigAndErrors) {
  const auto& c = oracle::shipped().strategy;
  EXPECT_EQ(format_iso_date(c.session_date), "2024-05-10");
  EXPECT_EQ(c.isolated_after_failures, 2);
  EXPECT_EQ(c.optional_repair_budget, 3);
  EXPECT_EQ(c.required_repair_budget, 4);
  EXPECT_THROW(StrategyConfig::parse(R"({"parameter_order": ["departure", "weather"]})"), ConfigError);
  EXPECT_THROW(StrategyConfig::parse(R"({"isolated_after_failures": 0})"), ConfigError);
  EXPECT_THROW(StrategyConfig::parse(R"({"explicit_confirm_below": 1.5})"), ConfigError);
  EXPECT_THROW(StrategyConfig::parse(R"({"no_such_key": 1})"), ConfigError);
  EXPECT_THROW(StrategyConfig::parse("not json"), ConfigError);
  EXPECT_NO_THROW(StrategyConfig::parse("{}"));
}

TEST(Dialogue, StartSession) {
  const auto st = start_session(oracle::shipped().strategy);
  EXPECT_EQ(st.focus, Slot::departure);
  EXPECT_EQ(st.phase, Phase::acquiring);
  EXPECT_TRUE(st.open());
  EXPECT_EQ(st.turns, 0);
  EXPECT_EQ(st.last_act.text, "Welcome to the train timetable service. Where are you leaving from?");
  EXPECT_EQ(st.expectation.state_tag, "ask_departure");
  for (Slot s : kSlots) EXPECT_EQ(st.slot(s).status, SlotStatus::empty);
}

TEST(Dialogue, CooperativeCallWithImplicitConfirmation) {
  Session d;
  auto& t1 = d.say("from milan");
  EXPECT_EQ(t1.response.type, ActType::implicit_confirm_and_prompt);
  EXPECT_EQ(t1.response.text, "From milan. Where are you going to?");
  EXPECT_EQ(d.slot(Slot::departure).status, SlotStatus::hypothesized);
  d.say("to rome");
  EXPECT_EQ(d.slot(Slot::departure).status, SlotStatus::confirmed);
  EXPECT_EQ(d.slot(Slot::arrival).status, SlotStatus::hypothesized);
  d.say("on monday");
  EXPECT_EQ(d.slot(Slot::arrival).status, SlotStatus::confirmed);
  auto& t4 = d.say("in the morning");
  EXPECT_EQ(d.slot(Slot::date).status, SlotStatus::confirmed);
  // The last value has nothing to ride on and is confirmed explicitly.
  EXPECT_EQ(t4.response.type, ActType::explicit_confirm);
  auto& t5 = d.say("yes");
  EXPECT_EQ(t5.response.type, ActType::answer);
  EXPECT_EQ(d.st.outcome, Outcome::S);
  ASSERT_TRUE(d.st.query.has_value());
  EXPECT_EQ(d.st.query->departure, "milan");
  EXPECT_EQ(d.st.query->arrival, "rome");
  EXPECT_EQ(format_iso_date(d.st.query->date), "2024-05-13");
  EXPECT_EQ(d.st.query->time, "morning");
  EXPECT_TRUE(d.st.query->relaxed.empty());
  EXPECT_EQ(t5.response.text.rfind("I found 1 connection", 0), 0u) << t5.response.text;
  EXPECT_NE(t5.response.text.find("07:40 arriving 09:25"), std::string::npos);
  EXPECT_THROW(d.say("thanks"), std::logic_error);
}

TEST(Dialogue, OverAnsweringFillsSeveralSlots) {
  Session d;
  auto& t1 = d.say("from milan to rome on monday");
  EXPECT_EQ(t1.response.type, ActType::implicit_confirm_and_prompt);
  EXPECT_EQ(t1.response.asks, Slot::time);
  EXPECT_EQ(d.slot(Slot::arrival).value, "rome");
  EXPECT_EQ(d.slot(Slot::date).value, "2024-05-13");
  d.say("at seven");
  for (Slot s : {Slot::departure, Slot::arrival, Slot::date}) EXPECT_EQ(d.slot(s).status, SlotStatus::confirmed);
  d.say("yes");
  EXPECT_EQ(d.st.outcome, Outcome::S);
  EXPECT_EQ(d.st.results.size(), 1u);
  EXPECT_EQ(d.st.turns, 3);
}

TEST(Dialogue, DenyClearsAndCorrectReplaces) {
  Session d;
  d.say("from milan");
  auto& deny = d.say("no");
  EXPECT_EQ(deny.analysis.symptom, Symptom::user_initiated_repair);
  EXPECT_EQ(deny.analysis.denied, std::vector<Slot>{Slot::departure});
  EXPECT_EQ(d.slot(Slot::departure).status, SlotStatus::empty);
  EXPECT_EQ(deny.response.asks, Slot::departure);
  d.say("from milan");
  EXPECT_TRUE(d.slot(Slot::departure).needs_explicit);
  EXPECT_EQ(d.st.last_act.type, ActType::explicit_confirm);
  auto& fix = d.say("no i said from turin");
  EXPECT_EQ(fix.analysis.symptom, Symptom::user_initiated_repair);
  ASSERT_EQ(fix.analysis.corrections.size(), 1u);
  EXPECT_EQ(d.slot(Slot::departure).value, "turin");
  EXPECT_EQ(d.st.last_act.type, ActType::explicit_confirm);
  d.say("yes");
  EXPECT_EQ(d.slot(Slot::departure).status, SlotStatus::confirmed);
  EXPECT_EQ(d.slot(Slot::departure).value, "turin");
}

TEST(Dialogue, InconsistencyRestoresDisplacedValue) {
  Session d;
  d.say("from milan");
  d.say("to rome");
  ASSERT_EQ(d.slot(Slot::departure).status, SlotStatus::confirmed);
  auto& t = d.say("from turin");
  EXPECT_EQ(t.analysis.symptom, Symptom::inconsistency);
  EXPECT_EQ(d.slot(Slot::departure).value, "turin");
  EXPECT_EQ(d.slot(Slot::departure).displaced, "milan");
  EXPECT_EQ(t.response.type, ActType::explicit_confirm);
  EXPECT_NE(t.response.text.find("Earlier I understood from milan, now from turin."), std::string::npos)
      << t.response.text;
  d.say("no");
  EXPECT_EQ(d.slot(Slot::departure).value, "milan");
  EXPECT_EQ(d.slot(Slot::departure).status, SlotStatus::confirmed);
  EXPECT_TRUE(d.slot(Slot::departure).displaced.empty());
}

TEST(Dialogue, IsolatedAcquisitionAfterTwoFailures) {
  Session d;
  const auto& config = d.r.strategy;
  EXPECT_FALSE(should_switch_isolated(d.st, config));
  auto& f1 = d.say("uhm");
  EXPECT_EQ(f1.analysis.symptom, Symptom::non_understanding);
  EXPECT_EQ(f1.response.text, "Sorry, I did not understand. Which city are you leaving from?");
  EXPECT_FALSE(should_switch_isolated(d.st, config));
  EXPECT_FALSE(d.st.expectation.isolated);
  auto& f2 = d.say("uhm");
  const auto sw = should_switch_isolated(d.st, config);
  ASSERT_TRUE(sw.has_value());
  EXPECT_EQ(sw->slot, Slot::departure);
  EXPECT_EQ(sw->classes, (std::vector<std::string>{"city", "station"}));
  EXPECT_TRUE(f2.response.isolated);
  EXPECT_EQ(f2.response.text, "Sorry, I did not understand. Please say only the name of the departure city.");
  EXPECT_TRUE(d.st.expectation.isolated);

  // A garbled single word is matched against the city vocabulary.
  auto& got = d.hear(network({{{"milam", -0.1}, {"to", -1.5}}}));
  EXPECT_TRUE(got.decode.ok);
  EXPECT_EQ(got.decode.words, std::vector<std::string>{"milan"});
  EXPECT_EQ(d.slot(Slot::departure).value, "milan");
  EXPECT_TRUE(d.slot(Slot::departure).needs_explicit);
  EXPECT_EQ(got.response.type, ActType::explicit_confirm);
  EXPECT_FALSE(d.st.expectation.isolated);
  d.say("yes");
  EXPECT_EQ(d.slot(Slot::departure).status, SlotStatus::confirmed);
}

TEST(Dialogue, IsolatedModeOnlyForCitySlots) {
  Session d;
  d.say("from milan to rome");
  EXPECT_EQ(d.st.focus, Slot::date);
  d.say("uhm");
  d.say("uhm");
  EXPECT_FALSE(should_switch_isolated(d.st, d.r.strategy));
  EXPECT_FALSE(d.st.expectation.isolated);
}

TEST(Dialogue, RelaxationAfterOptionalBudgetGivesSC) {
  Session d;
  d.say("from milan");
  d.say("to rome");
  for (int i = 0; i < 2; ++i) EXPECT_EQ(d.say("uhm").response.type, ActType::repair_request);
  auto& relax = d.say("uhm");
  EXPECT_TRUE(d.slot(Slot::date).relaxed);
  EXPECT_EQ(relax.response.type, ActType::relax_notice);
  EXPECT_EQ(relax.response.text.rfind("I could not get the date, so I will look for tomorrow. ", 0), 0u);
  EXPECT_EQ(relax.response.asks, Slot::time);
  for (int i = 0; i < 3; ++i) d.say("uhm");
  EXPECT_TRUE(d.slot(Slot::time).relaxed);
  // Rome is still hypothesized and gets an explicit check before the query.
  EXPECT_EQ(d.st.last_act.type, ActType::relax_notice);
  EXPECT_NE(d.st.last_act.text.find("Did I understand correctly: to rome?"), std::string::npos) << d.st.last_act.text;
  d.say("yes");
  EXPECT_EQ(d.st.outcome, Outcome::SC);
  ASSERT_TRUE(d.st.query.has_value());
  EXPECT_EQ(d.st.query->relaxed, (std::set<std::string>{"date", "time"}));
  EXPECT_EQ(format_iso_date(d.st.query->date), "2024-05-11");
  ASSERT_EQ(d.st.results.size(), 1u);
  EXPECT_EQ(format_clock(d.st.results[0].departs), "07:40");
}

TEST(Dialogue, RequiredSlotBudgetGivesSF) {
  Session d;
  for (int i = 0; i < 3; ++i) d.say("uhm");
  EXPECT_TRUE(d.st.open());
  auto& last = d.say("uhm");
  EXPECT_EQ(d.st.outcome, Outcome::SF);
  EXPECT_EQ(last.response.type, ActType::close);
  EXPECT_FALSE(d.st.query.has_value());
}

TEST(Dialogue, TurnLimitGivesSF) {
  auto config = oracle::shipped().strategy;
  config.max_turns = 3;
  auto st = start_session(config);
  // Repeating the same date is understood every time, so only the turn
  // limit ends the call.
  TurnAnalysis a;
  a.speech_act = SpeechAct::confirm;
  a.matched.push_back({Slot::date, "2024-05-13", 1.0});
  next_turn(st, a, config, &oracle::shipped().timetable);
  next_turn(st, a, config, &oracle::shipped().timetable);
  EXPECT_TRUE(st.open());
  const auto act = next_turn(st, a, config, &oracle::shipped().timetable);
  EXPECT_EQ(st.outcome, Outcome::SF);
  EXPECT_EQ(act.type, ActType::close);
  EXPECT_NE(act.text.find("ran out of time"), std::string::npos);
  EXPECT_EQ(st.turns, 3);
}

TEST(Dialogue, RelaxNeedsConfirmedCities) {
  const auto& config = oracle::shipped().strategy;
  auto st = start_session(config);
  EXPECT_THROW(relax_constraints(st, config), std::logic_error);
  st.slot(Slot::departure) = held("milan", SlotStatus::confirmed);
  st.slot(Slot::arrival) = held("rome", SlotStatus::hypothesized);
  EXPECT_THROW(relax_constraints(st, config), std::logic_error);
  st.slot(Slot::arrival).status = SlotStatus::confirmed;
  const auto q = relax_constraints(st, config);
  EXPECT_EQ(format_iso_date(q.date), "2024-05-11");
  EXPECT_EQ(q.time, kMainConnections);
  EXPECT_EQ(q.relaxed, (std::set<std::string>{"date", "time"}));
  EXPECT_TRUE(st.slot(Slot::date).relaxed);
}

TEST(Dialogue, NoConnectionsRejects) {
  const auto& config = oracle::shipped().strategy;
  auto st = start_session(config);
  st.slot(Slot::departure) = held("milan", SlotStatus::confirmed);
  st.slot(Slot::arrival) = held("rome", SlotStatus::confirmed);
  st.slot(Slot::date) = held("2024-05-11", SlotStatus::confirmed);
  st.slot(Slot::time) = held("night", SlotStatus::confirmed);
  st.phase = Phase::querying;
  const auto act = build_query_and_answer(st, &oracle::shipped().timetable, config);
  EXPECT_EQ(act.type, ActType::reject);
  EXPECT_EQ(st.outcome, Outcome::SF);
  EXPECT_EQ(act.text.rfind("Sorry, there are no connections", 0), 0u) << act.text;
}

TEST(Dialogue, NonUnderstandingWhenDecodeFails) {
  Session d;
  auto& t = d.hear(ConfusionNetwork{});
  EXPECT_TRUE(t.decode.words.empty());
  EXPECT_EQ(t.analysis.symptom, Symptom::non_understanding);
  EXPECT_EQ(d.st.failure_counters[0], 1);
  // An understood turn on the focus resets its counter.
  d.say("from milan");
  EXPECT_EQ(d.st.failure_counters[0], 0);
  EXPECT_EQ(d.st.repair_attempts[0], 1);
}

TEST(Scenarios, ParseAndErrors) {
  const auto all = load_scenarios(oracle::data_dir() / "scenarios.tsv");
  EXPECT_GE(all.size(), 20u);
  EXPECT_EQ(all[0].id, "sc01");
  EXPECT_EQ(all[0].goal(Slot::departure), "genoa");
  std::istringstream bad("x\tmilan\trome\t2024-13-01\t09:00\tscripted\n");
  EXPECT_THROW(parse_scenarios(bad), LoadError);
  std::istringstream short_line("x\tmilan\trome\n");
  EXPECT_THROW(parse_scenarios(short_line), LoadError);
}

TEST(Simulator, ValueMatching) {
  Scenario sc{"t", "milan", "rome", "2024-05-13", "09:30", "free"};
  EXPECT_TRUE(value_matches(Slot::departure, "milan", sc));
  EXPECT_FALSE(value_matches(Slot::arrival, "milan", sc));
  EXPECT_TRUE(value_matches(Slot::time, "09:30", sc));
  EXPECT_TRUE(value_matches(Slot::time, "morning", sc));
  EXPECT_FALSE(value_matches(Slot::time, "evening", sc));
  EXPECT_TRUE(value_matches(Slot::date, "2024-05-13", sc));
}

TEST(Simulator, CooperativeUserAnswersWhatIsAsked) {
  const auto& r = oracle::shipped();
  Scenario sc{"t", "milan", "rome", "2024-05-13", "morning", "free"};
  auto st = start_session(r.strategy);
  Rng rng(3);
  const auto first = simulate_user(Persona::cooperative, sc, st.last_act, r.lexicon, r.strategy.session_date, rng);
  EXPECT_FALSE(first.ends_call);
  EXPECT_NE(first.text.find("milan"), std::string::npos) << first.text;
  // Repeated runs of the simulated call end in S.
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto s = start_session(r.strategy);
    Rng user(seed);
    for (int i = 0; i < 20 && s.open(); ++i) {
      const auto u = simulate_user(Persona::cooperative, sc, s.last_act, r.lexicon, r.strategy.session_date, user);
      run_turn(s, r, u.text, PipelineOptions{}, seed * 100 + static_cast<std::uint64_t>(i));
    }
    EXPECT_EQ(s.outcome, Outcome::S) << seed;
  }
}

TEST(Simulator, TrainingCorpusCoversEveryTag) {
  const auto& r = oracle::shipped();
  const auto corpus = generate_training_corpus(r.lexicon, r.strategy.session_date, 10, 9);
  std::map<std::string, std::size_t> per_tag;
  for (const auto& s : corpus) ++per_tag[s.tag];
  EXPECT_EQ(per_tag.size(), 6u);
  for (const auto& [tag, n] : per_tag) {
    EXPECT_TRUE(is_state_tag(tag)) << tag;
    EXPECT_EQ(n, 10u) << tag;
  }
  const auto again = generate_training_corpus(r.lexicon, r.strategy.session_date, 10, 9);
  ASSERT_EQ(again.size(), corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) EXPECT_EQ(again[i].tag, corpus[i].tag);
}
