#include "railtalk/json_io.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

namespace railtalk {

namespace {

SpeechAct speech_act_from(std::string_view name) {
  for (SpeechAct a : {SpeechAct::empty, SpeechAct::inform, SpeechAct::confirm, SpeechAct::deny, SpeechAct::correct,
                      SpeechAct::ask}) {
    if (to_string(a) == name) return a;
  }
  throw std::invalid_argument("unknown speech act '" + std::string(name) + "'");
}

Json slot_list(const std::vector<Slot>& slots) {
  Json a = Json::array();
  for (Slot s : slots) a.push_back(std::string(to_string(s)));
  return a;
}

Json span_json(const Span& s) { return Json::array({s.begin, s.end}); }

}  // namespace

Json to_json(const CaseFrame& f) {
  Json slots = Json::object();
  for (const auto& [k, v] : f.slots) slots[std::string(to_string(k))] = v;
  Json scores = Json::object();
  for (const auto& [k, v] : f.scores) scores[std::string(to_string(k))] = v;
  Json residue = Json::array();
  for (const auto& s : f.residue) residue.push_back(span_json(s));
  return {{"slots", slots}, {"scores", scores}, {"speech_act", std::string(to_string(f.speech_act))},
          {"residue", residue}};
}

CaseFrame frame_from_json(const Json& j) {
  CaseFrame f;
  for (const auto& [k, v] : j.at("slots").items()) {
    const auto kind = concept_kind_from(k);
    if (!kind) throw std::invalid_argument("unknown frame slot '" + k + "'");
    f.slots[*kind] = v.get<std::string>();
  }
  if (j.contains("scores")) {
    for (const auto& [k, v] : j.at("scores").items()) {
      if (auto kind = concept_kind_from(k)) f.scores[*kind] = v.get<double>();
    }
  }
  f.speech_act = speech_act_from(j.at("speech_act").get<std::string>());
  if (j.contains("residue")) {
    for (const auto& s : j.at("residue")) f.residue.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>()});
  }
  return f;
}

Json to_json(const Concept& c) {
  return {{"kind", std::string(to_string(c.kind))}, {"value", c.value}, {"span", span_json(c.span)}, {"score", c.score}};
}

Json to_json(const NoiseConfig& n) {
  return {{"p_sub", n.p_sub},
          {"p_del", n.p_del},
          {"p_ins", n.p_ins},
          {"confusability", n.confusability},
          {"max_alternatives", n.max_alternatives}};
}

NoiseConfig noise_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("noise must be an object");
  NoiseConfig n;
  for (const auto& [k, v] : j.items()) {
    if (k == "p_sub") {
      n.p_sub = v.get<double>();
    } else if (k == "p_del") {
      n.p_del = v.get<double>();
    } else if (k == "p_ins") {
      n.p_ins = v.get<double>();
    } else if (k == "confusability") {
      n.confusability = v.get<std::string>();
    } else if (k == "max_alternatives") {
      n.max_alternatives = v.get<std::size_t>();
    } else {
      throw ConfigError("unknown noise field '" + k + "'");
    }
  }
  n.validate();
  return n;
}

Json to_json(const ConfusionNetwork& cn) {
  Json slots = Json::array();
  for (const auto& s : cn.slots) {
    Json alts = Json::array();
    for (const auto& a : s.alternatives) alts.push_back({{"word", a.word}, {"score", a.score}, {"epsilon", a.is_epsilon()}});
    slots.push_back({{"alternatives", alts}, {"insertion", s.insertion}});
  }
  Json j = {{"seed", cn.seed}, {"slots", slots}};
  if (cn.reference) j["reference"] = *cn.reference;
  return j;
}

Json to_json(const DecodeResult& r) {
  return {{"ok", r.ok},
          {"failure", r.failure},
          {"mode", r.mode == DecodeMode::continuous ? "continuous" : "isolated"},
          {"words", r.words},
          {"per_word_scores", r.per_word_scores},
          {"boundary_score", r.boundary_score},
          {"total_log_score", r.total_log_score}};
}

Json to_json(const DialogueAct& act) {
  Json values = Json::object();
  for (const auto& [s, v] : act.values) values[std::string(to_string(s))] = v;
  Json conns = Json::array();
  for (const auto& c : act.connections) {
    conns.push_back({{"departure", c.departure},
                     {"arrival", c.arrival},
                     {"departs", format_clock(c.departs)},
                     {"arrives", format_clock(c.arrives)},
                     {"main", c.main}});
  }
  Json j = {{"act_type", std::string(to_string(act.type))},
            {"text", act.text},
            {"referenced_slots", slot_list(act.referenced_slots)},
            {"values", values},
            {"isolated", act.isolated},
            {"connections", conns}};
  j["asks"] = act.asks ? Json(std::string(to_string(*act.asks))) : Json(nullptr);
  return j;
}

Json to_json(const Expectation& e) {
  Json kinds = Json::array();
  for (auto k : e.expected_kinds) kinds.push_back(std::string(to_string(k)));
  return {{"expected_kinds", kinds},
          {"predicted_classes", e.predicted_classes},
          {"state_tag", e.state_tag},
          {"strength", e.strength == Expectation::Strength::strict ? "strict" : "permissive"},
          {"isolated", e.isolated}};
}

Json to_json(const TurnAnalysis& a) {
  auto fills = [](const std::vector<TurnAnalysis::Fill>& v) {
    Json arr = Json::array();
    for (const auto& f : v) arr.push_back({{"slot", std::string(to_string(f.slot))}, {"value", f.value}, {"score", f.score}});
    return arr;
  };
  Json unexpected = Json::array();
  for (const auto& c : a.unexpected) unexpected.push_back(to_json(c));
  return {{"symptom", std::string(to_string(a.symptom))},
          {"speech_act", std::string(to_string(a.speech_act))},
          {"matched", fills(a.matched)},
          {"corrections", fills(a.corrections)},
          {"denied", slot_list(a.denied)},
          {"affirmed", slot_list(a.affirmed)},
          {"unexpected", unexpected}};
}

Json to_json(const TurnLogEntry& e) {
  Json slots = Json::object();
  for (Slot s : kSlots) {
    const auto& ss = e.slots_after[static_cast<std::size_t>(s)];
    slots[std::string(to_string(s))] = {{"value", ss.value}, {"status", std::string(to_string(ss.status))},
                                        {"relaxed", ss.relaxed}};
  }
  Json j = {{"index", e.index},
            {"prompt", to_json(e.prompt)},
            {"expectation", to_json(e.expectation)},
            {"lm_tag", e.lm_tag},
            {"user_text", e.user_text},
            {"reference_words", e.reference_words},
            {"decode", to_json(e.decode)},
            {"case_frame", to_json(e.frame)},
            {"analysis", to_json(e.analysis)},
            {"symptom", std::string(to_string(e.analysis.symptom))},
            {"response", to_json(e.response)},
            {"slots_after", slots},
            {"phenomena", e.phenomena}};
  j["network"] = e.network ? to_json(*e.network) : Json(nullptr);
  return j;
}

Json state_view(const DialogueState& st) {
  Json slots = Json::object();
  for (Slot s : kSlots) {
    const auto& ss = st.slot(s);
    const auto i = static_cast<std::size_t>(s);
    slots[std::string(to_string(s))] = {{"value", ss.value},
                                        {"status", std::string(to_string(ss.status))},
                                        {"score", ss.score},
                                        {"relaxed", ss.relaxed},
                                        {"failure_counter", st.failure_counters[i]},
                                        {"repair_attempts", st.repair_attempts[i]}};
  }
  Json j = {{"slots", slots},
            {"focus", std::string(to_string(st.focus))},
            {"phase", std::string(to_string(st.phase))},
            {"outcome", std::string(to_string(st.outcome))},
            {"expectation", to_json(st.expectation)},
            {"pending", slot_list(st.pending)},
            {"confirm_targets", slot_list(st.confirm_targets)},
            {"isolated", st.isolated},
            {"turns", st.turns},
            {"last_act", to_json(st.last_act)}};
  if (st.query) {
    j["query"] = {{"departure", st.query->departure},
                  {"arrival", st.query->arrival},
                  {"date", format_iso_date(st.query->date)},
                  {"time", st.query->time},
                  {"relaxed", st.query->relaxed}};
  } else {
    j["query"] = nullptr;
  }
  return j;
}

Json to_json(const SubsetStats& s) {
  return {{"utterances", s.utterances},
          {"reference_words", s.counts.reference},
          {"substitutions", s.counts.substitutions},
          {"deletions", s.counts.deletions},
          {"insertions", s.counts.insertions},
          {"understood", s.understood},
          {"wa", s.wa()},
          {"su", s.su()}};
}

Json to_json(const EvalReport& r) {
  Json per = Json::object();
  for (const auto& [k, v] : r.per_phenomenon) per[k] = to_json(v);
  Json dist = Json::object();
  for (Outcome o : {Outcome::S, Outcome::SC, Outcome::SF, Outcome::UF}) dist[std::string(to_string(o))] = r.outcome_rate(o);
  return {{"dialogues", r.dialogues},
          {"wa", r.all.wa()},
          {"su", r.all.su()},
          {"su_partial", r.su_partial},
          {"all_utterances", to_json(r.all)},
          {"without_phenomena", to_json(r.without_phenomena)},
          {"per_phenomenon", per},
          {"outcome_counts", r.outcome_counts},
          {"outcome_distribution", dist},
          {"success_rate", r.success_rate},
          {"upper_bound_success_rate", r.upper_bound_success_rate},
          {"ir", r.recovery.ir},
          {"er", r.recovery.er},
          {"miscommunications", r.recovery.miscommunications},
          {"ca", r.ca},
          {"mean_turns", r.mean_turns},
          {"mean_turns_to_query", r.mean_turns_to_query},
          {"component_errors", r.errors}};
}

Json to_json(const DialogueRecord& r) {
  Json utts = Json::array();
  for (const auto& u : r.utterances) {
    utts.push_back({{"reference_text", u.reference_text},
                    {"reference_tokens", u.reference_tokens},
                    {"hypothesis_tokens", u.hypothesis_tokens},
                    {"reference_frame", to_json(u.reference_frame)},
                    {"hypothesis_frame", to_json(u.hypothesis_frame)},
                    {"phenomena", u.phenomena},
                    {"state_tag", u.state_tag}});
  }
  Json acts = Json::array();
  for (const auto& [t, text] : r.system_acts) acts.push_back({{"act_type", t}, {"text", text}});
  Json ann = Json::array();
  for (const auto& a : r.annotations) {
    ann.push_back({{"appropriate", a.appropriate},
                   {"miscommunication", a.miscommunication},
                   {"recovery", std::string(to_string(a.recovery))}});
  }
  Json acquired = Json::object();
  for (const auto& [s, v] : r.acquired) acquired[std::string(to_string(s))] = v;
  const auto& sc = r.scenario;
  return {{"id", r.id},
          {"scenario",
           {{"id", sc.id}, {"departure", sc.departure}, {"arrival", sc.arrival}, {"date", sc.date}, {"time", sc.time},
            {"call", sc.call}}},
          {"persona", std::string(to_string(r.persona))},
          {"cooperative", r.cooperative},
          {"seed", r.seed},
          {"condition", r.condition},
          {"utterances", utts},
          {"system_acts", acts},
          {"symptoms", r.symptoms},
          {"annotations", ann},
          {"query_executed", r.query_executed},
          {"acquired", acquired},
          {"relaxed", r.relaxed},
          {"dm_outcome", std::string(to_string(r.dm_outcome))},
          {"outcome", std::string(to_string(r.outcome))},
          {"turns", r.turns},
          {"turns_to_query", r.turns_to_query ? Json(*r.turns_to_query) : Json(nullptr)},
          {"error", r.error}};
}

DialogueRecord record_from_json(const Json& j) {
  DialogueRecord r;
  r.id = j.at("id").get<std::string>();
  if (j.contains("scenario") && !j.at("scenario").is_null()) {
    const auto& s = j.at("scenario");
    r.scenario = {s.at("id").get<std::string>(),   s.at("departure").get<std::string>(),
                  s.at("arrival").get<std::string>(), s.at("date").get<std::string>(),
                  s.at("time").get<std::string>(),  s.value("call", std::string("scripted"))};
  }
  const auto persona = persona_from(j.at("persona").get<std::string>());
  if (!persona) throw std::invalid_argument("unknown persona in record " + r.id);
  r.persona = *persona;
  r.cooperative = j.at("cooperative").get<bool>();
  r.seed = j.value("seed", std::uint64_t{0});
  r.condition = j.value("condition", std::string());
  for (const auto& u : j.at("utterances")) {
    UtteranceRecord ur;
    ur.reference_text = u.value("reference_text", std::string());
    ur.reference_tokens = u.at("reference_tokens").get<std::vector<std::string>>();
    ur.hypothesis_tokens = u.at("hypothesis_tokens").get<std::vector<std::string>>();
    ur.reference_frame = frame_from_json(u.at("reference_frame"));
    ur.hypothesis_frame = frame_from_json(u.at("hypothesis_frame"));
    ur.phenomena = u.value("phenomena", std::vector<std::string>{});
    for (const auto& p : ur.phenomena) {
      if (std::find(std::begin(kPhenomena), std::end(kPhenomena), p) == std::end(kPhenomena)) {
        throw std::invalid_argument("unknown phenomenon '" + p + "' in record " + r.id);
      }
    }
    ur.state_tag = u.value("state_tag", std::string());
    r.utterances.push_back(std::move(ur));
  }
  if (j.contains("system_acts")) {
    for (const auto& a : j.at("system_acts")) {
      r.system_acts.emplace_back(a.at("act_type").get<std::string>(), a.at("text").get<std::string>());
    }
  }
  r.symptoms = j.value("symptoms", std::vector<std::string>{});
  if (j.contains("annotations")) {
    for (const auto& a : j.at("annotations")) {
      TurnAnnotation ta;
      ta.appropriate = a.at("appropriate").get<bool>();
      ta.miscommunication = a.at("miscommunication").get<bool>();
      const auto rec = recovery_from(a.at("recovery").get<std::string>());
      if (!rec) throw std::invalid_argument("unknown recovery label in record " + r.id);
      ta.recovery = *rec;
      r.annotations.push_back(ta);
    }
  }
  r.query_executed = j.value("query_executed", false);
  if (j.contains("acquired")) {
    for (const auto& [k, v] : j.at("acquired").items()) {
      const auto s = slot_from(k);
      if (!s) throw std::invalid_argument("unknown slot '" + k + "' in record " + r.id);
      r.acquired[*s] = v.get<std::string>();
    }
  }
  if (j.contains("relaxed")) {
    for (const auto& v : j.at("relaxed")) r.relaxed.insert(v.get<std::string>());
  }
  r.dm_outcome = outcome_from(j.value("dm_outcome", std::string("open"))).value_or(Outcome::open);
  const auto outcome = outcome_from(j.value("outcome", std::string("open")));
  r.outcome = outcome.value_or(Outcome::open);
  r.turns = j.value("turns", 0);
  if (j.contains("turns_to_query") && !j.at("turns_to_query").is_null()) r.turns_to_query = j.at("turns_to_query").get<int>();
  r.error = j.value("error", std::string());
  return r;
}

Json to_json(const TrialCondition& c) {
  Json tags = Json::object();
  for (const auto& [k, v] : c.tag_noise) tags[k] = to_json(v);
  return {{"name", c.name}, {"noise", to_json(c.noise)}, {"tag_noise", tags}, {"state_lm", c.state_lm}};
}

Json to_json(const RuntimeStats& s) {
  return {{"seconds", s.seconds},
          {"threads", s.threads},
          {"dialogues", s.dialogues},
          {"turns", s.turns},
          {"dialogues_per_second", s.seconds > 0 ? static_cast<double>(s.dialogues) / s.seconds : 0.0}};
}

Json trial_report(const TrialConfig& config, const TrialResult& result) {
  Json conds = Json::array();
  for (std::size_t i = 0; i < config.conditions.size(); ++i) {
    conds.push_back({{"condition", to_json(config.conditions[i])}, {"report", to_json(result.per_condition.at(i))}});
  }
  Json personas = Json::array();
  for (Persona p : config.personas) personas.push_back(std::string(to_string(p)));
  Json scenarios = Json::array();
  for (const auto& s : config.scenarios) scenarios.push_back(s.id);
  return {{"config", {{"scenarios", scenarios}, {"personas", personas}, {"seeds", config.seeds}}},
          {"conditions", conds},
          {"overall", to_json(result.overall)}};
}

void write_corpus(std::ostream& out, const std::vector<DialogueRecord>& records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

std::vector<DialogueRecord> read_corpus_jsonl(std::istream& in) {
  std::vector<DialogueRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      out.push_back(record_from_json(Json::parse(line)));
    } catch (const std::exception& e) {
      throw LoadError("<corpus>", lineno, e.what());
    }
  }
  return out;
}

}  // namespace railtalk
