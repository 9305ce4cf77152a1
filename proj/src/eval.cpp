#include "railtalk/eval.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace railtalk {

AlignmentCounts& AlignmentCounts::operator+=(const AlignmentCounts& o) {
  reference += o.reference;
  substitutions += o.substitutions;
  deletions += o.deletions;
  insertions += o.insertions;
  return *this;
}

AlignmentCounts align_words(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  // Cell cost is (edits, insertions + deletions), compared lexicographically.
  using Cost = std::pair<std::size_t, std::size_t>;
  std::vector<Cost> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> Cost& { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = {i, i};
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = {j, j};
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const bool same = ref[i - 1] == hyp[j - 1];
      Cost diag = at(i - 1, j - 1);
      if (!same) diag.first += 1;
      Cost del = at(i - 1, j);
      del.first += 1;
      del.second += 1;
      Cost ins = at(i, j - 1);
      ins.first += 1;
      ins.second += 1;
      at(i, j) = std::min({diag, del, ins});
    }
  }
  AlignmentCounts c;
  c.reference = n;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const Cost here = at(i, j);
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      Cost diag = at(i - 1, j - 1);
      if (!same) diag.first += 1;
      if (diag == here) {
        if (!same) ++c.substitutions;
        --i;
        --j;
        continue;
      }
    }
    if (i > 0) {
      Cost del = at(i - 1, j);
      del.first += 1;
      del.second += 1;
      if (del == here) {
        ++c.deletions;
        --i;
        continue;
      }
    }
    ++c.insertions;
    --j;
  }
  return c;
}

double word_accuracy(const AlignmentCounts& c) {
  if (c.reference == 0) throw std::invalid_argument("word accuracy is undefined for an empty reference");
  return (static_cast<double>(c.reference) - static_cast<double>(c.errors())) / static_cast<double>(c.reference);
}

double word_accuracy(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  if (ref.empty()) throw std::invalid_argument("word accuracy is undefined for an empty reference");
  return word_accuracy(align_words(ref, hyp));
}

bool sentence_understanding(const CaseFrame& a, const CaseFrame& b) {
  return a.slots == b.slots && a.speech_act == b.speech_act;
}

double partial_understanding(const CaseFrame& a, const CaseFrame& b) {
  std::set<std::pair<std::string, std::string>> x, y;
  for (const auto& [k, v] : a.slots) x.emplace(std::string(to_string(k)), v);
  for (const auto& [k, v] : b.slots) y.emplace(std::string(to_string(k)), v);
  if (a.speech_act != SpeechAct::empty) x.emplace("speech_act", std::string(to_string(a.speech_act)));
  if (b.speech_act != SpeechAct::empty) y.emplace("speech_act", std::string(to_string(b.speech_act)));
  std::size_t shared = 0;
  for (const auto& p : x) shared += y.count(p);
  const std::size_t uni = x.size() + y.size() - shared;
  return uni == 0 ? 1.0 : static_cast<double>(shared) / static_cast<double>(uni);
}

std::string_view to_string(Recovery r) {
  switch (r) {
    case Recovery::none: return "none";
    case Recovery::explicit_repair: return "explicit";
    case Recovery::implicit_repair: return "implicit";
    case Recovery::unrecovered: return "unrecovered";
  }
  return "?";
}

std::optional<Recovery> recovery_from(std::string_view name) {
  for (Recovery r : {Recovery::none, Recovery::explicit_repair, Recovery::implicit_repair, Recovery::unrecovered}) {
    if (to_string(r) == name) return r;
  }
  return std::nullopt;
}

Outcome classify_dialogue(const DialogueRecord& r) {
  if (r.scenario.id.empty()) throw std::invalid_argument("dialogue record " + r.id + " has no scenario");
  if (r.error.empty() && r.query_executed) {
    auto ok = [&](Slot s) {
      const auto it = r.acquired.find(s);
      return it != r.acquired.end() && value_matches(s, it->second, r.scenario);
    };
    const bool cities = ok(Slot::departure) && ok(Slot::arrival);
    if (cities && r.relaxed.empty() && ok(Slot::date) && ok(Slot::time)) return Outcome::S;
    const bool relax_ok = !r.relaxed.empty() && std::all_of(r.relaxed.begin(), r.relaxed.end(), [](const std::string& s) {
      return s == "date" || s == "time";
    });
    if (cities && relax_ok && (r.relaxed.contains("date") || ok(Slot::date)) &&
        (r.relaxed.contains("time") || ok(Slot::time))) {
      return Outcome::SC;
    }
  }
  return r.cooperative ? Outcome::SF : Outcome::UF;
}

namespace {

bool slot_correct(const SlotState& s, Slot slot, const Scenario& sc) {
  return s.status != SlotStatus::empty && value_matches(slot, s.value, sc);
}

bool slot_wrong(const SlotState& s, Slot slot, const Scenario& sc) {
  return s.status != SlotStatus::empty && !value_matches(slot, s.value, sc);
}

bool act_appropriate(const DialogueAct& act, const std::array<SlotState, 4>& before, const Scenario& sc) {
  if (act.type == ActType::close) return false;
  for (const auto& [slot, value] : act.values) {
    if (act.type == ActType::answer && (slot == Slot::date || slot == Slot::time)) {
      const auto& s = before[static_cast<std::size_t>(slot)];
      if (s.relaxed) continue;
    }
    if (!value.empty() && !value_matches(slot, value, sc) && value != kMainConnections) return false;
  }
  if (act.asks) {
    const auto& s = before[static_cast<std::size_t>(*act.asks)];
    if (s.status == SlotStatus::confirmed && value_matches(*act.asks, s.value, sc)) return false;
  }
  return true;
}

std::optional<Slot> turn_focus(const TurnLogEntry& e) {
  if (e.prompt.asks) return e.prompt.asks;
  if (!e.prompt.referenced_slots.empty()) return e.prompt.referenced_slots.front();
  return std::nullopt;
}

}  // namespace

std::vector<TurnAnnotation> annotate_turns(const std::vector<TurnLogEntry>& log, const Scenario& sc) {
  std::vector<TurnAnnotation> out(log.size());
  std::array<SlotState, 4> before{};
  for (std::size_t t = 0; t < log.size(); ++t) {
    const auto& e = log[t];
    out[t].appropriate = act_appropriate(e.response, e.slots_after, sc);

    std::vector<Slot> affected;
    if (e.analysis.symptom == Symptom::non_understanding) {
      if (auto f = turn_focus(e)) affected.push_back(*f);
    }
    for (Slot s : kSlots) {
      const auto i = static_cast<std::size_t>(s);
      const bool now_wrong = slot_wrong(e.slots_after[i], s, sc);
      const bool changed = e.slots_after[i].value != before[i].value || before[i].status == SlotStatus::empty;
      if (now_wrong && changed && std::find(affected.begin(), affected.end(), s) == affected.end()) {
        affected.push_back(s);
      }
    }
    if (e.analysis.symptom == Symptom::non_understanding && affected.empty()) affected.push_back(Slot::departure);
    if (!affected.empty()) {
      out[t].miscommunication = true;
      out[t].recovery = Recovery::unrecovered;
      // Recovered once every affected slot holds a correct value again.
      for (std::size_t u = t + 1; u < log.size(); ++u) {
        const bool fixed = std::all_of(affected.begin(), affected.end(), [&](Slot s) {
          return slot_correct(log[u].slots_after[static_cast<std::size_t>(s)], s, sc);
        });
        if (!fixed) continue;
        bool explicit_path = false;
        for (std::size_t v = t; v < u; ++v) {
          const auto& act = log[v].response;
          for (Slot s : affected) {
            const bool refs = std::find(act.referenced_slots.begin(), act.referenced_slots.end(), s) !=
                              act.referenced_slots.end();
            if ((act.type == ActType::explicit_confirm && refs) ||
                (act.type == ActType::repair_request && act.asks == s)) {
              explicit_path = true;
            }
          }
        }
        out[t].recovery = explicit_path ? Recovery::explicit_repair : Recovery::implicit_repair;
        break;
      }
    }
    before = e.slots_after;
  }
  return out;
}

RecoveryMetrics recovery_metrics(const std::vector<DialogueRecord>& records, std::vector<std::string>* warnings) {
  RecoveryMetrics m;
  for (const auto& r : records) {
    if (r.annotations.empty() && !r.utterances.empty()) {
      ++m.excluded;
      if (warnings) warnings->push_back("record " + r.id + " has no annotations; excluded from IR/ER");
      continue;
    }
    for (const auto& a : r.annotations) {
      if (!a.miscommunication) continue;
      ++m.miscommunications;
      if (a.recovery == Recovery::explicit_repair) ++m.explicit_recoveries;
      if (a.recovery == Recovery::implicit_repair) ++m.implicit_recoveries;
    }
  }
  if (m.miscommunications > 0) {
    m.er = static_cast<double>(m.explicit_recoveries) / static_cast<double>(m.miscommunications);
    m.ir = static_cast<double>(m.implicit_recoveries) / static_cast<double>(m.miscommunications);
  }
  return m;
}

double SubsetStats::wa() const { return counts.reference == 0 ? 0.0 : word_accuracy(counts); }

double SubsetStats::su() const {
  return utterances == 0 ? 0.0 : static_cast<double>(understood) / static_cast<double>(utterances);
}

double EvalReport::outcome_rate(Outcome o) const {
  if (dialogues == 0) return 0.0;
  const auto it = outcome_counts.find(std::string(to_string(o)));
  return it == outcome_counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(dialogues);
}

EvalReport aggregate(const std::vector<DialogueRecord>& records) {
  EvalReport rep;
  rep.dialogues = records.size();
  for (Outcome o : {Outcome::S, Outcome::SC, Outcome::SF, Outcome::UF}) rep.outcome_counts[std::string(to_string(o))] = 0;
  std::vector<double> partials;
  std::size_t appropriate = 0, turns = 0, query_turns = 0, queried = 0;
  for (const auto& r : records) {
    ++rep.outcome_counts[std::string(to_string(r.outcome))];
    if (!r.error.empty()) ++rep.errors;
    turns += static_cast<std::size_t>(r.turns);
    if (r.turns_to_query) {
      ++queried;
      query_turns += static_cast<std::size_t>(*r.turns_to_query);
    }
    for (const auto& a : r.annotations) {
      ++rep.annotated_acts;
      if (a.appropriate) ++appropriate;
    }
    for (const auto& u : r.utterances) {
      if (u.reference_tokens.empty()) continue;
      const auto counts = align_words(u.reference_tokens, u.hypothesis_tokens);
      const bool understood = sentence_understanding(u.reference_frame, u.hypothesis_frame);
      auto add = [&](SubsetStats& s) {
        ++s.utterances;
        s.counts += counts;
        if (understood) ++s.understood;
      };
      add(rep.all);
      if (u.phenomena.empty()) {
        add(rep.without_phenomena);
      } else {
        for (const auto& p : u.phenomena) add(rep.per_phenomenon[p]);
      }
      partials.push_back(partial_understanding(u.reference_frame, u.hypothesis_frame));
    }
  }
  std::sort(partials.begin(), partials.end());
  double psum = 0.0;
  for (double p : partials) psum += p;
  rep.su_partial = partials.empty() ? 0.0 : psum / static_cast<double>(partials.size());

  const std::size_t success = rep.outcome_counts["S"] + rep.outcome_counts["SC"];
  if (rep.dialogues > 0) {
    rep.success_rate = static_cast<double>(success) / static_cast<double>(rep.dialogues);
    rep.mean_turns = static_cast<double>(turns) / static_cast<double>(rep.dialogues);
  }
  const std::size_t without_uf = rep.dialogues - rep.outcome_counts["UF"];
  if (without_uf > 0) rep.upper_bound_success_rate = static_cast<double>(success) / static_cast<double>(without_uf);
  if (queried > 0) rep.mean_turns_to_query = static_cast<double>(query_turns) / static_cast<double>(queried);
  if (rep.annotated_acts > 0) rep.ca = static_cast<double>(appropriate) / static_cast<double>(rep.annotated_acts);
  rep.recovery = recovery_metrics(records);
  return rep;
}

DialogueRecord run_dialogue(const Resources& r, const Scenario& sc, Persona persona, const TrialCondition& cond,
                            std::uint64_t seed) {
  DialogueRecord rec;
  rec.id = cond.name + "/" + std::to_string(seed) + "/" + sc.id + "/" + std::string(to_string(persona));
  rec.scenario = sc;
  rec.persona = persona;
  rec.cooperative = is_cooperative(persona);
  rec.seed = seed;
  rec.condition = cond.name;

  const std::uint64_t dseed = mix_seed(seed, fnv1a(sc.id + "/" + std::string(to_string(persona))));
  Rng user_rng(mix_seed(dseed, 0));
  PipelineOptions options{cond.noise, cond.tag_noise, cond.state_lm};
  const double base_level = cond.noise.p_sub + cond.noise.p_del + cond.noise.p_ins;

  DialogueState st = start_session(r.strategy);
  rec.system_acts.emplace_back(std::string(to_string(st.last_act.type)), st.last_act.text);
  try {
    for (std::uint64_t t = 1; st.open(); ++t) {
      UserTurn u = simulate_user(persona, sc, st.last_act, r.lexicon, r.strategy.session_date, user_rng);
      if (u.ends_call) break;
      const NoiseConfig& nz = options.noise_for(st.expectation.state_tag);
      if (nz.p_sub + nz.p_del + nz.p_ins > base_level) u.phenomena.push_back("shout-surrogate");
      run_turn(st, r, u.text, options, mix_seed(dseed, t));
      st.turn_log.back().phenomena = u.phenomena;
      const auto& resp = st.turn_log.back().response;
      rec.system_acts.emplace_back(std::string(to_string(resp.type)), resp.text);
    }
  } catch (const std::exception& e) {
    rec.error = e.what();
  }

  const ParseContext pc{&r.lexicon, r.strategy.session_date};
  for (const auto& e : st.turn_log) {
    UtteranceRecord u;
    u.reference_text = e.user_text;
    u.reference_tokens = e.reference_words;
    u.hypothesis_tokens = e.decode.words;
    u.reference_frame = parse_utterance(tokens_from_words(e.reference_words, r.lexicon), r.grammar, pc).frame;
    u.hypothesis_frame = e.frame;
    u.phenomena = e.phenomena;
    u.state_tag = e.expectation.state_tag;
    rec.utterances.push_back(std::move(u));
    rec.symptoms.emplace_back(to_string(e.analysis.symptom));
  }
  rec.turns = static_cast<int>(st.turn_log.size());
  rec.annotations = annotate_turns(st.turn_log, sc);
  rec.dm_outcome = rec.error.empty() ? st.outcome : Outcome::SF;
  rec.query_executed = rec.error.empty() && st.query.has_value() && !st.results.empty();
  if (st.query) {
    rec.acquired = {{Slot::departure, st.query->departure},
                    {Slot::arrival, st.query->arrival},
                    {Slot::date, format_iso_date(st.query->date)},
                    {Slot::time, st.query->time}};
    rec.relaxed = st.query->relaxed;
    rec.turns_to_query = rec.turns;
  }
  rec.outcome = classify_dialogue(rec);
  return rec;
}

namespace {

struct Job {
  std::size_t condition, seed, scenario, persona;
};

std::vector<Job> jobs_of(const TrialConfig& c) {
  std::vector<Job> jobs;
  jobs.reserve(c.dialogues());
  for (std::size_t k = 0; k < c.conditions.size(); ++k) {
    for (std::size_t s = 0; s < c.seeds.size(); ++s) {
      for (std::size_t i = 0; i < c.scenarios.size(); ++i) {
        for (std::size_t p = 0; p < c.personas.size(); ++p) jobs.push_back({k, s, i, p});
      }
    }
  }
  return jobs;
}

DialogueRecord run_job(const Resources& r, const TrialConfig& c, const Job& j) {
  return run_dialogue(r, c.scenarios[j.scenario], c.personas[j.persona], c.conditions[j.condition], c.seeds[j.seed]);
}

TrialResult summarize(const TrialConfig& c, std::vector<DialogueRecord> records) {
  TrialResult res;
  res.records = std::move(records);
  for (const auto& cond : c.conditions) {
    std::vector<DialogueRecord> subset;
    for (const auto& r : res.records) {
      if (r.condition == cond.name) subset.push_back(r);
    }
    res.per_condition.push_back(aggregate(subset));
  }
  res.overall = aggregate(res.records);
  res.runtime.dialogues = res.records.size();
  for (const auto& r : res.records) res.runtime.turns += static_cast<std::size_t>(r.turns);
  return res;
}

void check_conditions(const TrialConfig& c) {
  std::set<std::string> names;
  for (const auto& cond : c.conditions) {
    if (!names.insert(cond.name).second) throw std::invalid_argument("duplicate trial condition '" + cond.name + "'");
  }
}

}  // namespace

TrialResult run_trial_serial(const Resources& r, const TrialConfig& c) {
  check_conditions(c);
  const auto start = std::chrono::steady_clock::now();
  const auto jobs = jobs_of(c);
  std::vector<DialogueRecord> records;
  records.reserve(jobs.size());
  for (const auto& j : jobs) records.push_back(run_job(r, c, j));
  TrialResult res = summarize(c, std::move(records));
  res.runtime.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  res.runtime.threads = 1;
  return res;
}

TrialResult run_trial_parallel(const Resources& r, const TrialConfig& c, int threads) {
  check_conditions(c);
  const auto start = std::chrono::steady_clock::now();
  const auto jobs = jobs_of(c);
  std::vector<DialogueRecord> records(jobs.size());
  const int n = threads > 0 ? threads : omp_get_max_threads();
  const auto count = static_cast<std::ptrdiff_t>(jobs.size());
#pragma omp parallel for schedule(dynamic) num_threads(n)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    records[static_cast<std::size_t>(i)] = run_job(r, c, jobs[static_cast<std::size_t>(i)]);
  }
  TrialResult res = summarize(c, std::move(records));
  res.runtime.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  res.runtime.threads = n;
  return res;
}

NoiseConfig parse_noise(std::string_view spec) {
  NoiseConfig n;
  for (const auto& part : split(spec, ',')) {
    const std::string item = trim(part);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("noise spec item '" + item + "' lacks '='");
    const std::string key = trim(item.substr(0, eq));
    const std::string val = trim(item.substr(eq + 1));
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(val, &used);
      if (used != val.size()) throw std::invalid_argument(val);
    } catch (const std::exception&) {
      throw ConfigError("noise spec value '" + val + "' is not a number");
    }
    if (key == "p_sub") {
      n.p_sub = v;
    } else if (key == "p_del") {
      n.p_del = v;
    } else if (key == "p_ins") {
      n.p_ins = v;
    } else if (key == "max_alternatives") {
      n.max_alternatives = static_cast<std::size_t>(v);
    } else {
      throw ConfigError("unknown noise parameter '" + key + "'");
    }
  }
  n.validate();
  return n;
}

}  // namespace railtalk
