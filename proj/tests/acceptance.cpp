// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <unistd.h>

#include "oracles.hpp"
#include "railtalk/json_io.hpp"
#include "railtalk/state_tags.hpp"

#ifndef RAILTALK_CLI
#define RAILTALK_CLI "railtalk"
#endif

using namespace railtalk;

namespace {

// Pinned tolerances and sizes.
constexpr int kDecoderCases = 1000;
constexpr double kDecoderSeconds = 60.0;
constexpr double kScoreTolerance = 1e-9;
constexpr int kWaCases = 200;
constexpr int kConflictCases = 500;
constexpr int kLmCorpora = 100;
constexpr double kNormTolerance = 1e-9;
constexpr int kMaxCleanTurns = 10;
constexpr std::size_t kStateSentences = 400;
constexpr std::size_t kHeldoutSentences = 100;
constexpr std::uint64_t kTrialSeeds = 25;  // x 20 scenarios = 500 dialogues
constexpr double kInversionPoints = 0.01;
constexpr double kMinSC = 0.90;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1e", v);
  return buf;
}

std::vector<Scenario> scenarios() { return load_scenarios(oracle::data_dir() / "scenarios.tsv"); }

std::vector<std::uint64_t> seed_range(std::uint64_t n) {
  std::vector<std::uint64_t> s;
  for (std::uint64_t i = 1; i <= n; ++i) s.push_back(i);
  return s;
}

TrialResult trial(std::vector<TrialCondition> conditions, std::vector<Persona> personas, std::uint64_t seeds) {
  TrialConfig c;
  c.scenarios = scenarios();
  c.personas = std::move(personas);
  c.conditions = std::move(conditions);
  c.seeds = seed_range(seeds);
  return run_trial_parallel(oracle::shipped(), c);
}

Verdict decoder_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1001);
  int mismatches = 0;
  for (int i = 0; i < kDecoderCases; ++i) {
    const auto d = oracle::random_domain(rng.next(), 30);
    const auto lm = train_class_bigram(d->corpus, d->lexicon, {0.7, 1e-7});
    const auto cn = oracle::random_network(rng, d->words, 8, 5);
    DecodeOptions opt;
    opt.alpha = rng.chance(0.5) ? 1.0 : 0.5;
    if (rng.chance(0.3)) opt.class_bonus[d->lexicon.class_of(rng.pick(d->words))] = 0.5;
    const auto got = decode_continuous(cn, lm, opt);
    const auto want = oracle::enumerate_decode(cn, lm, opt);
    if (!got.ok || got.words != want.words || std::abs(got.total_log_score - want.total) > kScoreTolerance) {
      ++mismatches;
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < kDecoderSeconds,
          std::to_string(kDecoderCases) + " networks, " + std::to_string(mismatches) + " mismatches, " +
              fmt(secs, 1) + " s"};
}

Verdict wa_oracle() {
  static const std::vector<std::string> vocab = {"milan", "rome", "to", "from", "on"};
  Rng rng(2002);
  int mismatches = 0;
  for (int i = 0; i < kWaCases; ++i) {
    std::vector<std::string> ref(1 + rng.below(12)), hyp(rng.below(13));
    for (auto& w : ref) w = rng.pick(vocab);
    for (auto& w : hyp) w = rng.pick(vocab);
    if (word_accuracy(ref, hyp) != oracle::brute_force_wa(ref, hyp)) ++mismatches;
  }
  return {mismatches == 0, std::to_string(kWaCases) + " pairs, " + std::to_string(mismatches) + " mismatches"};
}

Verdict conflict_oracle() {
  Rng rng(3003);
  int mismatches = 0;
  for (int i = 0; i < kConflictCases; ++i) {
    const auto cs = oracle::random_concepts(rng, 12);
    if (resolve_conflicts(cs).concepts != oracle::brute_force_resolve(cs)) ++mismatches;
  }
  return {mismatches == 0, std::to_string(kConflictCases) + " sets, " + std::to_string(mismatches) + " mismatches"};
}

Verdict lm_normalization() {
  Rng rng(4004);
  double worst = 0.0;
  int non_finite = 0;
  for (int k = 0; k < kLmCorpora; ++k) {
    const auto d = oracle::random_domain(rng.next(), 20 + rng.below(60));
    const double lambda = static_cast<double>(rng.below(11)) / 10.0;
    const auto lm = train_class_bigram(d->corpus, d->lexicon, {lambda, 1e-7});
    for (ClassId h = 0; h < lm.index_size(); ++h) {
      if (h == lm.eos()) continue;
      double sum = 0.0;
      for (ClassId n = 0; n < lm.index_size(); ++n) sum += lm.class_prob(n, h);
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    for (const auto& wc : d->lexicon.classes()) {
      double sum = 0.0;
      for (const auto& w : wc.members) sum += lm.membership(w);
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    // Sentences over known and unknown words, including the empty one.
    for (int s = 0; s < 20; ++s) {
      std::string text;
      for (std::size_t n = rng.below(10); n > 0; --n) text += (rng.chance(0.2) ? "unseen" : rng.pick(d->words)) + " ";
      if (!std::isfinite(sequence_log_prob(lm, tokenize(text, d->lexicon)))) ++non_finite;
    }
  }
  return {worst <= kNormTolerance && non_finite == 0,
          std::to_string(kLmCorpora) + " corpora, max |sum-1| = " + sci(worst) + ", " +
              std::to_string(non_finite) + " non-finite scores"};
}

Verdict noiseless_end_to_end() {
  const auto result = trial({{"clean", {}, {}, true}}, {Persona::cooperative}, 1);
  std::size_t good = 0;
  int max_turns = 0;
  for (const auto& r : result.records) {
    bool ok = r.outcome == Outcome::S && r.turns <= kMaxCleanTurns;
    for (Slot s : kSlots) {
      const auto it = r.acquired.find(s);
      ok = ok && it != r.acquired.end() && value_matches(s, it->second, r.scenario);
    }
    good += ok ? 1 : 0;
    max_turns = std::max(max_turns, r.turns);
  }
  return {result.records.size() == 20 && good == result.records.size(),
          std::to_string(good) + "/" + std::to_string(result.records.size()) +
              " scenarios S with matching parameters, max turns " + std::to_string(max_turns)};
}

Verdict dialogue_lm_direction() {
  const auto& r = oracle::shipped();
  const auto train = generate_training_corpus(r.lexicon, r.strategy.session_date, kStateSentences, 101);
  const auto heldout = generate_training_corpus(r.lexicon, r.strategy.session_date, kHeldoutSentences, 202);
  const auto family = train_dialogue_family(train, r.lexicon, r.strategy.lm);
  bool every_state = true;
  std::string per_state;
  for (auto tag : kStateTags) {
    const auto part = filter_tag(heldout, tag);
    const double state = perplexity(family.select(tag), part);
    const double global = perplexity(family.global(), part);
    every_state = every_state && family.has_state(tag) && state <= global;
    per_state += " " + std::string(tag) + " " + fmt(state, 2) + "/" + fmt(global, 2);
  }

  const NoiseConfig noise = parse_noise("p_sub=0.3");
  const auto result =
      trial({{"state", noise, {}, true}, {"global", noise, {}, false}}, {Persona::cooperative}, kTrialSeeds);
  const double wa_state = result.per_condition[0].all.wa();
  const double wa_global = result.per_condition[1].all.wa();
  return {every_state && wa_state >= wa_global,
          "perplexity state/global:" + per_state + "; trial WA " + fmt(wa_state, 4) + " vs " + fmt(wa_global, 4) +
              " over " + std::to_string(result.per_condition[0].dialogues) + " dialogues each"};
}

Verdict degradation_and_relaxation() {
  std::vector<TrialCondition> sweep;
  for (int k = 0; k <= 5; ++k) {
    const double p = k / 10.0;
    NoiseConfig n;
    n.p_sub = p;
    sweep.push_back({"p_sub=" + fmt(p, 2), n, {}, true});
  }
  const auto curve = trial(sweep, {Persona::cooperative}, kTrialSeeds);
  int inversions = 0;
  double worst = 0.0;
  std::string rates;
  for (std::size_t i = 0; i < curve.per_condition.size(); ++i) {
    const double rate = curve.per_condition[i].success_rate;
    rates += (i ? " " : "") + fmt(rate, 3);
    if (i == 0) continue;
    const double rise = rate - curve.per_condition[i - 1].success_rate;
    if (rise > 0) {
      ++inversions;
      worst = std::max(worst, rise);
    }
  }
  const bool monotone = inversions == 0 || (inversions == 1 && worst <= kInversionPoints + 1e-12);

  // Date and time answers are lost entirely; everything else is clean.
  TrialCondition dt{"date-time-loss", {}, {}, true};
  dt.tag_noise["ask_date"] = parse_noise("p_del=1");
  dt.tag_noise["ask_time"] = parse_noise("p_del=1");
  const auto relaxed = trial({dt}, {Persona::cooperative}, kTrialSeeds);
  std::size_t completed = 0, sc = 0;
  for (const auto& r : relaxed.records) {
    if (!r.query_executed) continue;
    ++completed;
    if (r.outcome == Outcome::SC) ++sc;
  }
  const double share = completed == 0 ? 0.0 : static_cast<double>(sc) / static_cast<double>(completed);
  return {monotone && completed > 0 && share >= kMinSC,
          "success by p_sub 0..0.5 [" + rates + "], " + std::to_string(inversions) + " inversions; SC " +
              std::to_string(sc) + "/" + std::to_string(completed) + " completed (" + fmt(share, 3) + ")"};
}

Verdict isolated_fallback() {
  const auto& r = oracle::shipped();
  auto st = start_session(r.strategy);
  std::vector<bool> switched;
  for (int i = 0; i < 2; ++i) {
    run_turn(st, r, "uhm", PipelineOptions{}, 1);
    switched.push_back(should_switch_isolated(st, r.strategy).has_value());
  }
  const bool at_two = !switched[0] && switched[1] && st.expectation.isolated;
  ConfusionNetwork cn;
  cn.slots.push_back({{{"milam", -0.1}, {"to", -1.5}}, false});
  const auto& e = run_turn_network(st, r, cn, PipelineOptions{});
  const bool from_vocab = e.decode.ok && e.decode.words == std::vector<std::string>{"milan"} &&
                          r.lexicon.tag_of("milan") == "city";
  const bool acquired = st.slot(Slot::departure).value == "milan";
  return {at_two && from_vocab && acquired,
          std::string("switch after failures 1/2: ") + (switched[0] ? "yes" : "no") + "/" +
              (switched[1] ? "yes" : "no") + ", isolated decode of 'milam' -> " +
              (e.decode.words.empty() ? "<none>" : e.decode.words[0])};
}

Verdict phenomena_direction() {
  const auto result = trial({{"p_sub=0.30", parse_noise("p_sub=0.3"), {}, true}},
                            {Persona::cooperative, Persona::restarting, Persona::oov_prone}, 10);
  const auto& rep = result.overall;
  const double wa_all = rep.all.wa(), wa_clean = rep.without_phenomena.wa();
  const double su_all = rep.all.su(), su_clean = rep.without_phenomena.su();
  return {wa_clean >= wa_all && su_clean >= su_all && rep.without_phenomena.utterances < rep.all.utterances,
          "WA " + fmt(wa_clean) + " excl. vs " + fmt(wa_all) + " all; SU " + fmt(su_clean) + " vs " + fmt(su_all) +
              " (" + std::to_string(rep.all.utterances - rep.without_phenomena.utterances) + " of " +
              std::to_string(rep.all.utterances) + " utterances tagged)"};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism() {
  const auto dir = std::filesystem::temp_directory_path() / ("railtalk-accept-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::vector<std::string> reports;
  for (const char* run : {"a", "b"}) {
    const auto out = dir / run;
    const std::string cmd = std::string("\"") + RAILTALK_CLI + "\" --data \"" + oracle::data_dir().string() +
                            "\" trial --quiet --seeds 1-3 --personas cooperative,oov_prone,restarting" +
                            " --noise-sweep 0,0.2,0.4 --out \"" + out.string() + "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "trial command failed: " + cmd};
    reports.push_back(slurp(out / "report.json"));
  }
  std::filesystem::remove_all(dir);
  return {!reports[0].empty() && reports[0] == reports[1],
          "two CLI trial runs, report.json " + std::to_string(reports[0].size()) + " bytes, " +
              (reports[0] == reports[1] ? "identical" : "different")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"decoder-oracle", decoder_oracle},
      {"wa-oracle", wa_oracle},
      {"conflict-oracle", conflict_oracle},
      {"lm-normalization", lm_normalization},
      {"noiseless-end-to-end", noiseless_end_to_end},
      {"dialogue-lm-direction", dialogue_lm_direction},
      {"degradation-and-relaxation", degradation_and_relaxation},
      {"isolated-fallback", isolated_fallback},
      {"phenomena-direction", phenomena_direction},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << std::endl;
    failed += v.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
