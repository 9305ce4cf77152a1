#include "oracles.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <queue>
#include <sstream>
#include <tuple>

#ifndef RAILTALK_TEST_DATA_DIR
#define RAILTALK_TEST_DATA_DIR "data"
#endif

namespace oracle {

std::filesystem::path data_dir() { return RAILTALK_TEST_DATA_DIR; }

std::shared_ptr<const Resources> shipped_ptr() {
  static const std::shared_ptr<const Resources> r = Resources::load(data_dir());
  return r;
}

const Resources& shipped() { return *shipped_ptr(); }

PathChoice enumerate_decode(const ConfusionNetwork& cn, const ClassBigramLM& lm, const DecodeOptions& options) {
  std::vector<std::vector<const Alternative*>> slots;
  for (const auto& s : cn.slots) {
    std::vector<const Alternative*> alts;
    for (const auto& a : s.alternatives) {
      if (a.is_epsilon() || !options.constraint || options.constraint->count(a.word)) alts.push_back(&a);
    }
    slots.push_back(alts);
  }

  bool have = false;
  PathChoice best;
  std::vector<std::string> best_choice;
  std::vector<std::size_t> idx(slots.size(), 0);
  for (const auto& s : slots) {
    if (s.empty()) return best;
  }
  while (true) {
    // Score the path slot by slot, in the same order of additions as its
    // definition: channel, then scaled LM, then bonus.
    double score = 0.0;
    ClassId history = lm.bos();
    std::vector<std::string> choice, words;
    for (std::size_t t = 0; t < slots.size(); ++t) {
      const Alternative* a = slots[t][idx[t]];
      choice.push_back(a->word);
      if (a->is_epsilon()) {
        score += a->score;
        continue;
      }
      const ClassId c = lm.class_of(a->word);
      score += a->score + options.alpha * (lm.log_class_prob(c, history) + lm.log_membership(a->word)) +
               options.bonus(c);
      history = c;
      words.push_back(a->word);
    }
    const double total = score + options.alpha * lm.log_class_prob(lm.eos(), history);
    if (!have || total > best.total || (total == best.total && choice < best_choice)) {
      have = true;
      best = {words, total};
      best_choice = choice;
    }
    std::size_t t = 0;
    for (; t < slots.size(); ++t) {
      if (++idx[t] < slots[t].size()) break;
      idx[t] = 0;
    }
    if (t == slots.size()) break;
  }
  return best;
}

namespace {

std::size_t edit(const std::vector<std::string>& a, std::size_t i, const std::vector<std::string>& b, std::size_t j,
                 std::map<std::pair<std::size_t, std::size_t>, std::size_t>& memo) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  const auto key = std::make_pair(i, j);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  const std::size_t v = std::min({edit(a, i + 1, b, j + 1, memo) + (a[i] == b[j] ? 0 : 1),
                                  edit(a, i + 1, b, j, memo) + 1, edit(a, i, b, j + 1, memo) + 1});
  memo[key] = v;
  return v;
}

}  // namespace

double brute_force_wa(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  const auto errors = edit(ref, 0, hyp, 0, memo);
  return (static_cast<double>(ref.size()) - static_cast<double>(errors)) / static_cast<double>(ref.size());
}

AlignmentCounts uniform_cost_alignment(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  // State (i, j); cost (errors, indels); record S/D/I of the path.
  using Cost = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t, std::size_t, std::size_t,
                          std::size_t>;  // errors, indels, i, j, S, D, I
  std::priority_queue<Cost, std::vector<Cost>, std::greater<>> open;
  std::map<std::pair<std::size_t, std::size_t>, bool> closed;
  open.push({0, 0, 0, 0, 0, 0, 0});
  while (!open.empty()) {
    auto [e, n, i, j, s, d, ins] = open.top();
    open.pop();
    if (closed[{i, j}]) continue;
    closed[{i, j}] = true;
    if (i == ref.size() && j == hyp.size()) {
      AlignmentCounts c;
      c.reference = ref.size();
      c.substitutions = s;
      c.deletions = d;
      c.insertions = ins;
      return c;
    }
    if (i < ref.size() && j < hyp.size()) {
      const bool same = ref[i] == hyp[j];
      open.push({e + (same ? 0 : 1), n, i + 1, j + 1, s + (same ? 0 : 1), d, ins});
    }
    if (i < ref.size()) open.push({e + 1, n + 1, i + 1, j, s, d + 1, ins});
    if (j < hyp.size()) open.push({e + 1, n + 1, i, j + 1, s, d, ins + 1});
  }
  return {};
}

bool can_coexist(const Concept& a, const Concept& b) {
  // Spans share a token?
  for (auto p = a.span.begin; p < a.span.end; ++p) {
    if (p >= b.span.begin && p < b.span.end) return false;
  }
  if (a.kind == b.kind) return false;
  const std::set<ConceptKind> kinds{a.kind, b.kind};
  using K = ConceptKind;
  if (kinds == std::set<K>{K::departure_city, K::arrival_city} && a.value == b.value) return false;
  if (kinds == std::set<K>{K::confirmation, K::negation}) return false;
  if ((kinds == std::set<K>{K::unanchored_city, K::departure_city} ||
       kinds == std::set<K>{K::unanchored_city, K::arrival_city}) &&
      a.value == b.value) {
    return false;
  }
  return true;
}

std::vector<Concept> brute_force_resolve(std::vector<Concept> concepts) {
  std::sort(concepts.begin(), concepts.end(), canonical_less);
  const std::size_t n = concepts.size();
  std::uint64_t best_mask = 0;
  double best_total = -1.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    // Bit n-1-i stands for concept i, so a larger mask keeps earlier concepts.
    auto has = [&](std::size_t i) { return (mask >> (n - 1 - i)) & 1u; };
    bool ok = true;
    double total = 0.0;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!has(i)) continue;
      total += concepts[i].score;
      for (std::size_t j = i + 1; j < n && ok; ++j) ok = !has(j) || can_coexist(concepts[i], concepts[j]);
    }
    if (!ok) continue;
    if (total > best_total || (total == best_total && mask > best_mask)) {
      best_total = total;
      best_mask = mask;
    }
  }
  std::vector<Concept> out;
  for (std::size_t i = 0; i < n; ++i) {
    if ((best_mask >> (n - 1 - i)) & 1u) out.push_back(concepts[i]);
  }
  return out;
}

std::unique_ptr<ToyDomain> random_domain(std::uint64_t seed, std::size_t sentences) {
  Rng rng(seed);
  std::ostringstream lex;
  std::vector<std::string> words;
  const std::size_t semantic = 1 + rng.below(4);
  for (std::size_t c = 0; c < semantic; ++c) {
    const std::size_t members = 2 + rng.below(4);
    for (std::size_t m = 0; m < members; ++m) {
      const std::string w = "s" + std::to_string(c) + "w" + std::to_string(m);
      lex << w << "\tclass" << c << "\n";
      words.push_back(w);
    }
  }
  const std::size_t singles = 1 + rng.below(6);
  for (std::size_t s = 0; s < singles; ++s) {
    const std::string w = "u" + std::to_string(s);
    lex << w << "\tw:" << w << "\n";
    words.push_back(w);
  }
  auto d = std::make_unique<ToyDomain>();
  std::istringstream in(lex.str());
  d->lexicon = Lexicon::parse(in, "<toy>");
  d->words = words;
  for (std::size_t i = 0; i < sentences; ++i) {
    std::ostringstream text;
    const std::size_t len = rng.below(7);
    for (std::size_t k = 0; k < len; ++k) {
      // Mostly known words, some unknown ones.
      text << (rng.chance(0.1) ? "zz" + std::to_string(rng.below(3)) : rng.pick(words)) << ' ';
    }
    d->corpus.push_back(tokenize(text.str(), d->lexicon));
  }
  return d;
}

ConfusionNetwork random_network(Rng& rng, const std::vector<std::string>& words, std::size_t max_slots,
                                std::size_t max_alternatives) {
  ConfusionNetwork cn;
  const std::size_t slots = 1 + rng.below(max_slots);
  for (std::size_t t = 0; t < slots; ++t) {
    CnSlot s;
    s.insertion = rng.chance(0.15);
    std::vector<std::string> pool = words;
    pool.push_back("oovword");
    const std::size_t alts = 1 + rng.below(max_alternatives);
    if (s.insertion || rng.chance(0.2)) s.alternatives.push_back({"", -static_cast<double>(rng.below(8)) / 4.0});
    while (s.alternatives.size() < alts && !pool.empty()) {
      const std::size_t k = rng.below(pool.size());
      // Quarter-step scores make exact ties common.
      s.alternatives.push_back({pool[k], -static_cast<double>(rng.below(8)) / 4.0});
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
    }
    std::stable_sort(s.alternatives.begin(), s.alternatives.end(),
                     [](const Alternative& a, const Alternative& b) { return a.score > b.score; });
    cn.slots.push_back(std::move(s));
  }
  return cn;
}

std::vector<Concept> random_concepts(Rng& rng, std::size_t max_concepts) {
  static const std::vector<std::string> cities = {"milan", "rome", "turin"};
  const std::size_t n = rng.below(max_concepts + 1);
  std::vector<Concept> out;
  std::set<std::tuple<Span, ConceptKind, std::string>> seen;
  while (out.size() < n) {
    Concept c;
    c.kind = static_cast<ConceptKind>(rng.below(8));
    switch (c.kind) {
      case ConceptKind::departure_city:
      case ConceptKind::arrival_city:
      case ConceptKind::unanchored_city: c.value = rng.pick(cities); break;
      case ConceptKind::date: c.value = rng.chance(0.5) ? "2024-05-11" : "2024-05-12"; break;
      case ConceptKind::time: c.value = rng.chance(0.5) ? "09:00" : "morning"; break;
      default: c.value = "true";
    }
    const std::size_t b = rng.below(10);
    c.span = {b, b + 1 + rng.below(3)};
    c.score = rng.chance(0.5) ? static_cast<double>(1 + rng.below(16)) / 16.0 : rng.uniform(0.05, 1.0);
    if (seen.insert({c.span, c.kind, c.value}).second) out.push_back(c);
  }
  return out;
}

}  // namespace oracle
