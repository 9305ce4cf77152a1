#include "railtalk/recognizer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>

#include <omp.h>

#include "railtalk/common.hpp"

namespace railtalk {

bool CnSlot::has_epsilon() const {
  return std::any_of(alternatives.begin(), alternatives.end(), [](const Alternative& a) { return a.is_epsilon(); });
}

void ConfusionNetwork::validate() const {
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto& s = slots[i];
    if (s.alternatives.empty()) throw std::invalid_argument("slot " + std::to_string(i) + " is empty");
    for (const auto& a : s.alternatives) {
      if (!std::isfinite(a.score)) throw std::invalid_argument("non-finite score in slot " + std::to_string(i));
    }
    if (s.insertion && !s.has_epsilon()) {
      throw std::invalid_argument("insertion slot " + std::to_string(i) + " lacks an epsilon alternative");
    }
  }
}

std::vector<std::string> ConfusionNetwork::top_path() const {
  std::vector<std::string> out;
  for (const auto& s : slots) {
    // Files may list alternatives in any order; the first of the best wins.
    const auto best = std::max_element(s.alternatives.begin(), s.alternatives.end(),
                                       [](const Alternative& a, const Alternative& b) { return a.score < b.score; });
    if (best != s.alternatives.end() && !best->is_epsilon()) out.push_back(best->word);
  }
  return out;
}

namespace {

std::string encode(std::string w) {
  if (w.empty()) return std::string(kEpsilonText);
  std::replace(w.begin(), w.end(), ' ', '_');
  return w;
}

std::string decode_text(std::string w) {
  if (w == kEpsilonText) return {};
  std::replace(w.begin(), w.end(), '_', ' ');
  return w;
}

std::string format_score(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double round4(double v) { return std::round(v * 1e4) / 1e4; }

void sort_alternatives(std::vector<Alternative>& alts) {
  std::sort(alts.begin(), alts.end(), [](const Alternative& a, const Alternative& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.word < b.word;
  });
}

}  // namespace

void ConfusionNetwork::write(std::ostream& out) const {
  out << "# seed " << seed << '\n';
  if (reference) {
    std::vector<std::string> enc;
    for (const auto& w : *reference) enc.push_back(encode(w));
    out << "# reference " << join(enc, " ") << '\n';
  }
  for (std::size_t i = 0; i < slots.size(); ++i) {
    for (const auto& a : slots[i].alternatives) {
      out << i << ' ' << encode(a.word) << ' ' << format_score(a.score);
      if (slots[i].insertion) out << " INS";
      out << '\n';
    }
  }
}

std::string ConfusionNetwork::to_string() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

ConfusionNetwork ConfusionNetwork::read(std::istream& in, const std::string& source) {
  ConfusionNetwork cn;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto f = split_ws(line);
    if (f.empty()) continue;
    if (f[0][0] == '#') {
      if (f.size() >= 3 && f[1] == "seed") {
        cn.seed = std::stoull(f[2]);
      } else if (f.size() >= 2 && f[1] == "reference") {
        std::vector<std::string> ref;
        for (std::size_t i = 2; i < f.size(); ++i) ref.push_back(decode_text(f[i]));
        cn.reference = std::move(ref);
      }
      continue;
    }
    if (f.size() < 3 || f.size() > 4 || (f.size() == 4 && f[3] != "INS")) {
      throw LoadError(source, lineno, "expected 'slot_index alt_word log_score [INS]'");
    }
    std::size_t index = 0;
    double score = 0;
    try {
      std::size_t pos = 0;
      index = std::stoul(f[0], &pos);
      if (pos != f[0].size()) throw std::invalid_argument(f[0]);
      score = std::stod(f[2], &pos);
      if (pos != f[2].size()) throw std::invalid_argument(f[2]);
    } catch (const std::exception&) {
      throw LoadError(source, lineno, "bad slot index or score");
    }
    if (index > cn.slots.size() || (index + 1 < cn.slots.size())) {
      throw LoadError(source, lineno, "slot indices must be contiguous and ascending");
    }
    if (index == cn.slots.size()) cn.slots.emplace_back();
    auto& slot = cn.slots[index];
    slot.insertion = slot.insertion || f.size() == 4;
    slot.alternatives.push_back({decode_text(f[1]), score});
  }
  try {
    cn.validate();
  } catch (const std::invalid_argument& e) {
    throw LoadError(source, lineno, e.what());
  }
  return cn;
}

ConfusionNetwork ConfusionNetwork::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), 0, "cannot open network file");
  return read(in, path.string());
}

ConfusionNetwork ConfusionNetwork::from_string(const std::string& text) {
  std::istringstream in(text);
  return read(in);
}

void NoiseConfig::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(p_sub) || !prob(p_del) || !prob(p_ins)) throw ConfigError("noise probabilities must lie in [0, 1]");
  if (p_sub + p_del > 1.0 + 1e-12) throw ConfigError("p_sub + p_del must not exceed 1");
  if (max_alternatives < 1) throw ConfigError("max_alternatives must be at least 1");
  if (confusability != "edit") throw ConfigError("unknown confusability function '" + confusability + "'");
}

std::vector<std::string> Confuser::confusable(const std::string& word, std::size_t k) const {
  {
    std::shared_lock lock(mutex_);
    const auto it = cache_.find(word);
    if (it != cache_.end() && it->second.size() >= std::min(k, lexicon_->size())) {
      return {it->second.begin(), it->second.begin() + static_cast<std::ptrdiff_t>(std::min(k, it->second.size()))};
    }
  }
  const std::size_t keep = std::max<std::size_t>(k, 16);
  std::vector<std::pair<double, const std::string*>> ranked;
  ranked.reserve(lexicon_->size());
  for (const auto& w : lexicon_->words()) {
    if (w == word) continue;
    ranked.emplace_back(edit_similarity(word, w), &w);
  }
  auto cmp = [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return *a.second < *b.second;
  };
  const std::size_t n = std::min(keep, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n), ranked.end(), cmp);
  std::vector<std::string> top;
  top.reserve(n);
  for (std::size_t i = 0; i < n; ++i) top.push_back(*ranked[i].second);
  {
    std::unique_lock lock(mutex_);
    cache_[word] = top;
  }
  top.resize(std::min(k, top.size()));
  return top;
}

ConfusionNetwork corrupt(const std::vector<std::string>& reference, const NoiseConfig& noise, std::uint64_t seed,
                         const Confuser& confuser) {
  noise.validate();
  ConfusionNetwork cn;
  cn.seed = seed;
  cn.reference = reference;
  if (noise.noiseless()) {
    for (const auto& w : reference) cn.slots.push_back({{{w, 0.0}}, false});
    return cn;
  }

  Rng rng(seed);
  const std::size_t cap = noise.max_alternatives;
  auto top_score = [&] { return -round4(rng.uniform(0.0, 0.2)); };

  auto insertion_slot = [&](std::size_t gap) {
    CnSlot slot;
    slot.insertion = true;
    const std::string& anchor = gap < reference.size() ? reference[gap] : reference[gap - 1];
    auto pool = confuser.confusable(anchor, 3);
    std::string spurious = pool.empty() ? anchor : pool[rng.below(pool.size())];
    const double top = top_score();
    slot.alternatives.push_back({spurious, top});
    slot.alternatives.push_back({"", round4(top - rng.uniform(0.2, 2.0))});
    sort_alternatives(slot.alternatives);
    return slot;
  };

  for (std::size_t gap = 0; gap <= reference.size(); ++gap) {
    if (!reference.empty() && noise.p_ins > 0.0 && rng.chance(noise.p_ins)) {
      cn.slots.push_back(insertion_slot(gap));
    }
    if (gap == reference.size()) break;

    const std::string& truth = reference[gap];
    const double u = rng.uniform();
    enum class Event { none, sub, del } event = Event::none;
    if (u < noise.p_del) {
      event = Event::del;
    } else if (u < noise.p_del + noise.p_sub) {
      event = Event::sub;
    }

    auto pool = confuser.confusable(truth, cap + 2);
    CnSlot slot;
    const double top = top_score();
    if (cap == 1) event = Event::none;
    if (event == Event::sub && pool.empty()) event = Event::none;

    if (event == Event::none) {
      slot.alternatives.push_back({truth, top});
    } else {
      const double below = round4(top - rng.uniform(0.1, 1.5));
      if (event == Event::del) {
        slot.alternatives.push_back({"", top});
      } else {
        const std::size_t pick = rng.below(std::min<std::size_t>(3, pool.size()));
        slot.alternatives.push_back({pool[pick], top});
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
      }
      slot.alternatives.push_back({truth, below});
    }
    for (const auto& w : pool) {
      if (slot.alternatives.size() >= cap) break;
      slot.alternatives.push_back({w, round4(top - rng.uniform(0.3, 3.0))});
    }
    sort_alternatives(slot.alternatives);
    cn.slots.push_back(std::move(slot));
  }
  return cn;
}

DecodeResult decode_continuous(const ConfusionNetwork& cn, const ClassBigramLM& lm, const DecodeOptions& options) {
  DecodeResult result;
  result.mode = DecodeMode::continuous;

  // Prune to the constraint vocabulary.
  std::vector<std::vector<const Alternative*>> slots(cn.slots.size());
  for (std::size_t t = 0; t < cn.slots.size(); ++t) {
    for (const auto& a : cn.slots[t].alternatives) {
      if (!a.is_epsilon() && options.constraint && !options.constraint->contains(a.word)) continue;
      slots[t].push_back(&a);
    }
    if (slots[t].empty()) {
      result.failure = "slot " + std::to_string(t) + " is empty after vocabulary restriction";
      return result;
    }
  }

  struct Entry {
    double score;
    std::vector<const Alternative*> picks;  // one per slot
  };
  // Epsilon has the empty word, so it orders before every real word.
  auto choice_less = [](const std::vector<const Alternative*>& a, const std::vector<const Alternative*>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                        [](const Alternative* x, const Alternative* y) { return x->word < y->word; });
  };
  std::map<ClassId, Entry> column{{lm.bos(), {0.0, {}}}};

  for (std::size_t t = 0; t < slots.size(); ++t) {
    std::map<ClassId, Entry> next;
    for (const auto& [history, entry] : column) {
      for (const Alternative* a : slots[t]) {
        ClassId state = history;
        double step = a->score;
        if (!a->is_epsilon()) {
          state = lm.class_of(a->word);
          step = a->score + options.alpha * (lm.log_class_prob(state, history) + lm.log_membership(a->word)) +
                 options.bonus(state);
        }
        const double score = entry.score + step;
        auto it = next.find(state);
        if (it != next.end() && score < it->second.score) continue;
        std::vector<const Alternative*> picks = entry.picks;
        picks.push_back(a);
        if (it == next.end()) {
          next.emplace(state, Entry{score, std::move(picks)});
        } else if (score > it->second.score || choice_less(picks, it->second.picks)) {
          it->second = {score, std::move(picks)};
        }
      }
    }
    column = std::move(next);
  }

  const Entry* best = nullptr;
  double best_total = 0.0;
  for (const auto& [state, entry] : column) {
    const double total = entry.score + options.alpha * lm.log_class_prob(lm.eos(), state);
    if (!best || total > best_total || (total == best_total && choice_less(entry.picks, best->picks))) {
      best = &entry;
      best_total = total;
    }
  }

  // Re-walk the chosen path for the per-word breakdown.
  ClassId history = lm.bos();
  for (const Alternative* a : best->picks) {
    if (a->is_epsilon()) {
      result.boundary_score += a->score;
      continue;
    }
    const ClassId c = lm.class_of(a->word);
    result.words.push_back(a->word);
    result.per_word_scores.push_back(a->score +
                                     options.alpha * (lm.log_class_prob(c, history) + lm.log_membership(a->word)) +
                                     options.bonus(c));
    history = c;
  }
  result.boundary_score += options.alpha * lm.log_class_prob(lm.eos(), history);
  result.total_log_score = best_total;
  result.ok = true;
  return result;
}

std::vector<DecodeResult> decode_batch_serial(const std::vector<ConfusionNetwork>& networks, const ClassBigramLM& lm,
                                              const DecodeOptions& options) {
  std::vector<DecodeResult> out;
  out.reserve(networks.size());
  for (const auto& cn : networks) out.push_back(decode_continuous(cn, lm, options));
  return out;
}

std::vector<DecodeResult> decode_batch_parallel(const std::vector<ConfusionNetwork>& networks, const ClassBigramLM& lm,
                                                const DecodeOptions& options, int threads) {
  std::vector<DecodeResult> out(networks.size());
  const int n = threads > 0 ? threads : omp_get_max_threads();
  const auto count = static_cast<std::ptrdiff_t>(networks.size());
#pragma omp parallel for schedule(dynamic, 16) num_threads(n)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = decode_continuous(networks[static_cast<std::size_t>(i)], lm, options);
  }
  return out;
}

DecodeResult decode_isolated(const ConfusionNetwork& cn, const Vocabulary& vocabulary, const IsolatedOptions& options) {
  DecodeResult result;
  result.mode = DecodeMode::isolated;
  if (vocabulary.empty()) {
    result.failure = "empty isolated-mode vocabulary";
    return result;
  }
  const std::string* best = nullptr;
  double best_score = 0.0;
  for (const auto& v : vocabulary) {
    bool found = false;
    double evidence = 0.0;
    for (const auto& slot : cn.slots) {
      for (const auto& a : slot.alternatives) {
        if (a.is_epsilon()) continue;
        const double sim = a.word == v ? 1.0 : edit_similarity(a.word, v);
        if (sim < options.min_similarity) continue;
        const double s = a.score + std::log(sim);
        if (!found || s > evidence) {
          evidence = s;
          found = true;
        }
      }
    }
    // The vocabulary iterates in lexicographic order, so strict > keeps the
    // smallest word among ties.
    if (found && (!best || evidence > best_score)) {
      best = &v;
      best_score = evidence;
    }
  }
  if (!best) {
    result.failure = "no vocabulary word has evidence in the network";
    return result;
  }
  result.ok = true;
  result.words = {*best};
  result.per_word_scores = {best_score};
  result.total_log_score = best_score;
  return result;
}

PredictionContext apply_predictions(const DialogueLMFamily& family, const Predictions& predictions, double alpha) {
  PredictionContext ctx;
  ctx.lm = &family.select(predictions.state_tag);
  ctx.selected_tag = family.has_state(predictions.state_tag) ? predictions.state_tag : std::string();
  ctx.isolated = predictions.isolated;
  ctx.options.alpha = alpha;
  const Lexicon& lexicon = family.global().lexicon();
  Vocabulary vocab;
  for (const auto& id : predictions.classes) {
    const auto cls = lexicon.find_class(id);
    if (!cls) throw ConfigError("prediction references unknown word class '" + id + "'");
    if (predictions.isolated) {
      const auto& members = lexicon.word_class(*cls).members;
      vocab.insert(members.begin(), members.end());
    } else if (predictions.bonus != 0.0) {
      ctx.options.class_bonus[*cls] = predictions.bonus;
    }
  }
  if (predictions.isolated) ctx.options.constraint = std::move(vocab);
  return ctx;
}

DecodeResult recognize(const ConfusionNetwork& cn, const PredictionContext& context) {
  if (context.isolated && context.options.constraint) return decode_isolated(cn, *context.options.constraint);
  return decode_continuous(cn, *context.lm, context.options);
}

}  // namespace railtalk
