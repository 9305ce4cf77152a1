#include <algorithm>
#include <numeric>

#include "railtalk/parser.hpp"

#include "railtalk/numbers.hpp"

namespace railtalk {

namespace {

struct Derivation {
  std::size_t production = 0;
  std::vector<std::size_t> cuts;  // boundaries between rhs pieces, size rhs+1
};

class Chart {
public:
  Chart(const std::vector<Token>& tokens, const SemanticGrammar& grammar, const Lexicon& lexicon)
      : tokens_(tokens), grammar_(grammar), lexicon_(lexicon), n_(tokens.size()),
        cells_(grammar.nonterminals().size() * (n_ + 1) * (n_ + 1)) {
    fill();
  }

  const std::optional<Derivation>& at(std::size_t nt, std::size_t i, std::size_t j) const {
    return cells_[(nt * (n_ + 1) + i) * (n_ + 1) + j];
  }

  ParseNode tree(std::size_t nt, std::size_t i, std::size_t j) const {
    const auto& d = *at(nt, i, j);
    ParseNode node{nt, {i, j}, d.production, {}};
    const auto& p = grammar_.productions()[d.production];
    for (std::size_t k = 0; k < p.rhs.size(); ++k) {
      if (p.rhs[k].type == GrammarSymbol::Type::nonterminal) {
        node.children.push_back(tree(p.rhs[k].nt, d.cuts[k], d.cuts[k + 1]));
      } else {
        node.children.push_back(ParseNode{ParseNode::npos, {d.cuts[k], d.cuts[k + 1]}, 0, {}});
      }
    }
    return node;
  }

private:
  std::optional<Derivation>& cell(std::size_t nt, std::size_t i, std::size_t j) {
    return cells_[(nt * (n_ + 1) + i) * (n_ + 1) + j];
  }

  bool terminal_matches(const GrammarSymbol& s, std::size_t pos) const {
    const Token& t = tokens_[pos];
    if (t.oov) return false;
    if (s.type == GrammarSymbol::Type::literal) return t.text == s.text;
    return lexicon_.word_class(t.cls).id == s.text;
  }

  // Leftmost split with the shortest first piece.
  bool match(const Production& p, std::size_t k, std::size_t pos, std::size_t end,
             std::vector<std::size_t>& cuts) const {
    if (k == p.rhs.size()) return pos == end;
    const std::size_t remaining = p.rhs.size() - k - 1;
    if (pos + 1 + remaining > end) return false;
    const auto& s = p.rhs[k];
    if (s.type != GrammarSymbol::Type::nonterminal) {
      if (!terminal_matches(s, pos)) return false;
      cuts.push_back(pos + 1);
      if (match(p, k + 1, pos + 1, end, cuts)) return true;
      cuts.pop_back();
      return false;
    }
    for (std::size_t e = pos + 1; e + remaining <= end; ++e) {
      if (!at(s.nt, pos, e)) continue;
      cuts.push_back(e);
      if (match(p, k + 1, e, end, cuts)) return true;
      cuts.pop_back();
    }
    return false;
  }

  void fill() {
    const auto& prods = grammar_.productions();
    for (std::size_t len = 1; len <= n_; ++len) {
      for (std::size_t i = 0; i + len <= n_; ++i) {
        const std::size_t j = i + len;
        // Unit productions can feed each other within one span, so iterate
        // to a fixpoint; the grammar has no unit cycles.
        bool changed = true;
        while (changed) {
          changed = false;
          for (std::size_t pi = 0; pi < prods.size(); ++pi) {
            const auto& p = prods[pi];
            if (cell(p.lhs, i, j)) continue;
            std::vector<std::size_t> cuts{i};
            if (match(p, 0, i, j, cuts)) {
              cell(p.lhs, i, j) = Derivation{pi, std::move(cuts)};
              changed = true;
            }
          }
        }
      }
    }
  }

  const std::vector<Token>& tokens_;
  const SemanticGrammar& grammar_;
  const Lexicon& lexicon_;
  std::size_t n_;
  std::vector<std::optional<Derivation>> cells_;
};

void collect_paths(const ParseNode& node, const SemanticGrammar& grammar, LocalAnalysis& out) {
  if (node.is_terminal()) return;
  for (std::size_t t = node.span.begin; t < node.span.end; ++t) {
    out.per_token[t].emplace(grammar.nonterminals()[node.nt], node.span);
  }
  for (const auto& c : node.children) collect_paths(c, grammar, out);
}

struct Normalized {
  std::optional<std::string> value;
  std::string problem;
};

Normalized normalize_city(const std::vector<const Token*>& toks, const Lexicon& lex) {
  if (toks.size() != 1) return {std::nullopt, "city value spans several tokens"};
  const std::string& w = toks[0]->text;
  const auto tag = lex.tag_of(w);
  if (tag == "city") return {w, {}};
  if (tag == "station") {
    const auto sp = w.rfind(' ');
    if (sp != std::string::npos && lex.tag_of(w.substr(0, sp)) == "city") return {w.substr(0, sp), {}};
    return {std::nullopt, "station '" + w + "' has no city"};
  }
  return {std::nullopt, "'" + w + "' is not a place"};
}

Normalized normalize_date(const std::vector<const Token*>& toks, const Lexicon& lex, const Date& ref) {
  if (toks.size() == 1) {
    const std::string& w = toks[0]->text;
    if (w == "today") return {format_iso_date(ref), {}};
    if (w == "tomorrow") return {format_iso_date(add_days(ref, 1)), {}};
    if (auto wd = weekday_value(w)) {
      int ahead = static_cast<int>(*wd) - static_cast<int>(iso_weekday(ref));
      if (ahead <= 0) ahead += 7;
      return {format_iso_date(add_days(ref, ahead)), {}};
    }
    return {std::nullopt, "'" + w + "' is not a date"};
  }
  std::optional<unsigned> month;
  std::optional<NumberWord> day;
  for (const Token* t : toks) {
    if (lex.tag_of(t->text) == "month") month = month_value(t->text);
    if (lex.tag_of(t->text) == "number") day = number_value(t->text);
  }
  if (!month || !day) return {std::nullopt, "incomplete date"};
  using namespace std::chrono;
  Date d{ref.year(), std::chrono::month{*month}, std::chrono::day{static_cast<unsigned>(day->value)}};
  if (!d.ok()) return {std::nullopt, "invalid calendar date"};
  if (sys_days{d} < sys_days{ref}) {
    d = Date{ref.year() + years{1}, std::chrono::month{*month}, std::chrono::day{static_cast<unsigned>(day->value)}};
    if (!d.ok()) return {std::nullopt, "invalid calendar date"};
  }
  return {format_iso_date(d), {}};
}

Normalized normalize_time(const std::vector<const Token*>& toks, const Lexicon& lex) {
  if (toks.size() == 1 && lex.tag_of(toks[0]->text) == "daypart") return {toks[0]->text, {}};
  std::vector<NumberWord> numbers;
  std::string meridiem;
  for (const Token* t : toks) {
    const auto tag = lex.tag_of(t->text);
    if (tag == "number") {
      auto v = number_value(t->text);
      if (!v) return {std::nullopt, "'" + t->text + "' is not usable in a clock time"};
      numbers.push_back(*v);
    } else if (tag == "meridiem") {
      meridiem = t->text;
    }
  }
  if (numbers.empty() || numbers.size() > 2) return {std::nullopt, "malformed clock time"};
  for (const auto& n : numbers) {
    if (n.ordinal) return {std::nullopt, "ordinal in clock time"};
  }
  int hour = numbers[0].value;
  const int minute = numbers.size() > 1 ? numbers[1].value : 0;
  if (minute > 59) return {std::nullopt, "minute out of range"};
  if (!meridiem.empty()) {
    if (hour < 1 || hour > 12) return {std::nullopt, "hour out of range for " + meridiem};
    if (meridiem == "am" && hour == 12) hour = 0;
    if (meridiem == "pm" && hour != 12) hour += 12;
  }
  if (hour > 23) return {std::nullopt, "hour out of range"};
  return {format_clock(hour * 60 + minute), {}};
}

bool is_city_kind(ConceptKind k) {
  return k == ConceptKind::departure_city || k == ConceptKind::arrival_city || k == ConceptKind::unanchored_city;
}

}  // namespace

LocalAnalysis local_analysis(const std::vector<Token>& tokens, const SemanticGrammar& grammar,
                             const Lexicon& lexicon) {
  LocalAnalysis out;
  out.tokens = tokens;
  out.per_token.resize(tokens.size());
  const Chart chart(tokens, grammar, lexicon);
  const auto symbols = grammar.concept_symbols();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (std::size_t nt : symbols) {
      for (std::size_t j = tokens.size(); j > i; --j) {
        if (chart.at(nt, i, j)) {
          out.structures.push_back({i, chart.tree(nt, i, j)});
          break;
        }
      }
    }
  }
  for (const auto& s : out.structures) collect_paths(s.tree, grammar, out);
  return out;
}

bool canonical_less(const Concept& a, const Concept& b) {
  if (a.span != b.span) return a.span < b.span;
  if (a.kind != b.kind) return a.kind < b.kind;
  if (a.value != b.value) return a.value < b.value;
  return a.score > b.score;
}

std::vector<Concept> collect_concepts(const LocalAnalysis& analysis, const SemanticGrammar& grammar,
                                      const ParseContext& context, std::vector<std::string>* diagnostics) {
  if (!context.lexicon) throw std::invalid_argument("collect_concepts needs a lexicon");
  const Lexicon& lex = *context.lexicon;
  std::vector<Concept> out;
  auto note = [&](const Structure& s, const ConceptDecl& decl, const std::string& why) {
    if (!diagnostics) return;
    std::vector<std::string> words;
    for (std::size_t t = s.tree.span.begin; t < s.tree.span.end; ++t) words.push_back(analysis.tokens[t].text);
    diagnostics->push_back("dropped " + std::string(to_string(decl.kind)) + " '" + join(words, " ") + "' at [" +
                           std::to_string(s.tree.span.begin) + "," + std::to_string(s.tree.span.end) + "): " + why);
  };
  for (const auto& s : analysis.structures) {
    const ConceptDecl* decl = grammar.concept_for(s.tree.nt);
    if (!decl) continue;
    const Production& p = grammar.productions()[s.tree.production];

    const ParseNode* value_node = nullptr;
    int markers = 0;
    for (std::size_t k = 0; k < p.positions.size(); ++k) {
      if (p.positions[k] == decl->value_position) value_node = &s.tree.children[k];
      if (std::find(decl->marker_positions.begin(), decl->marker_positions.end(), p.positions[k]) !=
          decl->marker_positions.end()) {
        ++markers;
      }
    }
    if (!value_node) {
      note(s, *decl, "value symbol not present");
      continue;
    }
    std::vector<const Token*> toks;
    for (std::size_t t = value_node->span.begin; t < value_node->span.end; ++t) toks.push_back(&analysis.tokens[t]);

    Normalized norm;
    if (is_city_kind(decl->kind)) {
      norm = normalize_city(toks, lex);
    } else if (decl->kind == ConceptKind::date) {
      norm = normalize_date(toks, lex, context.reference_date);
    } else if (decl->kind == ConceptKind::time) {
      norm = normalize_time(toks, lex);
    } else {
      norm.value = "true";
    }
    if (!norm.value) {
      note(s, *decl, norm.problem);
      continue;
    }

    const int expected = expected_markers(decl->kind);
    const double coverage = expected == 0 ? 1.0 : std::min(1.0, static_cast<double>(markers) / expected);
    const double completeness = static_cast<double>(p.rhs.size()) / static_cast<double>(p.written_length);
    out.push_back({decl->kind, *norm.value, s.tree.span, 0.5 * coverage + 0.5 * completeness});
  }
  std::sort(out.begin(), out.end(), canonical_less);
  return out;
}

bool compatible(const Concept& a, const Concept& b) {
  if (a.span.overlaps(b.span)) return false;
  if (a.kind == b.kind) return false;
  auto pair_is = [&](ConceptKind x, ConceptKind y) {
    return (a.kind == x && b.kind == y) || (a.kind == y && b.kind == x);
  };
  if (pair_is(ConceptKind::departure_city, ConceptKind::arrival_city) && a.value == b.value) return false;
  if (pair_is(ConceptKind::confirmation, ConceptKind::negation)) return false;
  if ((pair_is(ConceptKind::unanchored_city, ConceptKind::departure_city) ||
       pair_is(ConceptKind::unanchored_city, ConceptKind::arrival_city)) &&
      a.value == b.value) {
    return false;
  }
  return true;
}

namespace {

struct Search {
  const std::vector<Concept>& items;
  std::vector<std::vector<bool>> ok;
  std::vector<double> suffix;  // sum of scores from i to the end
  std::vector<std::size_t> current, best;
  double current_score = 0.0, best_score = -1.0;

  explicit Search(const std::vector<Concept>& c) : items(c), ok(c.size(), std::vector<bool>(c.size())) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (std::size_t j = 0; j < c.size(); ++j) ok[i][j] = i != j && compatible(c[i], c[j]);
    }
    suffix.assign(c.size() + 1, 0.0);
    for (std::size_t i = c.size(); i-- > 0;) suffix[i] = suffix[i + 1] + c[i].score;
  }

  double total(const std::vector<std::size_t>& idx) const {
    double s = 0.0;
    for (auto i : idx) s += items[i].score;
    return s;
  }

  void run(std::size_t i) {
    if (i == items.size()) {
      // Include-first search reaches the preferred subset of each total
      // first, so only a strictly larger sum replaces it.
      const double s = total(current);
      if (s > best_score + 1e-12) {
        best_score = s;
        best = current;
      }
      return;
    }
    if (current_score + suffix[i] < best_score - 1e-9) return;
    bool fits = true;
    for (auto j : current) fits = fits && ok[i][j];
    if (fits) {
      current.push_back(i);
      current_score += items[i].score;
      run(i + 1);
      current_score -= items[i].score;
      current.pop_back();
    }
    run(i + 1);
  }
};

}  // namespace

Resolution resolve_conflicts(std::vector<Concept> concepts) {
  std::sort(concepts.begin(), concepts.end(), canonical_less);
  Resolution r;
  if (concepts.size() <= kExactResolutionLimit) {
    Search search(concepts);
    search.run(0);
    for (auto i : search.best) r.concepts.push_back(concepts[i]);
    r.exact = true;
    return r;
  }
  std::vector<std::size_t> order(concepts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return concepts[a].score > concepts[b].score; });
  std::vector<std::size_t> chosen;
  for (auto i : order) {
    bool fits = true;
    for (auto j : chosen) fits = fits && compatible(concepts[i], concepts[j]);
    if (fits) chosen.push_back(i);
  }
  std::sort(chosen.begin(), chosen.end());
  for (auto i : chosen) r.concepts.push_back(concepts[i]);
  r.exact = false;
  return r;
}

std::string_view to_string(SpeechAct act) {
  switch (act) {
    case SpeechAct::empty: return "empty";
    case SpeechAct::inform: return "inform";
    case SpeechAct::confirm: return "confirm";
    case SpeechAct::deny: return "deny";
    case SpeechAct::correct: return "correct";
    case SpeechAct::ask: return "ask";
  }
  return "?";
}

CaseFrame build_case_frame(const std::vector<Concept>& concepts, const std::vector<Token>& tokens) {
  CaseFrame frame;
  bool confirm = false, deny = false, correct = false;
  std::vector<bool> covered(tokens.size(), false);
  for (const auto& c : concepts) {
    for (std::size_t t = c.span.begin; t < c.span.end && t < tokens.size(); ++t) covered[t] = true;
    switch (c.kind) {
      case ConceptKind::confirmation: confirm = true; break;
      case ConceptKind::negation: deny = true; break;
      case ConceptKind::correction: correct = true; break;
      default:
        frame.slots[c.kind] = c.value;
        frame.scores[c.kind] = c.score;
    }
  }
  if (correct) {
    frame.speech_act = SpeechAct::correct;
  } else if (deny) {
    frame.speech_act = SpeechAct::deny;
  } else if (confirm) {
    frame.speech_act = SpeechAct::confirm;
  } else if (!frame.slots.empty()) {
    frame.speech_act = SpeechAct::inform;
  }
  for (std::size_t t = 0; t < tokens.size();) {
    if (covered[t]) {
      ++t;
      continue;
    }
    std::size_t e = t;
    while (e < tokens.size() && !covered[e]) ++e;
    frame.residue.push_back({t, e});
    t = e;
  }
  return frame;
}

ParseResult parse_utterance(const std::vector<Token>& tokens, const SemanticGrammar& grammar,
                            const ParseContext& context) {
  ParseResult r;
  r.analysis = local_analysis(tokens, grammar, *context.lexicon);
  r.collected = collect_concepts(r.analysis, grammar, context, &r.diagnostics);
  r.resolution = resolve_conflicts(r.collected);
  r.frame = build_case_frame(r.resolution.concepts, tokens);
  return r;
}

}  // namespace railtalk
