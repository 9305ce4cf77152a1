#include <algorithm>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>

#include "railtalk/parser.hpp"

namespace railtalk {

namespace {

constexpr std::pair<ConceptKind, std::string_view> kKindNames[] = {
    {ConceptKind::departure_city, "departure_city"},
    {ConceptKind::arrival_city, "arrival_city"},
    {ConceptKind::unanchored_city, "unanchored_city"},
    {ConceptKind::date, "date"},
    {ConceptKind::time, "time"},
    {ConceptKind::confirmation, "confirmation"},
    {ConceptKind::negation, "negation"},
    {ConceptKind::correction, "correction"},
};

struct WrittenSymbol {
  GrammarSymbol symbol;
  bool optional = false;
};

struct WrittenRule {
  std::string lhs;
  std::vector<WrittenSymbol> rhs;
  std::size_t line = 0;
};

struct WrittenConcept {
  std::string nt;
  std::string kind;
  std::size_t value = 0;
  std::vector<std::size_t> markers;
  std::size_t line = 0;
};

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

WrittenSymbol parse_symbol(std::string text, const std::string& source, std::size_t line) {
  WrittenSymbol ws;
  if (text.size() > 1 && text.back() == '?') {
    ws.optional = true;
    text.pop_back();
  }
  if (text.size() >= 3 && text.front() == '"' && text.back() == '"') {
    ws.symbol.type = GrammarSymbol::Type::literal;
    ws.symbol.text = text.substr(1, text.size() - 2);
  } else if (text.size() >= 2 && text.front() == '@') {
    ws.symbol.type = GrammarSymbol::Type::word_class;
    ws.symbol.text = text.substr(1);
  } else if (!text.empty() && text.find_first_of("\"@${}:;") == std::string::npos) {
    ws.symbol.type = GrammarSymbol::Type::nonterminal;
    ws.symbol.text = text;
  } else {
    throw LoadError(source, line, "malformed symbol '" + text + "'");
  }
  return ws;
}

std::size_t parse_position(const std::string& text, const std::string& source, std::size_t line) {
  if (text.size() < 2 || text[0] != '$') throw LoadError(source, line, "expected $position, got '" + text + "'");
  try {
    std::size_t pos = 0;
    const auto v = std::stoul(text.substr(1), &pos);
    if (pos != text.size() - 1 || v == 0) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw LoadError(source, line, "bad position '" + text + "'");
  }
}

WrittenConcept parse_concept(const std::string& body, const std::string& source, std::size_t line) {
  std::string spaced;
  for (char c : body) {
    if (c == ':' || c == '{' || c == '}' || c == ';') {
      spaced += ' ';
      spaced += c;
      spaced += ' ';
    } else {
      spaced += c;
    }
  }
  const auto f = split_ws(spaced);
  // concept NT : kind { key <- $i ; ... }
  if (f.size() < 5 || f[0] != "concept" || f[2] != ":" || f[4] != "{" || f.back() != "}") {
    throw LoadError(source, line, "expected 'concept NT : kind { value <- $i ; marker <- $j }'");
  }
  WrittenConcept wc;
  wc.nt = f[1];
  wc.kind = f[3];
  wc.line = line;
  bool have_value = false;
  std::size_t i = 5;
  while (i + 1 < f.size()) {
    if (f[i] == ";") {
      ++i;
      continue;
    }
    if (i + 2 >= f.size() || f[i + 1] != "<-") throw LoadError(source, line, "expected 'slot <- $i' in concept");
    const std::size_t pos = parse_position(f[i + 2], source, line);
    if (f[i] == "value") {
      if (have_value) throw LoadError(source, line, "concept declares value twice");
      wc.value = pos;
      have_value = true;
    } else if (f[i] == "marker") {
      wc.markers.push_back(pos);
    } else {
      throw LoadError(source, line, "unknown concept slot '" + f[i] + "'");
    }
    i += 3;
  }
  if (!have_value) throw LoadError(source, line, "concept '" + wc.nt + "' lacks a value template");
  return wc;
}

}  // namespace

std::string_view to_string(ConceptKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<ConceptKind> concept_kind_from(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

bool is_speech_act_kind(ConceptKind kind) {
  return kind == ConceptKind::confirmation || kind == ConceptKind::negation || kind == ConceptKind::correction;
}

int expected_markers(ConceptKind kind) {
  switch (kind) {
    case ConceptKind::departure_city:
    case ConceptKind::arrival_city:
    case ConceptKind::unanchored_city:
    case ConceptKind::time:
      return 1;
    default:
      return 0;
  }
}

SemanticGrammar SemanticGrammar::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), 0, "cannot open grammar file");
  return parse(in, path.string());
}

SemanticGrammar SemanticGrammar::parse(std::istream& in, const std::string& source) {
  std::vector<WrittenRule> rules;
  std::vector<WrittenConcept> written_concepts;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.rfind("concept", 0) == 0 && (line.size() == 7 || std::isspace(static_cast<unsigned char>(line[7])))) {
      written_concepts.push_back(parse_concept(line, source, lineno));
      continue;
    }
    const auto arrow = line.find("->");
    if (arrow == std::string::npos) throw LoadError(source, lineno, "expected 'NT -> symbols' or a concept declaration");
    const std::string lhs = trim(line.substr(0, arrow));
    if (lhs.empty() || split_ws(lhs).size() != 1 || parse_symbol(lhs, source, lineno).symbol.type !=
                                                         GrammarSymbol::Type::nonterminal) {
      throw LoadError(source, lineno, "left-hand side must be a single non-terminal");
    }
    for (const auto& alt : split(line.substr(arrow + 2), '|')) {
      WrittenRule rule{lhs, {}, lineno};
      for (const auto& sym : split_ws(alt)) rule.rhs.push_back(parse_symbol(sym, source, lineno));
      if (rule.rhs.empty()) throw LoadError(source, lineno, "empty alternative for '" + lhs + "'");
      rules.push_back(std::move(rule));
    }
  }

  SemanticGrammar g;
  g.source_ = source;
  std::map<std::string, std::size_t, std::less<>> index;
  for (const auto& r : rules) {
    if (index.emplace(r.lhs, g.names_.size()).second) g.names_.push_back(r.lhs);
  }

  std::set<std::size_t> used_in_rhs;
  for (const auto& r : rules) {
    const std::size_t lhs = index.at(r.lhs);
    std::vector<WrittenSymbol> rhs = r.rhs;
    for (auto& ws : rhs) {
      if (ws.symbol.type != GrammarSymbol::Type::nonterminal) continue;
      const auto it = index.find(ws.symbol.text);
      if (it == index.end()) throw LoadError(source, r.line, "undefined non-terminal '" + ws.symbol.text + "'");
      ws.symbol.nt = it->second;
      used_in_rhs.insert(it->second);
    }
    std::vector<std::size_t> optional_idx;
    for (std::size_t i = 0; i < rhs.size(); ++i) {
      if (rhs[i].optional) optional_idx.push_back(i);
    }
    const std::size_t variants = std::size_t{1} << optional_idx.size();
    // mask bit set = optional symbol dropped; the full rule comes first
    for (std::size_t mask = 0; mask < variants; ++mask) {
      Production p;
      p.lhs = lhs;
      p.written_length = rhs.size();
      p.line = r.line;
      for (std::size_t i = 0, o = 0; i < rhs.size(); ++i) {
        if (rhs[i].optional) {
          const bool dropped = (mask >> o++) & 1u;
          if (dropped) continue;
        }
        p.rhs.push_back(rhs[i].symbol);
        p.positions.push_back(i + 1);
      }
      if (p.rhs.empty()) throw LoadError(source, r.line, "rule for '" + r.lhs + "' can derive the empty string");
      g.productions_.push_back(std::move(p));
    }
  }

  std::set<std::size_t> declared;
  for (const auto& wc : written_concepts) {
    const auto it = index.find(wc.nt);
    if (it == index.end()) throw LoadError(source, wc.line, "concept for undefined non-terminal '" + wc.nt + "'");
    const auto kind = concept_kind_from(wc.kind);
    if (!kind) throw LoadError(source, wc.line, "unknown concept kind '" + wc.kind + "'");
    if (!declared.insert(it->second).second) {
      throw LoadError(source, wc.line, "duplicate concept declaration for '" + wc.nt + "'");
    }
    std::size_t longest = 0;
    for (const auto& p : g.productions_) {
      if (p.lhs == it->second) longest = std::max(longest, p.written_length);
    }
    auto check = [&](std::size_t pos) {
      if (pos > longest) {
        throw LoadError(source, wc.line, "position $" + std::to_string(pos) + " exceeds the rules of '" + wc.nt + "'");
      }
    };
    check(wc.value);
    for (auto m : wc.markers) check(m);
    g.concepts_.push_back({it->second, *kind, wc.value, wc.markers, wc.line});
  }

  if (g.concepts_.empty()) throw LoadError(source, lineno, "grammar defines no concept-level symbols");

  for (std::size_t nt = 0; nt < g.names_.size(); ++nt) {
    if (!used_in_rhs.contains(nt) && !declared.contains(nt)) {
      throw LoadError(source, 0, "concept-level symbol '" + g.names_[nt] + "' has no concept mapping");
    }
  }

  // Reachability from concept-level symbols.
  std::vector<bool> reached(g.names_.size(), false);
  std::vector<std::size_t> stack(declared.begin(), declared.end());
  while (!stack.empty()) {
    const std::size_t nt = stack.back();
    stack.pop_back();
    if (reached[nt]) continue;
    reached[nt] = true;
    for (const auto& p : g.productions_) {
      if (p.lhs != nt) continue;
      for (const auto& s : p.rhs) {
        if (s.type == GrammarSymbol::Type::nonterminal && !reached[s.nt]) stack.push_back(s.nt);
      }
    }
  }
  for (std::size_t nt = 0; nt < g.names_.size(); ++nt) {
    if (!reached[nt]) throw LoadError(source, 0, "non-terminal '" + g.names_[nt] + "' is unreachable");
  }

  // Unit-production cycles.
  std::vector<std::vector<std::size_t>> unit(g.names_.size());
  for (const auto& p : g.productions_) {
    if (p.rhs.size() == 1 && p.rhs[0].type == GrammarSymbol::Type::nonterminal) unit[p.lhs].push_back(p.rhs[0].nt);
  }
  std::vector<int> color(g.names_.size(), 0);
  std::function<void(std::size_t)> visit = [&](std::size_t nt) {
    color[nt] = 1;
    for (auto next : unit[nt]) {
      if (color[next] == 1) throw LoadError(source, 0, "cyclic unit productions through '" + g.names_[next] + "'");
      if (color[next] == 0) visit(next);
    }
    color[nt] = 2;
  };
  for (std::size_t nt = 0; nt < g.names_.size(); ++nt) {
    if (color[nt] == 0) visit(nt);
  }
  return g;
}

std::optional<std::size_t> SemanticGrammar::find(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

const ConceptDecl* SemanticGrammar::concept_for(std::size_t nt) const {
  for (const auto& c : concepts_) {
    if (c.nt == nt) return &c;
  }
  return nullptr;
}

std::vector<std::size_t> SemanticGrammar::concept_symbols() const {
  std::vector<std::size_t> out;
  for (const auto& c : concepts_) out.push_back(c.nt);
  std::sort(out.begin(), out.end());
  return out;
}

void SemanticGrammar::check_against(const Lexicon& lexicon) const {
  for (const auto& p : productions_) {
    for (const auto& s : p.rhs) {
      if (s.type == GrammarSymbol::Type::word_class && !lexicon.find_class(s.text)) {
        throw LoadError(source_, p.line, "terminal @" + s.text + " names no lexicon class");
      }
      if (s.type == GrammarSymbol::Type::literal && !lexicon.contains(s.text)) {
        throw LoadError(source_, p.line, "literal \"" + s.text + "\" is not in the lexicon");
      }
    }
  }
}

}  // namespace railtalk
