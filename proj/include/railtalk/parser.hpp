#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "railtalk/calendar.hpp"
#include "railtalk/common.hpp"
#include "railtalk/lexicon.hpp"

namespace railtalk {

enum class ConceptKind {
  departure_city,
  arrival_city,
  unanchored_city,
  date,
  time,
  confirmation,
  negation,
  correction,
};

std::string_view to_string(ConceptKind kind);
std::optional<ConceptKind> concept_kind_from(std::string_view name);
/// Kinds that only decide the speech act and never fill a frame slot.
bool is_speech_act_kind(ConceptKind kind);
/// Number of case-marker words a fully anchored concept of this kind carries.
int expected_markers(ConceptKind kind);

struct GrammarSymbol {
  enum class Type { nonterminal, word_class, literal };
  Type type = Type::literal;
  std::string text;         // class id, literal word, or non-terminal name
  std::size_t nt = 0;       // resolved index for non-terminals
  bool operator==(const GrammarSymbol&) const = default;
};

/// A production after optional symbols have been expanded away.
struct Production {
  std::size_t lhs = 0;
  std::vector<GrammarSymbol> rhs;
  /// 1-based position of each rhs symbol in the written rule.
  std::vector<std::size_t> positions;
  /// Number of symbols in the written rule, optional ones included.
  std::size_t written_length = 0;
  std::size_t line = 0;
};

struct ConceptDecl {
  std::size_t nt = 0;
  ConceptKind kind = ConceptKind::unanchored_city;
  std::size_t value_position = 1;
  std::vector<std::size_t> marker_positions;
  std::size_t line = 0;
};

/// Context-free semantic grammar. Top-level non-terminals (those used in no
/// right-hand side) are the concept-level symbols and must each carry a
/// concept declaration.
///
///   NT -> sym sym ... | sym ...
///   concept NT : kind { value <- $i ; marker <- $j }
///
/// Terminals are `@class_id` or `"literal"`; a trailing `?` makes a symbol
/// optional; `#` starts a comment.
class SemanticGrammar {
public:
  static SemanticGrammar load(const std::filesystem::path& path);
  static SemanticGrammar parse(std::istream& in, const std::string& source = "<grammar>");

  const std::vector<std::string>& nonterminals() const { return names_; }
  const std::vector<Production>& productions() const { return productions_; }
  const std::vector<ConceptDecl>& concepts() const { return concepts_; }
  std::optional<std::size_t> find(std::string_view name) const;
  const ConceptDecl* concept_for(std::size_t nt) const;
  std::vector<std::size_t> concept_symbols() const;

  /// Throws LoadError if a @class terminal names a class the lexicon lacks.
  void check_against(const Lexicon& lexicon) const;

private:
  std::vector<std::string> names_;
  std::vector<Production> productions_;
  std::vector<ConceptDecl> concepts_;
  std::string source_;
};

/// Derivation tree node.
struct ParseNode {
  std::size_t nt = 0;
  Span span;
  std::size_t production = 0;
  /// One entry per rhs symbol; terminals are leaves with an empty children list
  /// and nt == npos.
  std::vector<ParseNode> children;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  bool is_terminal() const { return nt == npos; }
};

/// A maximal structure found from one anchor.
struct Structure {
  std::size_t anchor = 0;
  ParseNode tree;
};

struct LocalAnalysis {
  std::vector<Token> tokens;
  std::vector<Structure> structures;  // ordered by anchor, then non-terminal index
  /// Per token: (non-terminal name, node span) for every node on the path
  /// from the token to the root of every structure covering it.
  std::vector<std::set<std::pair<std::string, Span>>> per_token;
};

/// For every anchor position and every concept-level symbol, the longest
/// span starting at the anchor that the symbol derives. OOV tokens match no
/// terminal, so structures never cross them.
LocalAnalysis local_analysis(const std::vector<Token>& tokens, const SemanticGrammar& grammar, const Lexicon& lexicon);

struct Concept {
  ConceptKind kind = ConceptKind::unanchored_city;
  std::string value;
  Span span;
  double score = 1.0;  // linguistic reliability in (0, 1]

  bool operator==(const Concept&) const = default;
};

/// Canonical order: span, kind, value, then higher score first.
bool canonical_less(const Concept& a, const Concept& b);

struct ParseContext {
  const Lexicon* lexicon = nullptr;
  Date reference_date{std::chrono::year{2024}, std::chrono::month{5}, std::chrono::day{10}};
};

/// One concept per (concept-level structure); value normalized by kind.
/// Reliability: 0.5 * marker coverage + 0.5 * matched / written rule symbols.
/// Structures whose value does not normalize are dropped and described in
/// `diagnostics` if given.
std::vector<Concept> collect_concepts(const LocalAnalysis& analysis, const SemanticGrammar& grammar,
                                      const ParseContext& context, std::vector<std::string>* diagnostics = nullptr);

/// Two concepts can coexist: disjoint spans, different kinds, and no
/// contradiction (same city as departure and arrival, yes with no, an
/// unanchored city repeating an anchored one).
bool compatible(const Concept& a, const Concept& b);

struct Resolution {
  std::vector<Concept> concepts;  // canonical order
  bool exact = true;              // false when the greedy path ran
};

inline constexpr std::size_t kExactResolutionLimit = 20;

/// Maximum total score pairwise-compatible subset. Exact branch and bound up
/// to kExactResolutionLimit concepts, greedy by score above. Among equal
/// totals the subset that includes the earliest differing concept (in
/// canonical order) wins.
Resolution resolve_conflicts(std::vector<Concept> concepts);

enum class SpeechAct { empty, inform, confirm, deny, correct, ask };
std::string_view to_string(SpeechAct act);

struct CaseFrame {
  std::map<ConceptKind, std::string> slots;
  std::map<ConceptKind, double> scores;  // reliability of the concept filling each slot
  SpeechAct speech_act = SpeechAct::empty;
  std::vector<Span> residue;  // maximal uncovered token runs
};

CaseFrame build_case_frame(const std::vector<Concept>& concepts, const std::vector<Token>& tokens);

struct ParseResult {
  LocalAnalysis analysis;
  std::vector<Concept> collected;
  Resolution resolution;
  CaseFrame frame;
  std::vector<std::string> diagnostics;
};

/// All steps in sequence.
ParseResult parse_utterance(const std::vector<Token>& tokens, const SemanticGrammar& grammar,
                            const ParseContext& context);

}  // namespace railtalk
