#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "railtalk/lexicon.hpp"
#include "railtalk/lm.hpp"

namespace railtalk {

/// Raised for inconsistent configuration (unknown class in predictions,
/// invalid noise parameters).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// One scored hypothesis in a slot. An empty word is epsilon (no word).
struct Alternative {
  std::string word;
  double score = 0.0;  // channel log-score, <= 0

  bool is_epsilon() const { return word.empty(); }
  bool operator==(const Alternative&) const = default;
};

struct CnSlot {
  std::vector<Alternative> alternatives;  // best first
  bool insertion = false;                 // spurious slot between reference words

  bool has_epsilon() const;
  bool operator==(const CnSlot&) const = default;
};

/// Word-level stand-in for acoustic evidence: position-aligned alternative
/// word hypotheses with channel log-scores.
///
/// Text form, one alternative per line (the reference and seed are
/// optional `#` headers):
///
///   # seed 42
///   # reference to milan
///   0 to 0
///   1 million -0.05
///   1 milan -0.4
///   2 <eps> -0.1 INS
///   2 please -0.02 INS
struct ConfusionNetwork {
  std::vector<CnSlot> slots;
  std::uint64_t seed = 0;
  std::optional<std::vector<std::string>> reference;

  /// Throws std::invalid_argument when an invariant is broken: empty slot,
  /// non-finite score, epsilon in an insertion slot missing.
  void validate() const;

  std::vector<std::string> top_path() const;

  void write(std::ostream& out) const;
  std::string to_string() const;
  static ConfusionNetwork read(std::istream& in, const std::string& source = "<network>");
  static ConfusionNetwork read(const std::filesystem::path& path);
  static ConfusionNetwork from_string(const std::string& text);

  bool operator==(const ConfusionNetwork&) const = default;
};

/// Text marker for epsilon in serialized networks.
inline constexpr std::string_view kEpsilonText = "<eps>";

struct NoiseConfig {
  double p_sub = 0.0;
  double p_del = 0.0;
  double p_ins = 0.0;
  /// Only normalized character edit similarity ("edit") is implemented.
  std::string confusability = "edit";
  std::size_t max_alternatives = 4;

  bool noiseless() const { return p_sub == 0.0 && p_del == 0.0 && p_ins == 0.0; }
  /// Throws ConfigError when out of range.
  void validate() const;
  bool operator==(const NoiseConfig&) const = default;
};

/// Ranks in-vocabulary words by normalized edit similarity to a given word.
/// Rankings are cached; safe for concurrent use.
class Confuser {
public:
  explicit Confuser(const Lexicon& lexicon) : lexicon_(&lexicon) {}
  Confuser(const Confuser&) = delete;
  Confuser& operator=(const Confuser&) = delete;

  /// The k most similar lexicon words other than `word` itself; ties broken
  /// lexicographically.
  std::vector<std::string> confusable(const std::string& word, std::size_t k) const;

  const Lexicon& lexicon() const { return *lexicon_; }

private:
  const Lexicon* lexicon_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<std::string, std::vector<std::string>> cache_;
};

/// Seeded noisy channel. For each reference word: with p_del an epsilon
/// outranks it, with p_sub a confusable word outranks it; the true word
/// stays in its slot. With p_ins an insertion slot appears in each gap.
/// With every probability zero the result has one alternative per slot:
/// the reference word at score 0.
ConfusionNetwork corrupt(const std::vector<std::string>& reference, const NoiseConfig& noise, std::uint64_t seed,
                         const Confuser& confuser);

enum class DecodeMode { continuous, isolated };

struct DecodeResult {
  bool ok = false;
  std::string failure;  // set when !ok
  DecodeMode mode = DecodeMode::continuous;
  std::vector<std::string> words;
  /// Per decoded word: channel + alpha * LM + prediction bonus.
  std::vector<double> per_word_scores;
  /// alpha * log P(</s> | last) plus channel scores of slots decoded as epsilon.
  double boundary_score = 0.0;
  double total_log_score = 0.0;

  bool operator==(const DecodeResult&) const = default;
};

using Vocabulary = std::set<std::string, std::less<>>;

struct DecodeOptions {
  double alpha = 1.0;
  /// Hard restriction: words outside are removed from every slot.
  std::optional<Vocabulary> constraint;
  /// Soft log-score bonus per predicted class.
  std::map<ClassId, double> class_bonus;

  double bonus(ClassId c) const {
    const auto it = class_bonus.find(c);
    return it == class_bonus.end() ? 0.0 : it->second;
  }
};

/// Best path through the network under channel + alpha * LM + bonus, by
/// dynamic programming over (slot, previous word class). Equal scores are
/// broken by the lexicographically smallest per-slot choice sequence, with
/// epsilon ordered before any word.
DecodeResult decode_continuous(const ConfusionNetwork& cn, const ClassBigramLM& lm, const DecodeOptions& options = {});

/// Serial reference for decoding many networks with one model.
std::vector<DecodeResult> decode_batch_serial(const std::vector<ConfusionNetwork>& networks, const ClassBigramLM& lm,
                                              const DecodeOptions& options = {});
/// Same result, networks spread over OpenMP threads (`threads` <= 0: default).
std::vector<DecodeResult> decode_batch_parallel(const std::vector<ConfusionNetwork>& networks, const ClassBigramLM& lm,
                                                const DecodeOptions& options = {}, int threads = 0);

struct IsolatedOptions {
  /// Alternatives less similar than this to a vocabulary word give it no evidence.
  double min_similarity = 0.5;
};

/// Collapses the network to the single vocabulary word with the highest
/// evidence. A word's evidence is the best alignment of the word to one slot:
/// max over non-epsilon alternatives of score + log(edit similarity).
DecodeResult decode_isolated(const ConfusionNetwork& cn, const Vocabulary& vocabulary,
                             const IsolatedOptions& options = {});

/// Dialogue manager expectations as seen by the recognizer.
struct Predictions {
  std::string state_tag;             // empty: global model
  std::vector<std::string> classes;  // predicted word class ids
  bool isolated = false;             // acquire a single word from the classes
  double bonus = 0.5;                // soft bonus per predicted class (continuous mode)
};

struct PredictionContext {
  const ClassBigramLM* lm = nullptr;
  std::string selected_tag;  // tag whose model was selected, empty for global
  bool isolated = false;
  DecodeOptions options;
};

/// Selects the state LM and turns predicted classes into a hard vocabulary
/// (isolated mode) or per-class bonuses (continuous mode). Throws
/// ConfigError for unknown class ids.
PredictionContext apply_predictions(const DialogueLMFamily& family, const Predictions& predictions, double alpha = 1.0);

/// Runs the recognizer in the mode chosen by the context.
DecodeResult recognize(const ConfusionNetwork& cn, const PredictionContext& context);

}  // namespace railtalk
