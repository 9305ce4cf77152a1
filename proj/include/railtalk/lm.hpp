#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "railtalk/lexicon.hpp"

namespace railtalk {

class TrainingError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

using Sentence = std::vector<Token>;
using Corpus = std::vector<Sentence>;

struct TaggedSentence {
  std::string tag;
  Sentence tokens;
};
using TaggedCorpus = std::vector<TaggedSentence>;

struct LmConfig {
  /// Weight of the ML bigram estimate against the ML unigram estimate.
  double lambda = 0.7;
  /// Every class transition probability is at least this large.
  double floor = 1e-7;
};

/// Raw sufficient statistics of a class bigram model.
struct ClassCounts {
  std::map<std::pair<ClassId, ClassId>, std::uint64_t> bigrams;  // (history, next)
  std::map<std::string, std::uint64_t, std::less<>> words;        // in-vocabulary word counts
  std::size_t sentences = 0;
};

/// Class-based bigram model with linear interpolation of bigram and unigram
/// class estimates.
///
///   P(w | h) = P(class(w) | class(h)) * P(w | class(w))
///   P(c2 | c1) = floor + (1 - floor * V) * (lambda * ML(c2 | c1) + (1 - lambda) * ML(c2))
///
/// V is the number of predictable outcomes (classes, OOV, end of sentence).
/// Histories never seen in training fall back to the unigram estimate.
/// P(w | c) is the within-class relative frequency with Witten-Bell style
/// reserved mass spread uniformly over members never seen in training.
///
/// Class index space: [0, C) lexicon classes, C = OOV, C+1 = <s>, C+2 = </s>.
/// The model keeps a reference to its lexicon, which must outlive it.
class ClassBigramLM {
public:
  ClassBigramLM(const Lexicon& lexicon, ClassCounts counts, LmConfig config);

  /// Convex mixture weight * primary + (1 - weight) * secondary of two models
  /// over the same lexicon. Keeps the primary's counts and config.
  static ClassBigramLM mixture(const ClassBigramLM& primary, const ClassBigramLM& secondary,
                               double weight);

  ClassId oov() const { return static_cast<ClassId>(num_classes_); }
  ClassId bos() const { return static_cast<ClassId>(num_classes_ + 1); }
  ClassId eos() const { return static_cast<ClassId>(num_classes_ + 2); }
  std::size_t index_size() const { return num_classes_ + 3; }

  double class_prob(ClassId next, ClassId history) const;
  double log_class_prob(ClassId next, ClassId history) const {
    return log_class_[history * index_size() + next];
  }
  /// P(word | class(word)); 1 for OOV words.
  double membership(std::string_view word) const;
  double log_membership(std::string_view word) const;
  /// Smallest membership probability over the vocabulary (1 if empty).
  double min_membership() const { return min_membership_; }

  /// log P(class(w) | history) + log P(w | class(w)).
  double log_word_prob(std::string_view word, ClassId history) const;
  ClassId class_of(std::string_view word) const { return lexicon_->class_of(word); }

  const Lexicon& lexicon() const { return *lexicon_; }
  const LmConfig& config() const { return config_; }
  const ClassCounts& counts() const { return counts_; }
  std::uint64_t lexicon_checksum() const { return lexicon_->checksum(); }

  /// Readable name of an index ("<s>", "</s>", "<oov>" or the class id).
  std::string index_name(ClassId c) const;

  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static ClassBigramLM load(std::istream& in, const Lexicon& lexicon, const std::string& source = "<lm>");
  static ClassBigramLM load(const std::filesystem::path& path, const Lexicon& lexicon);

private:
  ClassBigramLM() = default;
  void estimate();

  const Lexicon* lexicon_ = nullptr;
  std::size_t num_classes_ = 0;
  ClassCounts counts_;
  LmConfig config_;
  std::vector<double> prob_;       // dense (history, next)
  std::vector<double> log_class_;  // log of prob_
  std::unordered_map<std::string, double> membership_;
  double min_membership_ = 1.0;
};

ClassCounts count_corpus(const Corpus& corpus, const Lexicon& lexicon);

/// Maximum-likelihood training; throws TrainingError on an empty corpus and
/// std::invalid_argument on an out-of-range config.
ClassBigramLM train_class_bigram(const Corpus& corpus, const Lexicon& lexicon, const LmConfig& config);

/// Sum of log transition and membership probabilities including the
/// sentence boundaries. Uses each token's class; OOV tokens use the OOV class.
double sequence_log_prob(const ClassBigramLM& lm, const Sentence& tokens);

/// exp(-total log prob / (tokens + end boundaries)). Throws on empty corpus.
double perplexity(const ClassBigramLM& lm, const Corpus& corpus);

/// Grid search of lambda over {0.1, ..., 0.9} minimising held-out perplexity.
/// Ties go to the smaller lambda.
double tune_lambda(const Corpus& train, const Corpus& heldout, const Lexicon& lexicon, double floor);

struct FamilyConfig {
  LmConfig lm;
  /// Weight of a per-state model against the global one (1 = state only).
  double state_mixing = 0.5;
  /// States with fewer training sentences are not given their own model.
  std::size_t min_state_sentences = 50;
};

/// Global model plus one model per dialogue state tag. Selecting a tag
/// without a trained model yields the global model.
class DialogueLMFamily {
public:
  const ClassBigramLM& global() const { return *global_; }
  const ClassBigramLM& select(std::string_view tag) const;
  bool has_state(std::string_view tag) const { return per_state_.find(tag) != per_state_.end(); }
  std::vector<std::string> trained_tags() const;
  const FamilyConfig& config() const { return config_; }

  /// Unmixed per-state model (for reporting the state-only configuration).
  const ClassBigramLM* raw_state(std::string_view tag) const;

  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static DialogueLMFamily load(std::istream& in, const Lexicon& lexicon, const std::string& source = "<family>");
  static DialogueLMFamily load(const std::filesystem::path& path, const Lexicon& lexicon);

  friend DialogueLMFamily train_dialogue_family(const TaggedCorpus&, const Lexicon&, const FamilyConfig&);

private:
  static DialogueLMFamily assemble(const Lexicon& lexicon, ClassCounts global,
                                   std::map<std::string, ClassCounts, std::less<>> states,
                                   const FamilyConfig& config);

  FamilyConfig config_;
  std::unique_ptr<ClassBigramLM> global_;
  std::map<std::string, std::unique_ptr<ClassBigramLM>, std::less<>> raw_;
  std::map<std::string, std::unique_ptr<ClassBigramLM>, std::less<>> per_state_;
};

/// Trains the global model on all sentences and a per-state model for every
/// tag with at least config.min_state_sentences sentences. Tags must belong
/// to the dialogue state inventory.
DialogueLMFamily train_dialogue_family(const TaggedCorpus& corpus, const Lexicon& lexicon,
                                       const FamilyConfig& config);

inline const ClassBigramLM& select_lm(const DialogueLMFamily& family, std::string_view tag) {
  return family.select(tag);
}

/// Reads `state_tag<TAB>sentence` lines; lines without a tab are untagged
/// (empty tag) and only feed the global model.
TaggedCorpus read_tagged_corpus(std::istream& in, const Lexicon& lexicon);
TaggedCorpus read_tagged_corpus(const std::filesystem::path& path, const Lexicon& lexicon);
Corpus read_corpus(std::istream& in, const Lexicon& lexicon);
Corpus untag(const TaggedCorpus& corpus);
Corpus filter_tag(const TaggedCorpus& corpus, std::string_view tag);

}  // namespace railtalk
