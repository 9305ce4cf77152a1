#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace railtalk {

/// Index of a word class inside a Lexicon. The value Lexicon::oov_class()
/// (one past the last real class) stands for out-of-vocabulary words.
using ClassId = std::uint32_t;

enum class ClassKind { singleton, semantic };

struct WordClass {
  std::string id;
  ClassKind kind = ClassKind::singleton;
  std::vector<std::string> members;
  std::optional<std::string> semantic_tag;
};

/// A surface token after tokenization. Multi-word lexicon entries are a
/// single token whose text contains spaces ("milan central").
struct Token {
  std::string text;
  ClassId cls = 0;
  bool oov = false;

  bool operator==(const Token&) const = default;
};

/// Vocabulary partitioned into word classes. Immutable after load.
///
/// File format, one entry per line:
///
///   word<TAB>class_id[<TAB>semantic_tag]
///
/// `#` starts a comment line. Underscores inside a word join a multi-word
/// entry ("milan_central" is the two-word entry "milan central"). A class
/// with one member is a singleton class, otherwise a semantic class.
class Lexicon {
public:
  Lexicon() = default;

  static Lexicon load(const std::filesystem::path& path);
  static Lexicon parse(std::istream& in, const std::string& source = "<lexicon>");

  std::size_t size() const { return words_.size(); }
  std::size_t num_classes() const { return classes_.size(); }
  ClassId oov_class() const { return static_cast<ClassId>(classes_.size()); }
  bool is_oov(ClassId c) const { return c >= classes_.size(); }

  /// Class of a surface word; oov_class() when the word is unknown.
  ClassId class_of(std::string_view word) const;
  bool contains(std::string_view word) const { return index_.find(word) != index_.end(); }

  const WordClass& word_class(ClassId c) const { return classes_.at(c); }
  const std::vector<WordClass>& classes() const { return classes_; }
  std::optional<ClassId> find_class(std::string_view id) const;

  /// All classes whose semantic tag equals `tag`, in load order.
  std::vector<ClassId> classes_with_tag(std::string_view tag) const;
  /// Semantic tag of a word's class, empty for OOV or untagged classes.
  std::string_view tag_of(std::string_view word) const;

  /// Words in file order.
  const std::vector<std::string>& words() const { return words_; }

  /// Longest multi-word entry, in words.
  std::size_t max_entry_words() const { return max_entry_words_; }

  /// Order-sensitive FNV-1a digest of the (word, class, tag) entries.
  std::uint64_t checksum() const { return checksum_; }

private:
  std::vector<WordClass> classes_;
  std::vector<std::string> words_;
  std::map<std::string, ClassId, std::less<>> index_;
  std::map<std::string, ClassId, std::less<>> class_index_;
  std::size_t max_entry_words_ = 1;
  std::uint64_t checksum_ = 0;
};

/// Lowercases, strips punctuation, then greedily matches lexicon entries
/// longest-first. Unknown words are kept in place as OOV tokens.
std::vector<Token> tokenize(std::string_view text, const Lexicon& lexicon);

/// Builds tokens from already-segmented words (e.g. decoder output).
std::vector<Token> tokens_from_words(const std::vector<std::string>& words, const Lexicon& lexicon);

std::string detokenize(const std::vector<Token>& tokens);
std::vector<std::string> token_texts(const std::vector<Token>& tokens);

}  // namespace railtalk
