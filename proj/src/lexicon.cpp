#include "railtalk/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>

#include "railtalk/common.hpp"

namespace railtalk {

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), 0, "cannot open lexicon file");
  return parse(in, path.string());
}

Lexicon Lexicon::parse(std::istream& in, const std::string& source) {
  Lexicon lex;
  std::string line;
  std::size_t lineno = 0;
  std::uint64_t digest = fnv1a("railtalk-lexicon");
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;

    auto fields = split(line, '\t');
    if (fields.size() < 2 || fields.size() > 3) {
      throw LoadError(source, lineno, "expected word<TAB>class_id[<TAB>semantic_tag]");
    }
    std::string word = lowercase(trim(fields[0]));
    const std::string cls = trim(fields[1]);
    const std::string tag = fields.size() == 3 ? trim(fields[2]) : std::string();
    if (word.empty() || cls.empty()) throw LoadError(source, lineno, "empty word or class id");
    std::replace(word.begin(), word.end(), '_', ' ');

    if (auto it = lex.index_.find(word); it != lex.index_.end()) {
      if (lex.classes_[it->second].id != cls) {
        throw LoadError(source, lineno,
                        "word '" + word + "' assigned to classes '" + lex.classes_[it->second].id +
                            "' and '" + cls + "'");
      }
      throw LoadError(source, lineno, "duplicate entry for word '" + word + "'");
    }

    ClassId id;
    if (auto it = lex.class_index_.find(cls); it != lex.class_index_.end()) {
      id = it->second;
      const auto& existing = lex.classes_[id].semantic_tag;
      if (existing.value_or("") != tag) {
        throw LoadError(source, lineno, "inconsistent semantic tag for class '" + cls + "'");
      }
    } else {
      id = static_cast<ClassId>(lex.classes_.size());
      WordClass wc;
      wc.id = cls;
      if (!tag.empty()) wc.semantic_tag = tag;
      lex.classes_.push_back(std::move(wc));
      lex.class_index_.emplace(cls, id);
    }
    lex.classes_[id].members.push_back(word);
    lex.index_.emplace(word, id);
    lex.words_.push_back(word);
    lex.max_entry_words_ = std::max(lex.max_entry_words_, split_ws(word).size());
    digest = fnv1a(word + '\t' + cls + '\t' + tag + '\n', digest);
  }
  for (auto& wc : lex.classes_) {
    wc.kind = wc.members.size() == 1 ? ClassKind::singleton : ClassKind::semantic;
  }
  lex.checksum_ = digest;
  return lex;
}

ClassId Lexicon::class_of(std::string_view word) const {
  const auto it = index_.find(word);
  return it == index_.end() ? oov_class() : it->second;
}

std::optional<ClassId> Lexicon::find_class(std::string_view id) const {
  const auto it = class_index_.find(id);
  if (it == class_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<ClassId> Lexicon::classes_with_tag(std::string_view tag) const {
  std::vector<ClassId> out;
  for (ClassId c = 0; c < classes_.size(); ++c) {
    if (classes_[c].semantic_tag && *classes_[c].semantic_tag == tag) out.push_back(c);
  }
  return out;
}

std::string_view Lexicon::tag_of(std::string_view word) const {
  const ClassId c = class_of(word);
  if (is_oov(c) || !classes_[c].semantic_tag) return {};
  return *classes_[c].semantic_tag;
}

namespace {

// Keeps letters and digits; a hyphen survives only between two of them.
std::vector<std::string> surface_words(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (std::isalnum(c) || c >= 0x80) {
      cleaned += static_cast<char>(std::tolower(c));
    } else if (c == '-' && i > 0 && i + 1 < text.size() &&
               std::isalnum(static_cast<unsigned char>(text[i - 1])) &&
               std::isalnum(static_cast<unsigned char>(text[i + 1]))) {
      cleaned += '-';
    } else if (c == '\'') {
      // "o'clock" -> "oclock"
    } else {
      cleaned += ' ';
    }
  }
  return split_ws(cleaned);
}

}  // namespace

std::vector<Token> tokenize(std::string_view text, const Lexicon& lexicon) {
  const auto words = surface_words(text);
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < words.size()) {
    const std::size_t longest = std::min(lexicon.max_entry_words(), words.size() - i);
    bool matched = false;
    for (std::size_t k = longest; k >= 1; --k) {
      std::string phrase = words[i];
      for (std::size_t j = 1; j < k; ++j) phrase += ' ' + words[i + j];
      const ClassId c = lexicon.class_of(phrase);
      if (!lexicon.is_oov(c)) {
        out.push_back({std::move(phrase), c, false});
        i += k;
        matched = true;
        break;
      }
    }
    if (!matched) {
      out.push_back({words[i], lexicon.oov_class(), true});
      ++i;
    }
  }
  return out;
}

std::vector<Token> tokens_from_words(const std::vector<std::string>& words, const Lexicon& lexicon) {
  std::vector<Token> out;
  out.reserve(words.size());
  for (const auto& w : words) {
    const ClassId c = lexicon.class_of(w);
    out.push_back({w, c, lexicon.is_oov(c)});
  }
  return out;
}

std::string detokenize(const std::vector<Token>& tokens) {
  return join(token_texts(tokens), " ");
}

std::vector<std::string> token_texts(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

}  // namespace railtalk
