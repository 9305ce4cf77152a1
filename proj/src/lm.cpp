#include "railtalk/lm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "railtalk/common.hpp"
#include "railtalk/state_tags.hpp"

namespace railtalk {

namespace {

void validate(const LmConfig& config, std::size_t outcomes) {
  if (!(config.lambda >= 0.0 && config.lambda <= 1.0)) {
    throw std::invalid_argument("lambda must lie in [0, 1]");
  }
  if (!(config.floor > 0.0) || config.floor * static_cast<double>(outcomes) >= 1.0) {
    throw std::invalid_argument("floor must be positive and floor * outcomes < 1");
  }
}

std::string encode_word(std::string w) {
  std::replace(w.begin(), w.end(), ' ', '_');
  return w;
}

std::string decode_word(std::string w) {
  std::replace(w.begin(), w.end(), '_', ' ');
  return w;
}

}  // namespace

ClassBigramLM::ClassBigramLM(const Lexicon& lexicon, ClassCounts counts, LmConfig config)
    : lexicon_(&lexicon), num_classes_(lexicon.num_classes()), counts_(std::move(counts)), config_(config) {
  validate(config_, num_classes_ + 2);
  estimate();
}

void ClassBigramLM::estimate() {
  const std::size_t k = index_size();
  const std::size_t outcomes = num_classes_ + 2;  // classes, OOV, </s>
  std::vector<double> hist_total(k, 0.0), pred_total(k, 0.0);
  double total = 0.0;
  for (const auto& [key, n] : counts_.bigrams) {
    hist_total[key.first] += static_cast<double>(n);
    pred_total[key.second] += static_cast<double>(n);
    total += static_cast<double>(n);
  }

  std::vector<double> unigram(k, 0.0);
  for (ClassId c = 0; c < k; ++c) {
    if (c == bos()) continue;
    unigram[c] = total > 0 ? pred_total[c] / total : 1.0 / static_cast<double>(outcomes);
  }

  const double scale = 1.0 - config_.floor * static_cast<double>(outcomes);
  prob_.assign(k * k, 0.0);
  for (ClassId h = 0; h < k; ++h) {
    if (h == eos()) continue;
    const bool seen = hist_total[h] > 0;
    const double lambda = seen ? config_.lambda : 0.0;
    for (ClassId n = 0; n < k; ++n) {
      if (n == bos()) continue;
      prob_[h * k + n] = config_.floor + scale * (1.0 - lambda) * unigram[n];
    }
    if (seen) {
      auto it = counts_.bigrams.lower_bound({h, 0});
      for (; it != counts_.bigrams.end() && it->first.first == h; ++it) {
        prob_[h * k + it->first.second] += scale * lambda * static_cast<double>(it->second) / hist_total[h];
      }
    }
  }
  log_class_.resize(prob_.size());
  for (std::size_t i = 0; i < prob_.size(); ++i) {
    log_class_[i] = prob_[i] > 0 ? std::log(prob_[i]) : -std::numeric_limits<double>::infinity();
  }

  membership_.clear();
  min_membership_ = 1.0;
  for (const auto& wc : lexicon_->classes()) {
    std::uint64_t class_total = 0, seen_types = 0;
    for (const auto& w : wc.members) {
      const auto it = counts_.words.find(w);
      if (it != counts_.words.end() && it->second > 0) {
        class_total += it->second;
        ++seen_types;
      }
    }
    const std::size_t unseen = wc.members.size() - seen_types;
    for (const auto& w : wc.members) {
      const auto it = counts_.words.find(w);
      const double n = it == counts_.words.end() ? 0.0 : static_cast<double>(it->second);
      double p;
      if (class_total == 0) {
        p = 1.0 / static_cast<double>(wc.members.size());
      } else if (unseen == 0) {
        p = n / static_cast<double>(class_total);
      } else if (n > 0) {
        p = n / static_cast<double>(class_total + seen_types);
      } else {
        p = static_cast<double>(seen_types) /
            (static_cast<double>(class_total + seen_types) * static_cast<double>(unseen));
      }
      membership_[w] = p;
      min_membership_ = std::min(min_membership_, p);
    }
  }
}

ClassBigramLM ClassBigramLM::mixture(const ClassBigramLM& primary, const ClassBigramLM& secondary,
                                     double weight) {
  if (primary.lexicon_ != secondary.lexicon_ && primary.lexicon_checksum() != secondary.lexicon_checksum()) {
    throw std::invalid_argument("mixture of models over different lexicons");
  }
  if (!(weight >= 0.0 && weight <= 1.0)) throw std::invalid_argument("mixture weight must lie in [0, 1]");
  ClassBigramLM out;
  out.lexicon_ = primary.lexicon_;
  out.num_classes_ = primary.num_classes_;
  out.counts_ = primary.counts_;
  out.config_ = primary.config_;
  out.prob_.resize(primary.prob_.size());
  out.log_class_.resize(primary.prob_.size());
  for (std::size_t i = 0; i < out.prob_.size(); ++i) {
    out.prob_[i] = weight * primary.prob_[i] + (1.0 - weight) * secondary.prob_[i];
    out.log_class_[i] = out.prob_[i] > 0 ? std::log(out.prob_[i]) : -std::numeric_limits<double>::infinity();
  }
  for (const auto& [w, p] : primary.membership_) {
    const double q = weight * p + (1.0 - weight) * secondary.membership_.at(w);
    out.membership_[w] = q;
    out.min_membership_ = std::min(out.min_membership_, q);
  }
  return out;
}

double ClassBigramLM::class_prob(ClassId next, ClassId history) const {
  return prob_.at(history * index_size() + next);
}

double ClassBigramLM::membership(std::string_view word) const {
  const auto it = membership_.find(std::string(word));
  return it == membership_.end() ? 1.0 : it->second;
}

double ClassBigramLM::log_membership(std::string_view word) const { return std::log(membership(word)); }

double ClassBigramLM::log_word_prob(std::string_view word, ClassId history) const {
  return log_class_prob(class_of(word), history) + log_membership(word);
}

std::string ClassBigramLM::index_name(ClassId c) const {
  if (c == bos()) return "<s>";
  if (c == eos()) return "</s>";
  if (c == oov()) return "<oov>";
  return lexicon_->word_class(c).id;
}

void ClassBigramLM::save(std::ostream& out) const {
  out << "railtalk-lm 1\n";
  out << "lexicon_checksum " << std::hex << lexicon_checksum() << std::dec << '\n';
  out << std::setprecision(17);
  out << "lambda " << config_.lambda << '\n';
  out << "floor " << config_.floor << '\n';
  out << "sentences " << counts_.sentences << '\n';
  out << "bigrams " << counts_.bigrams.size() << '\n';
  for (const auto& [key, n] : counts_.bigrams) {
    out << index_name(key.first) << ' ' << index_name(key.second) << ' ' << n << '\n';
  }
  out << "words " << counts_.words.size() << '\n';
  for (const auto& [w, n] : counts_.words) out << encode_word(w) << ' ' << n << '\n';
  out << "end\n";
}

void ClassBigramLM::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  save(out);
}

namespace {

struct LineReader {
  std::istream& in;
  const std::string& source;
  std::size_t lineno = 0;

  std::vector<std::string> next() {
    std::string line;
    while (std::getline(in, line)) {
      ++lineno;
      auto f = split_ws(line);
      if (!f.empty()) return f;
    }
    throw LoadError(source, lineno, "unexpected end of model file");
  }

  std::vector<std::string> expect(const std::string& key, std::size_t fields) {
    auto f = next();
    if (f.size() != fields || f[0] != key) throw LoadError(source, lineno, "expected '" + key + "'");
    return f;
  }
};

double to_double(const std::string& s, LineReader& r) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw LoadError(r.source, r.lineno, "bad number '" + s + "'");
  }
}

std::uint64_t to_count(const std::string& s, LineReader& r) {
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw LoadError(r.source, r.lineno, "bad count '" + s + "'");
  }
}

struct LoadedModel {
  ClassCounts counts;
  LmConfig config;
};

LoadedModel read_model_block(LineReader& r, const Lexicon& lexicon) {
  auto header = r.expect("railtalk-lm", 2);
  if (header[1] != "1") throw LoadError(r.source, r.lineno, "unsupported model version " + header[1]);
  auto sum = r.expect("lexicon_checksum", 2);
  std::uint64_t checksum = 0;
  try {
    checksum = std::stoull(sum[1], nullptr, 16);
  } catch (const std::exception&) {
    throw LoadError(r.source, r.lineno, "bad checksum");
  }
  if (checksum != lexicon.checksum()) {
    throw LoadError(r.source, r.lineno, "model was trained with a different lexicon (checksum mismatch)");
  }
  LoadedModel m;
  m.config.lambda = to_double(r.expect("lambda", 2)[1], r);
  m.config.floor = to_double(r.expect("floor", 2)[1], r);
  m.counts.sentences = to_count(r.expect("sentences", 2)[1], r);

  const ClassId c = static_cast<ClassId>(lexicon.num_classes());
  auto resolve = [&](const std::string& name) -> ClassId {
    if (name == "<oov>") return c;
    if (name == "<s>") return c + 1;
    if (name == "</s>") return c + 2;
    if (auto id = lexicon.find_class(name)) return *id;
    throw LoadError(r.source, r.lineno, "unknown class '" + name + "'");
  };

  const auto nbig = to_count(r.expect("bigrams", 2)[1], r);
  for (std::uint64_t i = 0; i < nbig; ++i) {
    auto f = r.next();
    if (f.size() != 3) throw LoadError(r.source, r.lineno, "expected 'history next count'");
    m.counts.bigrams[{resolve(f[0]), resolve(f[1])}] = to_count(f[2], r);
  }
  const auto nwords = to_count(r.expect("words", 2)[1], r);
  for (std::uint64_t i = 0; i < nwords; ++i) {
    auto f = r.next();
    if (f.size() != 2) throw LoadError(r.source, r.lineno, "expected 'word count'");
    std::string w = decode_word(f[0]);
    if (!lexicon.contains(w)) throw LoadError(r.source, r.lineno, "word not in lexicon: " + w);
    m.counts.words[w] = to_count(f[1], r);
  }
  r.expect("end", 1);
  return m;
}

}  // namespace

ClassBigramLM ClassBigramLM::load(std::istream& in, const Lexicon& lexicon, const std::string& source) {
  LineReader r{in, source};
  auto m = read_model_block(r, lexicon);
  try {
    return ClassBigramLM(lexicon, std::move(m.counts), m.config);
  } catch (const std::invalid_argument& e) {
    throw LoadError(source, r.lineno, e.what());
  }
}

ClassBigramLM ClassBigramLM::load(const std::filesystem::path& path, const Lexicon& lexicon) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), 0, "cannot open model file");
  return load(in, lexicon, path.string());
}

ClassCounts count_corpus(const Corpus& corpus, const Lexicon& lexicon) {
  ClassCounts counts;
  const ClassId oov = lexicon.oov_class();
  const ClassId bos = oov + 1, eos = oov + 2;
  for (const auto& sentence : corpus) {
    ClassId prev = bos;
    for (const auto& tok : sentence) {
      const ClassId c = tok.oov ? oov : tok.cls;
      ++counts.bigrams[{prev, c}];
      if (!tok.oov) ++counts.words[tok.text];
      prev = c;
    }
    ++counts.bigrams[{prev, eos}];
    ++counts.sentences;
  }
  return counts;
}

ClassBigramLM train_class_bigram(const Corpus& corpus, const Lexicon& lexicon, const LmConfig& config) {
  if (corpus.empty()) throw TrainingError("cannot train a language model on an empty corpus");
  return ClassBigramLM(lexicon, count_corpus(corpus, lexicon), config);
}

double sequence_log_prob(const ClassBigramLM& lm, const Sentence& tokens) {
  double total = 0.0;
  ClassId prev = lm.bos();
  for (const auto& tok : tokens) {
    const ClassId c = tok.oov ? lm.oov() : tok.cls;
    total += lm.log_class_prob(c, prev);
    if (!tok.oov) total += lm.log_membership(tok.text);
    prev = c;
  }
  return total + lm.log_class_prob(lm.eos(), prev);
}

double perplexity(const ClassBigramLM& lm, const Corpus& corpus) {
  if (corpus.empty()) throw TrainingError("perplexity of an empty corpus is undefined");
  double logp = 0.0;
  std::size_t n = 0;
  for (const auto& s : corpus) {
    logp += sequence_log_prob(lm, s);
    n += s.size() + 1;
  }
  return std::exp(-logp / static_cast<double>(n));
}

double tune_lambda(const Corpus& train, const Corpus& heldout, const Lexicon& lexicon, double floor) {
  const ClassCounts counts = count_corpus(train, lexicon);
  double best_lambda = 0.1, best_ppl = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 9; ++i) {
    const double lambda = i / 10.0;
    const ClassBigramLM lm(lexicon, counts, {lambda, floor});
    const double ppl = perplexity(lm, heldout);
    if (ppl < best_ppl) {
      best_ppl = ppl;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

const ClassBigramLM& DialogueLMFamily::select(std::string_view tag) const {
  const auto it = per_state_.find(tag);
  return it == per_state_.end() ? *global_ : *it->second;
}

const ClassBigramLM* DialogueLMFamily::raw_state(std::string_view tag) const {
  const auto it = raw_.find(tag);
  return it == raw_.end() ? nullptr : it->second.get();
}

std::vector<std::string> DialogueLMFamily::trained_tags() const {
  std::vector<std::string> out;
  for (const auto& [tag, _] : per_state_) out.push_back(tag);
  return out;
}

DialogueLMFamily DialogueLMFamily::assemble(const Lexicon& lexicon, ClassCounts global,
                                            std::map<std::string, ClassCounts, std::less<>> states,
                                            const FamilyConfig& config) {
  if (!(config.state_mixing >= 0.0 && config.state_mixing <= 1.0)) {
    throw std::invalid_argument("state_mixing must lie in [0, 1]");
  }
  DialogueLMFamily family;
  family.config_ = config;
  family.global_ = std::make_unique<ClassBigramLM>(lexicon, std::move(global), config.lm);
  for (auto& [tag, counts] : states) {
    if (counts.sentences < config.min_state_sentences) continue;
    auto raw = std::make_unique<ClassBigramLM>(lexicon, std::move(counts), config.lm);
    family.per_state_[tag] = std::make_unique<ClassBigramLM>(
        ClassBigramLM::mixture(*raw, *family.global_, config.state_mixing));
    family.raw_[tag] = std::move(raw);
  }
  return family;
}

DialogueLMFamily train_dialogue_family(const TaggedCorpus& corpus, const Lexicon& lexicon,
                                       const FamilyConfig& config) {
  if (corpus.empty()) throw TrainingError("cannot train a model family on an empty corpus");
  std::map<std::string, Corpus, std::less<>> by_tag;
  Corpus all;
  all.reserve(corpus.size());
  for (const auto& s : corpus) {
    if (!s.tag.empty()) {
      if (!is_state_tag(s.tag)) throw std::invalid_argument("unknown dialogue state tag '" + s.tag + "'");
      by_tag[s.tag].push_back(s.tokens);
    }
    all.push_back(s.tokens);
  }
  std::map<std::string, ClassCounts, std::less<>> states;
  for (const auto& [tag, sentences] : by_tag) states[tag] = count_corpus(sentences, lexicon);
  return DialogueLMFamily::assemble(lexicon, count_corpus(all, lexicon), std::move(states), config);
}

void DialogueLMFamily::save(std::ostream& out) const {
  out << "railtalk-lm-family 1\n" << std::setprecision(17);
  out << "state_mixing " << config_.state_mixing << '\n';
  out << "min_state_sentences " << config_.min_state_sentences << '\n';
  out << "states " << raw_.size() << '\n';
  out << "model global\n";
  global_->save(out);
  for (const auto& [tag, lm] : raw_) {
    out << "model " << tag << '\n';
    lm->save(out);
  }
}

void DialogueLMFamily::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  save(out);
}

DialogueLMFamily DialogueLMFamily::load(std::istream& in, const Lexicon& lexicon, const std::string& source) {
  LineReader r{in, source};
  auto header = r.expect("railtalk-lm-family", 2);
  if (header[1] != "1") throw LoadError(source, r.lineno, "unsupported family version " + header[1]);
  FamilyConfig config;
  config.state_mixing = to_double(r.expect("state_mixing", 2)[1], r);
  config.min_state_sentences = to_count(r.expect("min_state_sentences", 2)[1], r);
  const auto nstates = to_count(r.expect("states", 2)[1], r);
  if (r.expect("model", 2)[1] != "global") throw LoadError(source, r.lineno, "expected global model first");
  auto global = read_model_block(r, lexicon);
  config.lm = global.config;
  std::map<std::string, ClassCounts, std::less<>> states;
  for (std::uint64_t i = 0; i < nstates; ++i) {
    const auto tag = r.expect("model", 2)[1];
    if (!is_state_tag(tag)) throw LoadError(source, r.lineno, "unknown dialogue state tag '" + tag + "'");
    states[tag] = read_model_block(r, lexicon).counts;
  }
  // Stored states already passed the sentence threshold when trained.
  config.min_state_sentences = 0;
  auto family = DialogueLMFamily::assemble(lexicon, std::move(global.counts), std::move(states), config);
  return family;
}

DialogueLMFamily DialogueLMFamily::load(const std::filesystem::path& path, const Lexicon& lexicon) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), 0, "cannot open model family file");
  return load(in, lexicon, path.string());
}

TaggedCorpus read_tagged_corpus(std::istream& in, const Lexicon& lexicon) {
  TaggedCorpus out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    const auto tab = line.find('\t');
    TaggedSentence s;
    if (tab == std::string::npos) {
      s.tokens = tokenize(line, lexicon);
    } else {
      s.tag = trim(line.substr(0, tab));
      s.tokens = tokenize(line.substr(tab + 1), lexicon);
    }
    out.push_back(std::move(s));
  }
  return out;
}

TaggedCorpus read_tagged_corpus(const std::filesystem::path& path, const Lexicon& lexicon) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), 0, "cannot open corpus");
  return read_tagged_corpus(in, lexicon);
}

Corpus read_corpus(std::istream& in, const Lexicon& lexicon) { return untag(read_tagged_corpus(in, lexicon)); }

Corpus untag(const TaggedCorpus& corpus) {
  Corpus out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) out.push_back(s.tokens);
  return out;
}

Corpus filter_tag(const TaggedCorpus& corpus, std::string_view tag) {
  Corpus out;
  for (const auto& s : corpus) {
    if (s.tag == tag) out.push_back(s.tokens);
  }
  return out;
}

}  // namespace railtalk
