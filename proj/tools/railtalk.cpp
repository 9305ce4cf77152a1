// Command-line front end: data generation, model training, single-turn
// debugging, batch trials, scoring and the HTTP service.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "railtalk/json_io.hpp"
#include "railtalk/service.hpp"
#include "railtalk/state_tags.hpp"

namespace fs = std::filesystem;
using namespace railtalk;

namespace {

#ifndef RAILTALK_DATA_DIR
#define RAILTALK_DATA_DIR "data"
#endif

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  std::vector<std::uint64_t> out;
  for (const auto& part : split(spec, ',')) {
    const std::string item = trim(part);
    if (item.empty()) continue;
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      out.push_back(std::stoull(item));
      continue;
    }
    const auto lo = std::stoull(item.substr(0, dash)), hi = std::stoull(item.substr(dash + 1));
    if (hi < lo) throw std::invalid_argument("bad seed range '" + item + "'");
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
  }
  if (out.empty()) throw std::invalid_argument("no seeds given");
  return out;
}

std::string fixed(double v, int digits) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(digits) << v;
  return o.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::map<std::string, NoiseConfig, std::less<>> parse_tag_noise(const std::vector<std::string>& items) {
  std::map<std::string, NoiseConfig, std::less<>> out;
  for (const auto& item : items) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("--tag-noise wants tag:spec, got '" + item + "'");
    const std::string tag = item.substr(0, colon);
    if (!is_state_tag(tag)) throw std::invalid_argument("unknown state tag '" + tag + "'");
    out[tag] = parse_noise(item.substr(colon + 1));
  }
  return out;
}

void print_tree(std::ostream& out, const ParseNode& n, const SemanticGrammar& g, const std::vector<Token>& tokens,
                int depth) {
  out << std::string(2 * depth + 2, ' ') << g.nonterminals()[n.nt] << " [" << n.span.begin << "," << n.span.end
      << ")";
  std::vector<std::string> words;
  for (auto i = n.span.begin; i < n.span.end; ++i) words.push_back(tokens[i].text);
  out << " \"" << join(words, " ") << "\"\n";
  for (const auto& c : n.children) {
    if (!c.is_terminal()) print_tree(out, c, g, tokens, depth + 1);
  }
}

int run_parse(const fs::path& data, fs::path grammar_path, const std::string& text, std::ostream& out) {
  const Lexicon lexicon = Lexicon::load(data / "lexicon.tsv");
  if (grammar_path.empty()) grammar_path = data / "timetable.grammar";
  const SemanticGrammar grammar = SemanticGrammar::load(grammar_path);
  grammar.check_against(lexicon);
  const StrategyConfig strategy = StrategyConfig::load(data / "strategy.json");
  const auto tokens = tokenize(text, lexicon);
  const ParseResult r = parse_utterance(tokens, grammar, {&lexicon, strategy.session_date});

  out << "tokens:\n";
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out << "  " << i << " " << tokens[i].text << " "
        << (tokens[i].oov ? std::string("OOV") : lexicon.word_class(tokens[i].cls).id) << "\n";
  }
  out << "structures:\n";
  for (const auto& s : r.analysis.structures) print_tree(out, s.tree, grammar, tokens, 0);
  out << "per_token:\n";
  for (std::size_t i = 0; i < r.analysis.per_token.size(); ++i) {
    std::vector<std::string> labels;
    for (const auto& [nt, span] : r.analysis.per_token[i]) {
      labels.push_back(nt + "[" + std::to_string(span.begin) + "," + std::to_string(span.end) + ")");
    }
    out << "  " << i << " " << join(labels, " ") << "\n";
  }
  out << "concepts:\n";
  for (const auto& c : r.collected) {
    const bool kept = std::find(r.resolution.concepts.begin(), r.resolution.concepts.end(), c) !=
                      r.resolution.concepts.end();
    out << "  " << (kept ? "+ " : "- ") << to_string(c.kind) << " = " << c.value << " [" << c.span.begin << ","
        << c.span.end << ") score " << fixed(c.score, 3) << "\n";
  }
  out << "resolution: " << (r.resolution.exact ? "exact" : "greedy") << "\n";
  for (const auto& d : r.diagnostics) out << "diagnostic: " << d << "\n";
  out << "frame:\n" << to_json(r.frame).dump(2) << "\n";
  return 0;
}

Vocabulary read_vocab(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Vocabulary v;
  std::string line;
  while (std::getline(in, line)) {
    const std::string w = trim(line);
    if (!w.empty() && w[0] != '#') v.insert(w);
  }
  return v;
}

TrialConfig trial_config(const fs::path& scenarios, const std::string& sweep, const std::string& base_noise,
                         const std::vector<std::string>& tag_noise, const std::string& seeds,
                         const std::vector<std::string>& personas, bool global_lm) {
  TrialConfig c;
  c.scenarios = load_scenarios(scenarios);
  c.seeds = parse_seeds(seeds);
  c.personas.clear();
  for (const auto& p : personas) {
    const auto persona = persona_from(p);
    if (!persona) throw std::invalid_argument("unknown persona '" + p + "'");
    c.personas.push_back(*persona);
  }
  const NoiseConfig base = parse_noise(base_noise);
  const auto tags = parse_tag_noise(tag_noise);
  for (const auto& v : split(sweep, ',')) {
    if (trim(v).empty()) continue;
    NoiseConfig n = base;
    n.p_sub = std::stod(trim(v));
    n.validate();
    c.conditions.push_back({"p_sub=" + fixed(n.p_sub, 2), n, tags, !global_lm});
  }
  if (c.conditions.empty()) c.conditions.push_back({"p_sub=" + fixed(base.p_sub, 2), base, tags, !global_lm});
  return c;
}

void print_summary(const TrialConfig& config, const TrialResult& result, std::ostream& out) {
  out << "condition      dialogues  WA      SU      success  S     SC    SF    UF    turns\n";
  for (std::size_t i = 0; i < config.conditions.size(); ++i) {
    const auto& r = result.per_condition[i];
    out << std::left << std::setw(15) << config.conditions[i].name << std::setw(11) << r.dialogues << std::setw(8)
        << fixed(r.all.wa(), 3) << std::setw(8) << fixed(r.all.su(), 3) << std::setw(9) << fixed(r.success_rate, 3)
        << std::setw(6) << fixed(r.outcome_rate(Outcome::S), 2) << std::setw(6) << fixed(r.outcome_rate(Outcome::SC), 2)
        << std::setw(6) << fixed(r.outcome_rate(Outcome::SF), 2) << std::setw(6) << fixed(r.outcome_rate(Outcome::UF), 2)
        << fixed(r.mean_turns, 1) << "\n";
  }
}

void chat(const Resources& r, const PipelineOptions& options, std::uint64_t seed, bool show_network) {
  DialogueState st = start_session(r.strategy);
  std::cout << "system: " << st.last_act.text << "\n";
  std::string line;
  for (std::uint64_t t = 1; st.open() && (std::cout << "you: " << std::flush, std::getline(std::cin, line)); ++t) {
    const auto& e = run_turn(st, r, line, options, mix_seed(seed, t));
    if (show_network && e.network) std::cout << e.network->to_string();
    std::cout << "  heard: " << join(e.decode.words, " ") << (e.decode.ok ? "" : " (" + e.decode.failure + ")")
              << "\n  frame: " << to_json(e.frame).dump() << "\n  symptom: " << to_string(e.analysis.symptom)
              << "\nsystem: " << e.response.text << "\n";
  }
  if (!st.open()) std::cout << "outcome: " << to_string(st.outcome) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"railtalk: spoken train timetable dialogue pipeline over simulated recognition"};
  app.require_subcommand(1);
  std::string data_dir = RAILTALK_DATA_DIR;
  app.add_option("--data", data_dir, "Directory with lexicon, grammar, timetable, strategy and training corpus");

  std::string lm_path;
  auto resources = [&]() { return Resources::load(data_dir, lm_path); };

  // gen-corpus
  auto* gen = app.add_subcommand("gen-corpus", "Generate a tagged synthetic training corpus");
  std::size_t per_tag = 400;
  std::uint64_t gen_seed = 7;
  std::string gen_out;
  gen->add_option("--per-tag", per_tag, "Sentences per dialogue state")->capture_default_str();
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("--out", gen_out, "Output file (default stdout)");

  // train-lm
  auto* train = app.add_subcommand("train-lm", "Train the dialogue-dependent LM family");
  std::string train_corpus, train_out;
  train->add_option("--corpus", train_corpus, "Tagged corpus (default <data>/train_corpus.tsv)");
  train->add_option("--out", train_out, "Model file")->required();

  // corrupt
  auto* corr = app.add_subcommand("corrupt", "Turn a sentence into a seeded confusion network");
  std::string corr_text, corr_noise = "p_sub=0.3";
  std::uint64_t corr_seed = 1;
  corr->add_option("--text", corr_text)->required();
  corr->add_option("--noise", corr_noise)->capture_default_str();
  corr->add_option("--seed", corr_seed)->capture_default_str();

  // decode
  auto* dec = app.add_subcommand("decode", "Decode a confusion network");
  std::string dec_network, dec_vocab, dec_tag;
  double dec_alpha = 1.0;
  dec->add_option("--lm", lm_path, "LM family file (default: train from <data>)");
  dec->add_option("--network", dec_network)->required();
  dec->add_option("--vocab", dec_vocab, "One word per line; switches to isolated mode");
  dec->add_option("--alpha", dec_alpha)->capture_default_str();
  dec->add_option("--tag", dec_tag, "Dialogue state whose model is used (default global)");

  // parse
  auto* par = app.add_subcommand("parse", "Semantic analysis of an utterance");
  std::string par_grammar, par_text;
  par->add_option("--grammar", par_grammar, "Grammar file (default <data>/timetable.grammar)");
  par->add_option("--text", par_text)->required();

  // trial
  auto* tri = app.add_subcommand("trial", "Run simulated dialogues and write report and corpus");
  std::string tri_scenarios, tri_sweep, tri_noise = "p_sub=0", tri_seeds = "1", tri_out;
  std::vector<std::string> tri_tag_noise, tri_personas{"cooperative"};
  int tri_threads = 0;
  bool tri_serial = false, tri_global = false, tri_quiet = false;
  tri->add_option("--scenarios", tri_scenarios, "Scenario file (default <data>/scenarios.tsv)");
  tri->add_option("--noise-sweep", tri_sweep, "Comma-separated p_sub values, one condition each");
  tri->add_option("--noise", tri_noise, "Base noise, e.g. p_sub=0.1,p_del=0.05,p_ins=0")->capture_default_str();
  tri->add_option("--tag-noise", tri_tag_noise, "Per-state noise override tag:spec (repeatable)");
  tri->add_option("--seeds", tri_seeds, "Seeds, e.g. 1-25 or 3,5,8")->capture_default_str();
  tri->add_option("--personas", tri_personas, "Personas to simulate")->delimiter(',')->capture_default_str();
  tri->add_option("--threads", tri_threads, "OpenMP threads (0: default)");
  tri->add_flag("--serial", tri_serial, "Use the serial reference implementation");
  tri->add_flag("--global-lm", tri_global, "Always decode with the global LM");
  tri->add_flag("--quiet", tri_quiet);
  tri->add_option("--lm", lm_path, "LM family file (default: train from <data>)");
  tri->add_option("--out", tri_out, "Output directory")->required();

  // score
  auto* sco = app.add_subcommand("score", "Aggregate a dialogue corpus");
  std::string sco_corpus;
  sco->add_option("--corpus", sco_corpus)->required();

  // serve
  auto* srv = app.add_subcommand("serve", "Serve the session API over HTTP");
  std::string srv_host = "127.0.0.1";
  int srv_port = 8080;
  srv->add_option("--host", srv_host)->capture_default_str();
  srv->add_option("--port", srv_port)->capture_default_str();
  srv->add_option("--lm", lm_path, "LM family file (default: train from <data>)");

  // chat
  auto* cht = app.add_subcommand("chat", "Interactive dialogue on stdin");
  std::string cht_noise = "p_sub=0";
  std::uint64_t cht_seed = 1;
  bool cht_network = false;
  cht->add_option("--noise", cht_noise)->capture_default_str();
  cht->add_option("--seed", cht_seed)->capture_default_str();
  cht->add_flag("--show-network", cht_network);
  cht->add_option("--lm", lm_path, "LM family file (default: train from <data>)");

  CLI11_PARSE(app, argc, argv);
  const fs::path data(data_dir);

  try {
    if (*gen) {
      const Lexicon lexicon = Lexicon::load(data / "lexicon.tsv");
      const StrategyConfig strategy = StrategyConfig::load(data / "strategy.json");
      const auto corpus = generate_training_corpus(lexicon, strategy.session_date, per_tag, gen_seed);
      if (gen_out.empty()) {
        write_tagged_corpus(std::cout, corpus);
      } else {
        std::ofstream out(gen_out);
        write_tagged_corpus(out, corpus);
      }
    } else if (*train) {
      const Lexicon lexicon = Lexicon::load(data / "lexicon.tsv");
      const StrategyConfig strategy = StrategyConfig::load(data / "strategy.json");
      const fs::path corpus = train_corpus.empty() ? data / "train_corpus.tsv" : fs::path(train_corpus);
      const auto family = train_dialogue_family(read_tagged_corpus(corpus, lexicon), lexicon, strategy.lm);
      family.save(fs::path(train_out));
      std::cerr << "trained global model and states: " << join(family.trained_tags(), ", ") << "\n";
    } else if (*corr) {
      const Lexicon lexicon = Lexicon::load(data / "lexicon.tsv");
      const Confuser confuser(lexicon);
      const auto words = token_texts(tokenize(corr_text, lexicon));
      std::cout << corrupt(words, parse_noise(corr_noise), corr_seed, confuser).to_string();
    } else if (*dec) {
      const auto r = resources();
      const auto cn = ConfusionNetwork::read(fs::path(dec_network));
      DecodeResult d;
      if (!dec_vocab.empty()) {
        d = decode_isolated(cn, read_vocab(dec_vocab));
      } else {
        DecodeOptions o;
        o.alpha = dec_alpha;
        d = decode_continuous(cn, r->family.select(dec_tag), o);
      }
      std::cout << to_json(d).dump(2) << "\n";
      return d.ok ? 0 : 3;
    } else if (*par) {
      return run_parse(data, par_grammar, par_text, std::cout);
    } else if (*tri) {
      const auto r = resources();
      const fs::path scen = tri_scenarios.empty() ? data / "scenarios.tsv" : fs::path(tri_scenarios);
      const auto config = trial_config(scen, tri_sweep, tri_noise, tri_tag_noise, tri_seeds, tri_personas, tri_global);
      const auto result = tri_serial ? run_trial_serial(*r, config) : run_trial_parallel(*r, config, tri_threads);
      fs::create_directories(tri_out);
      write_file(fs::path(tri_out) / "report.json", trial_report(config, result).dump(2) + "\n");
      {
        std::ofstream out(fs::path(tri_out) / "corpus.jsonl", std::ios::binary);
        write_corpus(out, result.records);
      }
      write_file(fs::path(tri_out) / "runtime.json", to_json(result.runtime).dump(2) + "\n");
      if (!tri_quiet) {
        print_summary(config, result, std::cout);
        std::cout << result.runtime.dialogues << " dialogues in " << fixed(result.runtime.seconds, 2) << " s on "
                  << result.runtime.threads << " thread(s)\n";
      }
    } else if (*sco) {
      std::ifstream in(sco_corpus);
      if (!in) throw std::runtime_error("cannot open " + sco_corpus);
      std::vector<std::string> warnings;
      const auto records = read_corpus_jsonl(in);
      recovery_metrics(records, &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      std::cout << to_json(aggregate(records)).dump(2) << "\n";
    } else if (*srv) {
      SessionManager manager(resources(), load_scenarios(data / "scenarios.tsv"));
      std::cerr << "listening on http://" << srv_host << ":" << srv_port << "\n";
      serve(manager, srv_host, srv_port);
    } else if (*cht) {
      const auto r = resources();
      PipelineOptions o;
      o.noise = parse_noise(cht_noise);
      chat(*r, o, cht_seed, cht_network);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
