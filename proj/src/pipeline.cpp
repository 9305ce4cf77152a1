#include "railtalk/pipeline.hpp"

#include <stdexcept>

namespace railtalk {

std::shared_ptr<const Resources> Resources::load(const std::filesystem::path& data_dir,
                                                 const std::filesystem::path& lm_path) {
  auto r = std::make_shared<Resources>();
  r->lexicon = Lexicon::load(data_dir / "lexicon.tsv");
  r->grammar = SemanticGrammar::load(data_dir / "timetable.grammar");
  r->grammar.check_against(r->lexicon);
  r->timetable = Timetable::load(data_dir / "timetable.csv", &r->lexicon);
  r->strategy = StrategyConfig::load(data_dir / "strategy.json");
  if (!lm_path.empty()) {
    r->family = DialogueLMFamily::load(lm_path, r->lexicon);
  } else {
    r->family = train_dialogue_family(read_tagged_corpus(data_dir / "train_corpus.tsv", r->lexicon), r->lexicon,
                                      r->strategy.lm);
  }
  r->confuser = std::make_unique<Confuser>(r->lexicon);
  return r;
}

const NoiseConfig& PipelineOptions::noise_for(std::string_view tag) const {
  const auto it = tag_noise.find(tag);
  return it == tag_noise.end() ? noise : it->second;
}

namespace {

TurnLogEntry& process(DialogueState& state, const Resources& r, const ConfusionNetwork& cn,
                      const PipelineOptions& options, std::string_view user_text) {
  if (!state.open()) throw std::logic_error("session is closed");
  TurnLogEntry entry;
  entry.index = state.turn_log.size();
  entry.prompt = state.last_act;
  entry.expectation = state.expectation;
  entry.user_text = std::string(user_text);
  if (cn.reference) entry.reference_words = *cn.reference;
  entry.network = cn;

  Predictions predictions;
  predictions.state_tag = options.state_lm ? state.expectation.state_tag : std::string();
  predictions.classes = state.expectation.predicted_classes;
  predictions.isolated = state.expectation.isolated;
  predictions.bonus = r.strategy.prediction_bonus;
  const PredictionContext context = apply_predictions(r.family, predictions, r.strategy.alpha);
  entry.lm_tag = context.selected_tag;
  entry.decode = recognize(cn, context);

  const auto tokens = tokens_from_words(entry.decode.words, r.lexicon);
  ParseContext pc{&r.lexicon, r.strategy.session_date};
  entry.frame = parse_utterance(tokens, r.grammar, pc).frame;
  entry.analysis = interpret(state, entry.frame, entry.decode.ok);
  entry.response = next_turn(state, entry.analysis, r.strategy, &r.timetable);
  entry.slots_after = state.slots;
  state.turn_log.push_back(std::move(entry));
  return state.turn_log.back();
}

}  // namespace

const TurnLogEntry& run_turn(DialogueState& state, const Resources& r, std::string_view user_text,
                             const PipelineOptions& options, std::uint64_t seed) {
  const auto words = token_texts(tokenize(user_text, r.lexicon));
  const ConfusionNetwork cn = corrupt(words, options.noise_for(state.expectation.state_tag), seed, *r.confuser);
  return process(state, r, cn, options, user_text);
}

const TurnLogEntry& run_turn_network(DialogueState& state, const Resources& r, const ConfusionNetwork& network,
                                     const PipelineOptions& options, std::string_view user_text) {
  network.validate();
  return process(state, r, network, options, user_text);
}

}  // namespace railtalk
