#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "railtalk/dialogue.hpp"

namespace railtalk {

/// Read-only models and data shared by all sessions.
struct Resources {
  Lexicon lexicon;
  SemanticGrammar grammar;
  Timetable timetable;
  StrategyConfig strategy;
  DialogueLMFamily family;
  std::unique_ptr<Confuser> confuser;

  /// Loads lexicon.tsv, timetable.grammar, timetable.csv and strategy.json
  /// from `data_dir`. The LM family is read from `lm_path` when given,
  /// otherwise trained on data_dir/train_corpus.tsv.
  static std::shared_ptr<const Resources> load(const std::filesystem::path& data_dir,
                                               const std::filesystem::path& lm_path = {});
};

struct PipelineOptions {
  NoiseConfig noise;
  /// Noise used instead of `noise` while the expectation carries this tag.
  std::map<std::string, NoiseConfig, std::less<>> tag_noise;
  /// Select the per-state model named by the expectation (false: global model).
  bool state_lm = true;

  const NoiseConfig& noise_for(std::string_view tag) const;
};

/// Turn protocol: tokenize, corrupt with the turn seed, recognize under the
/// current expectation, parse, interpret, and advance the dialogue. The
/// entry is appended to state.turn_log and returned.
const TurnLogEntry& run_turn(DialogueState& state, const Resources& resources, std::string_view user_text,
                             const PipelineOptions& options, std::uint64_t seed);

/// Same, starting from a prepared confusion network.
const TurnLogEntry& run_turn_network(DialogueState& state, const Resources& resources, const ConfusionNetwork& network,
                                     const PipelineOptions& options, std::string_view user_text = {});

}  // namespace railtalk
