#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "railtalk/pipeline.hpp"
#include "railtalk/simulator.hpp"

namespace railtalk {

struct AlignmentCounts {
  std::size_t reference = 0;  // N
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;

  std::size_t errors() const { return substitutions + deletions + insertions; }
  AlignmentCounts& operator+=(const AlignmentCounts& o);
  bool operator==(const AlignmentCounts&) const = default;
};

/// Minimum edit-distance alignment with unit costs. Among minimum-cost
/// alignments a substitution is preferred over an insertion/deletion pair,
/// then the leftmost edit.
AlignmentCounts align_words(const std::vector<std::string>& reference, const std::vector<std::string>& hypothesis);

/// (N - S - D - I) / N, unclamped. Throws std::invalid_argument for an
/// empty reference.
double word_accuracy(const std::vector<std::string>& reference, const std::vector<std::string>& hypothesis);
double word_accuracy(const AlignmentCounts& counts);

/// Exact equality of slot values and speech act.
bool sentence_understanding(const CaseFrame& reference, const CaseFrame& hypothesis);
/// Shared (slot, value) pairs plus speech act over their union; 1 when both
/// frames are empty.
double partial_understanding(const CaseFrame& reference, const CaseFrame& hypothesis);

struct UtteranceRecord {
  std::string reference_text;
  std::vector<std::string> reference_tokens;
  std::vector<std::string> hypothesis_tokens;
  CaseFrame reference_frame;
  CaseFrame hypothesis_frame;
  std::vector<std::string> phenomena;
  std::string state_tag;
};

enum class Recovery { none, explicit_repair, implicit_repair, unrecovered };
std::string_view to_string(Recovery r);
std::optional<Recovery> recovery_from(std::string_view name);

/// Per user turn: was the system's reply contextually appropriate, did a
/// miscommunication start here, and how was it recovered.
struct TurnAnnotation {
  bool appropriate = true;
  bool miscommunication = false;
  Recovery recovery = Recovery::none;
  bool operator==(const TurnAnnotation&) const = default;
};

struct DialogueRecord {
  std::string id;
  Scenario scenario;
  Persona persona = Persona::cooperative;
  bool cooperative = true;
  std::uint64_t seed = 0;
  std::string condition;
  std::vector<UtteranceRecord> utterances;
  std::vector<std::pair<std::string, std::string>> system_acts;  // (act type, text), opening prompt first
  std::vector<std::string> symptoms;
  /// Empty when the dialogue was not annotated.
  std::vector<TurnAnnotation> annotations;
  bool query_executed = false;
  std::map<Slot, std::string> acquired;
  std::set<std::string> relaxed;
  Outcome dm_outcome = Outcome::open;
  Outcome outcome = Outcome::open;
  int turns = 0;
  std::optional<int> turns_to_query;
  std::string error;
};

/// S iff the query ran with all four parameters matching the scenario; SC
/// iff it ran with date and/or time relaxed and everything else matching;
/// otherwise UF for non-cooperative users and SF for the rest. Throws
/// std::invalid_argument when the record has no scenario.
Outcome classify_dialogue(const DialogueRecord& record);

/// Automatic annotation from the turn log and the scenario goal.
std::vector<TurnAnnotation> annotate_turns(const std::vector<TurnLogEntry>& log, const Scenario& scenario);

struct RecoveryMetrics {
  double ir = 0.0;
  double er = 0.0;
  std::size_t miscommunications = 0;
  std::size_t explicit_recoveries = 0;
  std::size_t implicit_recoveries = 0;
  std::size_t excluded = 0;  // records without annotations
};

RecoveryMetrics recovery_metrics(const std::vector<DialogueRecord>& records, std::vector<std::string>* warnings = nullptr);

struct SubsetStats {
  std::size_t utterances = 0;
  AlignmentCounts counts;
  std::size_t understood = 0;
  double wa() const;
  double su() const;
};

struct EvalReport {
  std::size_t dialogues = 0;
  SubsetStats all;
  SubsetStats without_phenomena;
  std::map<std::string, SubsetStats> per_phenomenon;
  double su_partial = 0.0;
  std::map<std::string, std::size_t> outcome_counts;  // S, SC, SF, UF
  double success_rate = 0.0;
  double upper_bound_success_rate = 0.0;  // UF dialogues excluded
  RecoveryMetrics recovery;
  double ca = 0.0;
  std::size_t annotated_acts = 0;
  double mean_turns = 0.0;
  double mean_turns_to_query = 0.0;
  std::size_t errors = 0;

  double outcome_rate(Outcome o) const;
};

/// Aggregates from integer counts (and a sorted sum for partial SU), so the
/// result does not depend on record order.
EvalReport aggregate(const std::vector<DialogueRecord>& records);

struct TrialCondition {
  std::string name;
  NoiseConfig noise;
  std::map<std::string, NoiseConfig, std::less<>> tag_noise;
  bool state_lm = true;
};

struct TrialConfig {
  std::vector<Scenario> scenarios;
  std::vector<Persona> personas{Persona::cooperative};
  std::vector<TrialCondition> conditions;
  std::vector<std::uint64_t> seeds{1};

  std::size_t dialogues() const { return scenarios.size() * personas.size() * conditions.size() * seeds.size(); }
};

struct RuntimeStats {
  double seconds = 0.0;
  int threads = 1;
  std::size_t dialogues = 0;
  std::size_t turns = 0;
};

struct TrialResult {
  std::vector<DialogueRecord> records;  // condition, seed, scenario, persona order
  std::vector<EvalReport> per_condition;
  EvalReport overall;
  RuntimeStats runtime;
};

/// One simulated call through the full pipeline. Component failures are
/// recorded in `error` and classified SF.
DialogueRecord run_dialogue(const Resources& resources, const Scenario& scenario, Persona persona,
                            const TrialCondition& condition, std::uint64_t seed);

/// Serial reference implementation.
TrialResult run_trial_serial(const Resources& resources, const TrialConfig& config);
/// Dialogues fanned out over OpenMP threads; identical result to the serial
/// run. `threads` <= 0 uses the OpenMP default.
TrialResult run_trial_parallel(const Resources& resources, const TrialConfig& config, int threads = 0);

/// Parses "p_sub=0.1,p_del=0.05,p_ins=0" style noise specs.
NoiseConfig parse_noise(std::string_view spec);

}  // namespace railtalk
