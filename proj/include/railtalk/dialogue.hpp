#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "railtalk/calendar.hpp"
#include "railtalk/lm.hpp"
#include "railtalk/parser.hpp"
#include "railtalk/recognizer.hpp"
#include "railtalk/timetable.hpp"

namespace railtalk {

enum class Slot { departure, arrival, date, time };
inline constexpr std::array<Slot, 4> kSlots = {Slot::departure, Slot::arrival, Slot::date, Slot::time};

enum class SlotStatus { empty, hypothesized, confirmed };
enum class Phase { acquiring, confirming, querying, closing };
enum class Outcome { open, S, SC, SF, UF };
enum class Symptom { none, non_understanding, user_initiated_repair, inconsistency };
enum class ActType {
  prompt,
  implicit_confirm_and_prompt,
  explicit_confirm,
  repair_request,
  relax_notice,
  answer,
  reject,
  close,
};

std::string_view to_string(Slot s);
std::string_view to_string(SlotStatus s);
std::string_view to_string(Phase p);
std::string_view to_string(Outcome o);
std::string_view to_string(Symptom s);
std::string_view to_string(ActType t);
std::optional<Slot> slot_from(std::string_view name);
std::optional<Outcome> outcome_from(std::string_view name);

bool is_optional(Slot s);
/// Frame slot kind filling a dialogue slot.
ConceptKind kind_of(Slot s);
std::optional<Slot> slot_of(ConceptKind kind);

struct SlotState {
  std::string value;
  SlotStatus status = SlotStatus::empty;
  double score = 0.0;
  /// Filled by a default after the repair budget ran out.
  bool relaxed = false;
  /// Next fill must be confirmed explicitly (set by repairs).
  bool needs_explicit = false;
  /// Confirmed value displaced by an inconsistency, restored if the user
  /// rejects the new one.
  std::string displaced;

  bool resolved() const { return status == SlotStatus::confirmed || relaxed; }
  bool operator==(const SlotState&) const = default;
};

struct Expectation {
  enum class Strength { strict, permissive };
  std::vector<ConceptKind> expected_kinds;
  std::vector<std::string> predicted_classes;
  std::string state_tag;
  Strength strength = Strength::permissive;
  bool isolated = false;

  bool expects(ConceptKind k) const;
  bool operator==(const Expectation&) const = default;
};

struct DialogueAct {
  ActType type = ActType::prompt;
  std::string text;
  /// Slots whose values the act presents back to the user.
  std::vector<Slot> referenced_slots;
  std::map<Slot, std::string> values;
  /// Slot the act asks for, if any.
  std::optional<Slot> asks;
  bool isolated = false;
  std::vector<Connection> connections;

  bool operator==(const DialogueAct&) const = default;
};

struct StrategyConfig {
  Date session_date{std::chrono::year{2024}, std::chrono::month{5}, std::chrono::day{10}};
  std::vector<Slot> parameter_order{Slot::departure, Slot::arrival, Slot::date, Slot::time};
  int isolated_after_failures = 2;
  std::set<Slot> isolated_slots{Slot::departure, Slot::arrival};
  int optional_repair_budget = 3;
  int required_repair_budget = 4;
  double explicit_confirm_below = 0.7;
  int max_turns = 30;
  double alpha = 1.0;
  double prediction_bonus = 0.5;
  FamilyConfig lm;

  /// Throws ConfigError on unknown slots or out-of-range values.
  static StrategyConfig parse(std::string_view json);
  static StrategyConfig load(const std::filesystem::path& path);
  void validate() const;
};

struct TurnAnalysis {
  struct Fill {
    Slot slot;
    std::string value;
    double score = 1.0;
    bool operator==(const Fill&) const = default;
  };
  std::vector<Fill> matched;
  std::vector<Concept> unexpected;
  Symptom symptom = Symptom::none;
  SpeechAct speech_act = SpeechAct::empty;
  /// Fills that replace a hypothesized or confirmed value under a deny or
  /// correct act.
  std::vector<Fill> corrections;
  /// Slots rejected without a replacement value.
  std::vector<Slot> denied;
  /// Slots the user affirmed.
  std::vector<Slot> affirmed;

  bool operator==(const TurnAnalysis&) const = default;
};

/// One user turn as processed by the pipeline.
struct TurnLogEntry {
  std::size_t index = 0;
  DialogueAct prompt;       // act the user answered
  Expectation expectation;  // expectation in force for this turn
  std::string lm_tag;       // tag of the model the recognizer selected
  std::string user_text;
  std::vector<std::string> reference_words;
  std::optional<ConfusionNetwork> network;
  DecodeResult decode;
  CaseFrame frame;
  TurnAnalysis analysis;
  DialogueAct response;
  std::array<SlotState, 4> slots_after{};
  std::vector<std::string> phenomena;
};

struct DialogueState {
  std::array<SlotState, 4> slots{};
  Slot focus = Slot::departure;
  Phase phase = Phase::acquiring;
  Outcome outcome = Outcome::open;
  Expectation expectation;
  std::array<int, 4> failure_counters{};
  /// Failed attempts per slot, never reset; compared with the repair budgets.
  std::array<int, 4> repair_attempts{};
  /// Hypothesized slots shown in the last implicit confirmation.
  std::vector<Slot> pending;
  /// Slots under explicit confirmation.
  std::vector<Slot> confirm_targets;
  bool isolated = false;
  int turns = 0;
  std::optional<QueryParameters> query;
  std::vector<Connection> results;
  DialogueAct last_act;
  std::vector<TurnLogEntry> turn_log;

  SlotState& slot(Slot s) { return slots[static_cast<std::size_t>(s)]; }
  const SlotState& slot(Slot s) const { return slots[static_cast<std::size_t>(s)]; }
  bool open() const { return outcome == Outcome::open; }
};

/// Opening turn: every slot empty, focus on the first parameter in the
/// configured order, an opening prompt and its expectation.
DialogueState start_session(const StrategyConfig& config);

/// Matches the frame against the current expectation and detects breakdown
/// symptoms.
TurnAnalysis interpret(const DialogueState& state, const CaseFrame& frame, bool decode_ok);

/// Applies the analysis, picks the next act and expectation. Accesses the
/// timetable once all parameters are resolved. Returns the act, which is
/// also stored as state.last_act.
DialogueAct next_turn(DialogueState& state, const TurnAnalysis& analysis, const StrategyConfig& config,
                      const Timetable* timetable);

struct IsolatedSwitch {
  Slot slot;
  std::vector<std::string> classes;  // class ids forming the vocabulary
};

/// The focus slot and its vocabulary once its failure counter reaches the
/// configured threshold, for slots allowed to use isolated acquisition.
std::optional<IsolatedSwitch> should_switch_isolated(const DialogueState& state, const StrategyConfig& config);

/// Query parameters with defaults for unresolved date (tomorrow) and time
/// (main connections of the day). Marks substituted slots as relaxed.
/// Throws std::logic_error if either city is not confirmed.
QueryParameters relax_constraints(DialogueState& state, const StrategyConfig& config);

/// Runs the query and closes the session with S, SC or SF.
DialogueAct build_query_and_answer(DialogueState& state, const Timetable* timetable, const StrategyConfig& config);

/// Word classes predicted for answers about a slot.
std::vector<std::string> predicted_classes_for(Slot s);

/// Surface phrase presenting a slot value ("from milan", "at 09:00").
std::string render_value(Slot s, const std::string& value);

}  // namespace railtalk
