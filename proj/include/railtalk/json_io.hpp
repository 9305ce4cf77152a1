#pragma once

#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "railtalk/eval.hpp"

namespace railtalk {

using Json = nlohmann::json;

Json to_json(const CaseFrame& frame);
CaseFrame frame_from_json(const Json& j);
Json to_json(const Concept& c);
Json to_json(const NoiseConfig& noise);
NoiseConfig noise_from_json(const Json& j);
Json to_json(const ConfusionNetwork& cn);
Json to_json(const DecodeResult& r);
Json to_json(const DialogueAct& act);
Json to_json(const Expectation& e);
Json to_json(const TurnAnalysis& a);
Json to_json(const TurnLogEntry& e);

/// Read-only inspector view of a dialogue state (slots, focus, phase,
/// counters, expectation, outcome). The turn log is summarized by length.
Json state_view(const DialogueState& st);

Json to_json(const SubsetStats& s);
Json to_json(const EvalReport& r);
Json to_json(const DialogueRecord& r);
DialogueRecord record_from_json(const Json& j);
Json to_json(const TrialCondition& c);
Json to_json(const RuntimeStats& s);

/// Deterministic trial report: configuration, one report per condition and
/// the overall report. Runtime statistics are kept out of it.
Json trial_report(const TrialConfig& config, const TrialResult& result);

/// One DialogueRecord per line.
void write_corpus(std::ostream& out, const std::vector<DialogueRecord>& records);
std::vector<DialogueRecord> read_corpus_jsonl(std::istream& in);

}  // namespace railtalk
