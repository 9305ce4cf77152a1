#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "railtalk/dialogue.hpp"
#include "railtalk/lm.hpp"

namespace railtalk {

/// Goal of one simulated call.
struct Scenario {
  std::string id;
  std::string departure;
  std::string arrival;
  std::string date;  // ISO
  std::string time;  // "HH:MM" or part of day
  std::string call;  // "scripted" or "free"

  std::string goal(Slot s) const;
  bool operator==(const Scenario&) const = default;
};

/// Tab-separated `id departure arrival date time call`; `#` comment lines.
std::vector<Scenario> load_scenarios(const std::filesystem::path& path);
std::vector<Scenario> parse_scenarios(std::istream& in, const std::string& source = "<scenarios>");

enum class Persona { cooperative, over_answering, restarting, off_task, oov_prone };
inline constexpr Persona kPersonas[] = {Persona::cooperative, Persona::over_answering, Persona::restarting,
                                        Persona::off_task, Persona::oov_prone};
std::string_view to_string(Persona p);
std::optional<Persona> persona_from(std::string_view name);
bool is_cooperative(Persona p);

/// Phenomena tags an utterance may carry.
inline constexpr std::string_view kPhenomena[] = {"shout-surrogate", "restart", "extralinguistic", "ill-formed",
                                                  "oov"};

struct UserTurn {
  std::string text;
  std::vector<std::string> phenomena;
  bool ends_call = false;  // the act closed the dialogue; nothing to say
};

/// Whether an acquired slot value satisfies the goal. Times also match
/// when the acquired value is a part of day containing the goal time.
bool value_matches(Slot s, const std::string& acquired, const Scenario& goal);

/// Next user utterance in reply to `act`. Cooperative personas answer the
/// slot asked for, accept correct presented values and correct wrong ones;
/// over_answering adds arrival and date to its first answer; restarting
/// repeats the first word; oov_prone inserts unknown words; off_task never
/// gives task information.
UserTurn simulate_user(Persona persona, const Scenario& scenario, const DialogueAct& act, const Lexicon& lexicon,
                       const Date& session_date, Rng& rng);

/// Phrase for one goal value as a cooperative user says it.
std::string phrase_for(Slot s, const Scenario& scenario, const Date& session_date, Rng& rng, bool anchored = true);

/// Tagged training sentences for the dialogue LM family: `per_tag`
/// sentences for every state tag, drawn from the persona templates with
/// random goals over the lexicon's cities.
TaggedCorpus generate_training_corpus(const Lexicon& lexicon, const Date& session_date, std::size_t per_tag,
                                      std::uint64_t seed);

/// Writes `tag<TAB>sentence` lines.
void write_tagged_corpus(std::ostream& out, const TaggedCorpus& corpus);

}  // namespace railtalk
