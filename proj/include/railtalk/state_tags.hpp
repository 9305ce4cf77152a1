#pragma once

#include <algorithm>
#include <array>
#include <string_view>

namespace railtalk {

/// Dialogue points shared by the dialogue manager (which emits them with
/// every expectation) and the language model family (which is partitioned
/// by them).
inline constexpr std::array<std::string_view, 6> kStateTags = {
    "ask_departure", "ask_arrival", "ask_date", "ask_time", "confirm_slot", "post_answer",
};

inline bool is_state_tag(std::string_view tag) {
  return std::find(kStateTags.begin(), kStateTags.end(), tag) != kStateTags.end();
}

}  // namespace railtalk
