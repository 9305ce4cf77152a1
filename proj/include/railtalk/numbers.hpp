#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace railtalk {

struct NumberWord {
  int value = 0;
  bool ordinal = false;
};

/// Value of a number word from the lexicon ("twenty-one", "third", "oh").
std::optional<NumberWord> number_value(std::string_view word);

/// Cardinal word for 0..31 and the round minutes 35..55.
std::optional<std::string> cardinal_word(int n);
/// Ordinal word for 1..31.
std::optional<std::string> ordinal_word(int n);

/// 1-based month from its name.
std::optional<unsigned> month_value(std::string_view word);
std::string_view month_name(unsigned month);
/// ISO weekday (1 = Monday) from its name.
std::optional<unsigned> weekday_value(std::string_view word);
std::string_view weekday_name(unsigned iso_weekday);

}  // namespace railtalk
