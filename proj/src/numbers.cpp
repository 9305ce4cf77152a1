#include "railtalk/numbers.hpp"

namespace railtalk {

namespace {

constexpr std::string_view kCardinals[] = {
    "zero",        "one",          "two",          "three",        "four",         "five",       "six",
    "seven",       "eight",        "nine",         "ten",          "eleven",       "twelve",     "thirteen",
    "fourteen",    "fifteen",      "sixteen",      "seventeen",    "eighteen",     "nineteen",   "twenty",
    "twenty-one",  "twenty-two",   "twenty-three", "twenty-four",  "twenty-five",  "twenty-six", "twenty-seven",
    "twenty-eight", "twenty-nine", "thirty",       "thirty-one"};

constexpr std::string_view kOrdinals[] = {
    "",              "first",          "second",        "third",        "fourth",        "fifth",
    "sixth",         "seventh",        "eighth",        "ninth",        "tenth",         "eleventh",
    "twelfth",       "thirteenth",     "fourteenth",    "fifteenth",    "sixteenth",     "seventeenth",
    "eighteenth",    "nineteenth",     "twentieth",     "twenty-first", "twenty-second", "twenty-third",
    "twenty-fourth", "twenty-fifth",   "twenty-sixth",  "twenty-seventh", "twenty-eighth", "twenty-ninth",
    "thirtieth",     "thirty-first"};

constexpr std::pair<std::string_view, int> kExtra[] = {
    {"thirty-five", 35}, {"forty", 40}, {"forty-five", 45}, {"fifty", 50}, {"fifty-five", 55}, {"oh", 0}};

constexpr std::string_view kMonths[] = {"january", "february", "march",     "april",   "may",      "june",
                                        "july",    "august",   "september", "october", "november", "december"};

constexpr std::string_view kWeekdays[] = {"monday", "tuesday", "wednesday", "thursday",
                                          "friday", "saturday", "sunday"};

}  // namespace

std::optional<NumberWord> number_value(std::string_view word) {
  for (int i = 0; i < 32; ++i) {
    if (word == kCardinals[i]) return NumberWord{i, false};
    if (i > 0 && word == kOrdinals[i]) return NumberWord{i, true};
  }
  for (const auto& [w, v] : kExtra) {
    if (word == w) return NumberWord{v, false};
  }
  return std::nullopt;
}

std::optional<std::string> cardinal_word(int n) {
  if (n >= 0 && n < 32) return std::string(kCardinals[n]);
  for (const auto& [w, v] : kExtra) {
    if (v == n && w != "oh") return std::string(w);
  }
  return std::nullopt;
}

std::optional<std::string> ordinal_word(int n) {
  if (n >= 1 && n < 32) return std::string(kOrdinals[n]);
  return std::nullopt;
}

std::optional<unsigned> month_value(std::string_view word) {
  for (unsigned i = 0; i < 12; ++i) {
    if (word == kMonths[i]) return i + 1;
  }
  return std::nullopt;
}

std::string_view month_name(unsigned month) { return month >= 1 && month <= 12 ? kMonths[month - 1] : ""; }

std::optional<unsigned> weekday_value(std::string_view word) {
  for (unsigned i = 0; i < 7; ++i) {
    if (word == kWeekdays[i]) return i + 1;
  }
  return std::nullopt;
}

std::string_view weekday_name(unsigned iso_weekday) {
  return iso_weekday >= 1 && iso_weekday <= 7 ? kWeekdays[iso_weekday - 1] : "";
}

}  // namespace railtalk
