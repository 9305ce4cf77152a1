#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace railtalk {

/// Raised when a data file (lexicon, grammar, timetable, model) does not
/// conform to its format. Carries the 1-based line number when known.
class LoadError : public std::runtime_error {
public:
  LoadError(const std::string& source, std::size_t line, const std::string& msg)
      : std::runtime_error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + msg),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Half-open token interval [begin, end).
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - begin; }
  bool empty() const { return end <= begin; }
  bool contains(std::size_t pos) const { return pos >= begin && pos < end; }
  bool overlaps(const Span& o) const { return begin < o.end && o.begin < end; }
  auto operator<=>(const Span&) const = default;
};

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_ws(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string lowercase(std::string_view s);

std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 1469598103934665603ull);

/// splitmix64 finalizer, used to derive independent seeds from a base seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded generator with distribution code that does not depend on the
/// standard library's (implementation-defined) distribution classes, so
/// seeded outputs are stable across toolchains.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n); n > 0.
  std::size_t below(std::size_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
  }

  bool chance(double p) { return uniform() < p; }

  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }

private:
  std::mt19937_64 engine_;
};

/// Levenshtein distance over bytes.
std::size_t edit_distance(std::string_view a, std::string_view b);

/// 1 - distance / max(len); 1 for two empty strings.
double edit_similarity(std::string_view a, std::string_view b);

}  // namespace railtalk
