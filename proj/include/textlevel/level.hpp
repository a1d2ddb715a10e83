#ifndef TEXTLEVEL_LEVEL_HPP_
#define TEXTLEVEL_LEVEL_HPP_

#include <array>
#include <optional>
#include <string>

namespace textlevel {

// JLPT proficiency levels. N5 is the beginner level, N1 the hardest.
// The underlying value orders levels by difficulty: larger value = harder.
enum class Level : int { N5 = 0, N4 = 1, N3 = 2, N2 = 3, N1 = 4 };

inline constexpr int kLevelCount = 5;

inline constexpr std::array<Level, kLevelCount> kLevelsEasyFirst = {
    Level::N5, Level::N4, Level::N3, Level::N2, Level::N1};

// Display order used by the stat tables and reports.
inline constexpr std::array<Level, kLevelCount> kLevelsHardFirst = {
    Level::N1, Level::N2, Level::N3, Level::N4, Level::N5};

constexpr int level_index(Level l) { return static_cast<int>(l); }  // 0 = N5

constexpr Level level_at(int index) { return static_cast<Level>(index); }

constexpr bool harder_than(Level a, Level b) {
  return level_index(a) > level_index(b);
}

std::string to_string(Level l);
std::optional<Level> level_from_string(const std::string& s);

}  // namespace textlevel

#endif  // TEXTLEVEL_LEVEL_HPP_
