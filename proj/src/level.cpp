#include "textlevel/level.hpp"

namespace textlevel {

std::string to_string(Level l) {
  switch (l) {
    case Level::N1: return "N1";
    case Level::N2: return "N2";
    case Level::N3: return "N3";
    case Level::N4: return "N4";
    case Level::N5: return "N5";
  }
  return "?";
}

std::optional<Level> level_from_string(const std::string& s) {
  if (s == "N1") return Level::N1;
  if (s == "N2") return Level::N2;
  if (s == "N3") return Level::N3;
  if (s == "N4") return Level::N4;
  if (s == "N5") return Level::N5;
  return std::nullopt;
}

}  // namespace textlevel
