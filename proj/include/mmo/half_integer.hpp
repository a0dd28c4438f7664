#pragma once

#include <cmath>
#include <compare>
#include <cstdlib>
#include <string>

namespace mmo {

// Non-negative multiples of 1/2, stored as a count of halves. Small-oscillation
// counts are resolved to half-rotation precision.
class HalfInteger {
 public:
  constexpr HalfInteger() = default;
  static constexpr HalfInteger from_halves(int halves) { return HalfInteger(halves); }
  static constexpr HalfInteger from_whole(int whole) { return HalfInteger(2 * whole); }

  constexpr int halves() const { return halves_; }
  constexpr double value() const { return 0.5 * halves_; }
  constexpr bool is_whole() const { return halves_ % 2 == 0; }

  constexpr auto operator<=>(const HalfInteger&) const = default;

  // "1", "1.5", "0.5"
  std::string str() const {
    std::string s = std::to_string(halves_ / 2);
    if (halves_ < 0 && halves_ % 2 != 0 && halves_ / 2 == 0) s = "-0";
    if (halves_ % 2 != 0) s += ".5";
    return s;
  }

 private:
  constexpr explicit HalfInteger(int halves) : halves_(halves) {}
  int halves_ = 0;
};

// Parses "2", "1.5", "3.0"; anything that is not a multiple of 1/2 is rejected.
inline bool parse_half_integer(const std::string& text, HalfInteger& out) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') return false;
  const double twice = 2.0 * v;
  const long rounded = std::lround(twice);
  if (std::abs(twice - static_cast<double>(rounded)) > 1e-9) return false;
  out = HalfInteger::from_halves(static_cast<int>(rounded));
  return true;
}

}  // namespace mmo
