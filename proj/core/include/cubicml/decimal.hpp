#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace cubicml {

// Exact base-10 fixed point value: digits / 10^scale.  Used for stepped
// fractional dimensions so that equality and divisibility checks never hit
// binary floating point artifacts (0.85 - 0.77 is not a multiple of 0.01 in
// doubles, but it is here).
struct Decimal {
  std::int64_t digits = 0;
  std::uint32_t scale = 0;

  static Decimal parse(std::string_view text);
  static Decimal from_double(double value);

  double to_double() const;
  std::string to_string() const;

  // Rewrites both operands to a common scale before comparing.
  friend bool operator==(const Decimal& a, const Decimal& b);
  friend bool operator<(const Decimal& a, const Decimal& b);
};

// a + k * b, computed exactly at the common scale.
Decimal decimal_add_scaled(const Decimal& base, const Decimal& step, std::int64_t k);

// Number of steps in [lo, hi] inclusive, or 0 if hi - lo is not an exact
// multiple of step.  step must be positive.
std::int64_t decimal_step_count(const Decimal& lo, const Decimal& hi, const Decimal& step);

}  // namespace cubicml
