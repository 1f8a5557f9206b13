#include "cubicml/decimal.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

#include "cubicml/errors.hpp"

namespace cubicml {

namespace {

std::int64_t pow10_i64(std::uint32_t exp) {
  std::int64_t r = 1;
  for (std::uint32_t i = 0; i < exp; ++i) {
    if (r > std::numeric_limits<std::int64_t>::max() / 10) {
      throw ValidationError("Decimal: scale overflow");
    }
    r *= 10;
  }
  return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw ValidationError("Decimal: arithmetic overflow");
  }
  return out;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out)) {
    throw ValidationError("Decimal: arithmetic overflow");
  }
  return out;
}

// Rescale both values to the larger scale so digit counts are comparable.
void align(const Decimal& a, const Decimal& b, std::int64_t& da, std::int64_t& db) {
  const std::uint32_t s = a.scale > b.scale ? a.scale : b.scale;
  da = checked_mul(a.digits, pow10_i64(s - a.scale));
  db = checked_mul(b.digits, pow10_i64(s - b.scale));
}

Decimal normalized(std::int64_t digits, std::uint32_t scale) {
  while (scale > 0 && digits % 10 == 0) {
    digits /= 10;
    --scale;
  }
  return Decimal{digits, scale};
}

}  // namespace

Decimal Decimal::parse(std::string_view text) {
  if (text.empty()) throw ValidationError("Decimal: empty string");
  std::size_t pos = 0;
  bool negative = false;
  if (text[pos] == '+' || text[pos] == '-') {
    negative = text[pos] == '-';
    ++pos;
  }
  std::int64_t digits = 0;
  std::uint32_t scale = 0;
  bool seen_digit = false;
  bool seen_point = false;
  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (c == '.') {
      if (seen_point) throw ValidationError("Decimal: malformed number '" + std::string(text) + "'");
      seen_point = true;
      continue;
    }
    if (c < '0' || c > '9') {
      throw ValidationError("Decimal: malformed number '" + std::string(text) + "'");
    }
    digits = checked_add(checked_mul(digits, 10), c - '0');
    if (seen_point) ++scale;
    seen_digit = true;
  }
  if (!seen_digit) throw ValidationError("Decimal: malformed number '" + std::string(text) + "'");
  if (negative) digits = -digits;
  return normalized(digits, scale);
}

Decimal Decimal::from_double(double value) {
  if (!std::isfinite(value)) throw ValidationError("Decimal: non-finite value");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  std::string_view text(buf, static_cast<std::size_t>(res.ptr - buf));
  // Shortest round-trip form may use exponent notation for very small or very
  // large magnitudes; those are outside what stepped dimensions need.
  if (text.find('e') != std::string_view::npos || text.find('E') != std::string_view::npos) {
    throw ValidationError("Decimal: value " + std::string(text) + " not representable as plain decimal");
  }
  return parse(text);
}

double Decimal::to_double() const {
  return static_cast<double>(digits) / static_cast<double>(pow10_i64(scale));
}

std::string Decimal::to_string() const {
  std::int64_t d = digits;
  const bool negative = d < 0;
  std::uint64_t mag = negative ? -static_cast<std::uint64_t>(d) : static_cast<std::uint64_t>(d);
  std::string raw = std::to_string(mag);
  std::string out;
  if (scale == 0) {
    out = raw;
  } else {
    if (raw.size() <= scale) raw.insert(0, scale - raw.size() + 1, '0');
    out = raw.substr(0, raw.size() - scale) + "." + raw.substr(raw.size() - scale);
  }
  return negative ? "-" + out : out;
}

bool operator==(const Decimal& a, const Decimal& b) {
  std::int64_t da, db;
  align(a, b, da, db);
  return da == db;
}

bool operator<(const Decimal& a, const Decimal& b) {
  std::int64_t da, db;
  align(a, b, da, db);
  return da < db;
}

Decimal decimal_add_scaled(const Decimal& base, const Decimal& step, std::int64_t k) {
  const std::uint32_t s = base.scale > step.scale ? base.scale : step.scale;
  const std::int64_t db = checked_mul(base.digits, pow10_i64(s - base.scale));
  const std::int64_t ds = checked_mul(step.digits, pow10_i64(s - step.scale));
  return normalized(checked_add(db, checked_mul(ds, k)), s);
}

std::int64_t decimal_step_count(const Decimal& lo, const Decimal& hi, const Decimal& step) {
  if (step.digits <= 0) throw ValidationError("Decimal: step must be positive");
  std::uint32_t s = lo.scale > hi.scale ? lo.scale : hi.scale;
  if (step.scale > s) s = step.scale;
  const std::int64_t dlo = checked_mul(lo.digits, pow10_i64(s - lo.scale));
  const std::int64_t dhi = checked_mul(hi.digits, pow10_i64(s - hi.scale));
  const std::int64_t dstep = checked_mul(step.digits, pow10_i64(s - step.scale));
  if (dhi < dlo) throw ValidationError("Decimal: range upper bound below lower bound");
  const std::int64_t span = dhi - dlo;
  if (span % dstep != 0) return 0;
  return span / dstep + 1;
}

}  // namespace cubicml
