// Uniform helpers over the two element types so the summation and
// sensitivity templates can be written once.

#ifndef BSUM_VALUE_OPS_H_
#define BSUM_VALUE_OPS_H_

#include <string>

#include "bsum/kint.h"
#include "bsum/sim_float.h"

namespace bsum {

inline SimFloat add_values(const SimFloat& x, const SimFloat& y,
                           Rounding rounding) {
  return add(x, y, rounding);
}
// Integer addition follows the format's overflow policy; the rounding
// argument is ignored.
inline KInt add_values(const KInt& x, const KInt& y, Rounding) {
  return add(x, y);
}

inline bool is_finite_value(const SimFloat& x) { return x.is_finite(); }
inline bool is_finite_value(const KInt&) { return true; }

// Human-readable exact value: "inf", "-inf" or the dyadic string.
inline std::string describe(const SimFloat& x) {
  if (x.is_inf()) return x.negative() ? "-inf" : "inf";
  return x.to_exact().to_string();
}
inline std::string describe(const KInt& x) { return x.to_string(); }

// Canonical serialized form: the hex pattern for floats, decimal for ints.
inline std::string encode(const SimFloat& x) { return x.to_hex(); }
inline std::string encode(const KInt& x) { return x.to_string(); }

inline SimFloat decode(const FloatFormat& format, const std::string& text) {
  return SimFloat::parse(format, text);
}
inline KInt decode(const IntFormat& format, const std::string& text) {
  return KInt::parse(format, text);
}

inline SimFloat min_value(const FloatFormat& f) {
  return SimFloat::min_finite(f);
}
inline SimFloat max_value(const FloatFormat& f) {
  return SimFloat::max_finite(f);
}
inline KInt min_value(const IntFormat& f) { return KInt::min(f); }
inline KInt max_value(const IntFormat& f) { return KInt::max(f); }

inline bool is_float_type(const SimFloat&) { return true; }
inline bool is_float_type(const KInt&) { return false; }

}  // namespace bsum

#endif  // BSUM_VALUE_OPS_H_
