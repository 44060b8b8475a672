// Bit-exact emulation of (k, l)-bit binary floating point.
//
// A format has k mantissa bits and l exponent bits. Normal values are
// (-1)^s (1 + M 2^-k) 2^E with E in [-(2^(l-1) - 2), 2^(l-1) - 1]; subnormals
// share the smallest exponent and drop the implicit leading one. There is no
// NaN, -0 is identified with +0, and +inf behaves as n_max + ulp(n_max)
// (= 2^(emax+1)) for rounding: any result of magnitude at least 2^(emax+1)
// after rounding is infinite, in every rounding mode.
//
// Arithmetic is performed on 128-bit integers with exact alignment, so each
// operation rounds exactly once, as if computed over the reals first.

#ifndef BSUM_SIM_FLOAT_H_
#define BSUM_SIM_FLOAT_H_

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "bsum/dyadic.h"

namespace bsum {

using u128 = unsigned __int128;
using i128 = __int128;

enum class RoundingMode {
  kNearestEven,   // banker's rounding
  kTowardZero,    // RTZ
  kTowardPosInf,
  kTowardNegInf,
};

// The two rounding modes a summation may be configured with.
enum class Rounding { kBanker, kRtz };

RoundingMode to_mode(Rounding rounding);
std::string to_string(Rounding rounding);
Rounding parse_rounding(const std::string& text);

class FloatFormat {
 public:
  // Largest supported sizes: 1 <= k <= 60 and 2 <= l <= 30. Throws
  // PreconditionError otherwise.
  FloatFormat(int mantissa_bits, int exponent_bits);

  int k() const { return k_; }
  int l() const { return l_; }
  int64_t emin() const { return -((int64_t{1} << (l_ - 1)) - 2); }
  int64_t emax() const { return (int64_t{1} << (l_ - 1)) - 1; }
  int64_t bias() const { return (int64_t{1} << (l_ - 1)) - 1; }
  int total_bits() const { return 1 + l_ + k_; }

  friend bool operator==(const FloatFormat& a, const FloatFormat& b) {
    return a.k_ == b.k_ && a.l_ == b.l_;
  }
  friend bool operator!=(const FloatFormat& a, const FloatFormat& b) {
    return !(a == b);
  }
  std::string to_string() const;

 private:
  int k_;
  int l_;
};

enum class FloatClass { kZero, kSubnormal, kNormal, kPosInf, kNegInf };

class SimFloat {
 public:
  using Format = FloatFormat;

  // +0 in the given format.
  explicit SimFloat(FloatFormat format);

  static SimFloat zero(FloatFormat format) { return SimFloat(format); }
  static SimFloat infinity(FloatFormat format, bool negative);
  static SimFloat max_finite(FloatFormat format);
  static SimFloat min_finite(FloatFormat format);
  // Normal float from fields; exponent must lie in the normal range.
  static SimFloat normal(FloatFormat format, bool negative, int64_t exponent,
                         uint64_t mantissa);
  static SimFloat subnormal(FloatFormat format, bool negative,
                            uint64_t mantissa);
  // Decodes the IEEE-style packed pattern sign|exponent field|mantissa.
  static SimFloat from_bits(FloatFormat format, u128 bits);
  // Parses "0x..." hex patterns. Throws InputError.
  static SimFloat parse(FloatFormat format, const std::string& text);
  // Exact conversion; throws PreconditionError if q is not representable.
  static SimFloat exact(FloatFormat format, const DyadicRational& q);

  const FloatFormat& format() const { return format_; }
  FloatClass cls() const { return cls_; }
  bool negative() const { return negative_; }
  int64_t exponent() const { return exponent_; }
  uint64_t mantissa() const { return mantissa_; }

  bool is_zero() const { return cls_ == FloatClass::kZero; }
  bool is_inf() const {
    return cls_ == FloatClass::kPosInf || cls_ == FloatClass::kNegInf;
  }
  bool is_finite() const { return !is_inf(); }
  // Sign test used by split summation: strictly below zero.
  bool is_negative_value() const { return negative_ && !is_zero(); }

  // Integer significand (with the implicit bit for normals) and the
  // exponent of its last bit, so a finite value is significand * 2^quantum.
  uint64_t significand() const;
  int64_t quantum_exponent() const;

  SimFloat operator-() const;

  u128 bits() const;
  std::string to_hex() const;
  // Exact value; throws PreconditionError for infinities.
  DyadicRational to_exact() const;
  double to_double() const;

  // Bitwise identity (there is a single zero).
  friend bool operator==(const SimFloat& a, const SimFloat& b) {
    return a.format_ == b.format_ && a.cls_ == b.cls_ &&
           a.negative_ == b.negative_ && a.exponent_ == b.exponent_ &&
           a.mantissa_ == b.mantissa_;
  }
  friend bool operator!=(const SimFloat& a, const SimFloat& b) {
    return !(a == b);
  }

 private:
  FloatFormat format_;
  FloatClass cls_ = FloatClass::kZero;
  bool negative_ = false;
  int64_t exponent_ = 0;
  uint64_t mantissa_ = 0;

  friend SimFloat round_scaled(const FloatFormat&, bool, u128, int64_t,
                               RoundingMode);
};

// Prints the hex pattern and the exact value, e.g. "0x39 (9*2^-3)".
std::ostream& operator<<(std::ostream& os, const SimFloat& x);

// Numeric order on values, with -inf < finite < +inf.
int compare(const SimFloat& a, const SimFloat& b);
inline bool less(const SimFloat& a, const SimFloat& b) {
  return compare(a, b) < 0;
}

// Rounds the exact value (-1)^negative * magnitude * 2^exponent.
SimFloat round_scaled(const FloatFormat& format, bool negative, u128 magnitude,
                      int64_t exponent, RoundingMode mode);

SimFloat round(const DyadicRational& q, const FloatFormat& format,
               RoundingMode mode);
SimFloat round_banker(const DyadicRational& q, const FloatFormat& format);
SimFloat round_toward_zero(const DyadicRational& q, const FloatFormat& format);
SimFloat round_directed(const DyadicRational& q, const FloatFormat& format,
                        bool toward_pos_inf);

// 2^(floor(log2 |x|) - k); for x = 0 the subnormal spacing 2^(emin - k).
DyadicRational ulp(const DyadicRational& x, const FloatFormat& format);
DyadicRational ulp(const SimFloat& x);

bool is_representable(const DyadicRational& q, const FloatFormat& format);

// round(x + y). Throws ArithmeticError for inf + (-inf).
SimFloat add(const SimFloat& x, const SimFloat& y, RoundingMode mode);
inline SimFloat add(const SimFloat& x, const SimFloat& y, Rounding rounding) {
  return add(x, y, to_mode(rounding));
}
inline SimFloat sub(const SimFloat& x, const SimFloat& y, Rounding rounding) {
  return add(x, -y, to_mode(rounding));
}

// Every finite value of the format in increasing order (plus the two
// infinities when requested). Intended for tiny formats only.
std::vector<SimFloat> enumerate_floats(const FloatFormat& format,
                                       bool include_infinities = false);

// Finite values v with lo <= v <= hi, increasing.
std::vector<SimFloat> enumerate_range(const FloatFormat& format,
                                      const SimFloat& lo, const SimFloat& hi);

}  // namespace bsum

#endif  // BSUM_SIM_FLOAT_H_
