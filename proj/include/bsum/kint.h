// k-bit integers with an attached overflow policy (wraparound or
// saturation), for 1 <= k <= 64.

#ifndef BSUM_KINT_H_
#define BSUM_KINT_H_

#include <cstdint>
#include <ostream>
#include <string>

#include "bsum/dyadic.h"
#include "bsum/sim_float.h"  // i128

namespace bsum {

enum class Overflow { kWraparound, kSaturating };

class IntFormat {
 public:
  IntFormat(int bits, bool is_signed, Overflow overflow);

  int bits() const { return bits_; }
  bool is_signed() const { return signed_; }
  Overflow overflow() const { return overflow_; }
  i128 min_value() const;
  i128 max_value() const;
  // 2^k, the modulus of wraparound arithmetic.
  BigInt modulus() const { return BigInt(1) << bits_; }

  friend bool operator==(const IntFormat& a, const IntFormat& b) {
    return a.bits_ == b.bits_ && a.signed_ == b.signed_ &&
           a.overflow_ == b.overflow_;
  }
  friend bool operator!=(const IntFormat& a, const IntFormat& b) {
    return !(a == b);
  }
  std::string to_string() const;

 private:
  int bits_;
  bool signed_;
  Overflow overflow_;
};

class KInt {
 public:
  using Format = IntFormat;

  // Zero in the given format.
  explicit KInt(IntFormat format) : format_(format) {}
  // Throws PreconditionError when value is outside the format range.
  KInt(IntFormat format, i128 value);
  static KInt from_big(IntFormat format, const BigInt& value);
  // Parses a decimal string. Throws InputError.
  static KInt parse(IntFormat format, const std::string& text);
  static KInt min(IntFormat format) { return KInt(format, format.min_value()); }
  static KInt max(IntFormat format) { return KInt(format, format.max_value()); }

  const IntFormat& format() const { return format_; }
  i128 value() const { return value_; }
  bool is_negative_value() const { return value_ < 0; }
  bool is_zero() const { return value_ == 0; }

  DyadicRational to_exact() const;
  BigInt to_big() const;
  std::string to_string() const;

  friend bool operator==(const KInt& a, const KInt& b) {
    return a.format_ == b.format_ && a.value_ == b.value_;
  }
  friend bool operator!=(const KInt& a, const KInt& b) { return !(a == b); }

 private:
  IntFormat format_;
  i128 value_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, const KInt& x) {
  return os << x.to_string();
}

inline int compare(const KInt& a, const KInt& b) {
  return a.value() < b.value() ? -1 : (a.value() > b.value() ? 1 : 0);
}
inline bool less(const KInt& a, const KInt& b) { return compare(a, b) < 0; }

// Reduces an unbounded integer into the format's range modulo 2^k.
i128 wrap(const IntFormat& format, const BigInt& value);

// x + y under the format's overflow policy.
KInt add(const KInt& x, const KInt& y);

std::string i128_to_string(i128 value);

}  // namespace bsum

#endif  // BSUM_KINT_H_
