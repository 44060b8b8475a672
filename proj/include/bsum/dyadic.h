// Exact dyadic rationals m * 2^e with an arbitrary-precision numerator.
//
// These are the oracle values of the library: every emulated float and
// every k-bit integer converts to one losslessly, and sums, differences and
// products of dyadics are again dyadic, so the real-valued bounded sum can be
// computed without any rounding at all.

#ifndef BSUM_DYADIC_H_
#define BSUM_DYADIC_H_

#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace bsum {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

// Value numerator * 2^exponent, kept canonical: the numerator is odd, or the
// numerator is zero and the exponent is zero.
class DyadicRational {
 public:
  DyadicRational() = default;
  DyadicRational(BigInt numerator, int64_t exponent);
  // Implicit so integer literals can be used in arithmetic with dyadics.
  DyadicRational(int64_t value);  // NOLINT(google-explicit-constructor)

  static DyadicRational pow2(int64_t exponent);
  // Parses "m*2^e", a plain integer "m", or "m/2^e". Throws InputError.
  static DyadicRational parse(const std::string& text);

  const BigInt& numerator() const { return numerator_; }
  int64_t exponent() const { return exponent_; }

  bool is_zero() const { return numerator_ == 0; }
  int sign() const;
  bool is_integer() const { return exponent_ >= 0 || is_zero(); }

  // floor(log2(|x|)); the value must be nonzero.
  int64_t floor_log2() const;
  // Largest integer <= x and smallest integer >= x.
  BigInt floor() const;
  BigInt ceil() const;

  DyadicRational abs() const;
  DyadicRational operator-() const;
  DyadicRational& operator+=(const DyadicRational& other);
  DyadicRational& operator-=(const DyadicRational& other);
  DyadicRational& operator*=(const DyadicRational& other);
  // Multiplies by 2^shift exactly.
  DyadicRational scaled(int64_t shift) const;

  friend DyadicRational operator+(DyadicRational a, const DyadicRational& b) {
    return a += b;
  }
  friend DyadicRational operator-(DyadicRational a, const DyadicRational& b) {
    return a -= b;
  }
  friend DyadicRational operator*(DyadicRational a, const DyadicRational& b) {
    return a *= b;
  }

  friend bool operator==(const DyadicRational& a, const DyadicRational& b) {
    return a.exponent_ == b.exponent_ && a.numerator_ == b.numerator_;
  }
  friend bool operator!=(const DyadicRational& a, const DyadicRational& b) {
    return !(a == b);
  }
  friend int compare(const DyadicRational& a, const DyadicRational& b);
  friend bool operator<(const DyadicRational& a, const DyadicRational& b) {
    return compare(a, b) < 0;
  }
  friend bool operator<=(const DyadicRational& a, const DyadicRational& b) {
    return compare(a, b) <= 0;
  }
  friend bool operator>(const DyadicRational& a, const DyadicRational& b) {
    return compare(a, b) > 0;
  }
  friend bool operator>=(const DyadicRational& a, const DyadicRational& b) {
    return compare(a, b) >= 0;
  }

  BigRational to_rational() const;
  // Nearest double; only for display and for seeding numeric searches.
  double to_double() const;
  // Canonical "m*2^e" text, e.g. "9*2^-3", "0*2^0".
  std::string to_string() const;

 private:
  void canonicalize();

  BigInt numerator_ = 0;
  int64_t exponent_ = 0;
};

inline DyadicRational max(const DyadicRational& a, const DyadicRational& b) {
  return a < b ? b : a;
}
inline DyadicRational min(const DyadicRational& a, const DyadicRational& b) {
  return a < b ? a : b;
}

// Smallest dyadic with at least `precision_bits` significant bits that is
// >= a / b (b > 0). Used where a bound formula divides and the result must
// never underestimate the exact quotient.
DyadicRational divide_round_up(const DyadicRational& a, const BigInt& b,
                               int precision_bits = 96);

// ceil(log2(n)) for n >= 1.
int64_t ceil_log2(uint64_t n);

}  // namespace bsum

#endif  // BSUM_DYADIC_H_
