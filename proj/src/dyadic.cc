#include "bsum/dyadic.h"

#include <cctype>
#include <cmath>
#include <limits>

#include "bsum/errors.h"

namespace bsum {
namespace {

using boost::multiprecision::lsb;
using boost::multiprecision::msb;

BigInt parse_bigint(const std::string& text, const std::string& field) {
  if (text.empty()) throw InputError(field, "empty integer");
  size_t start = (text[0] == '-' || text[0] == '+') ? 1 : 0;
  if (start == text.size()) throw InputError(field, "missing digits");
  for (size_t i = start; i < text.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
      throw InputError(field, "invalid integer '" + text + "'");
    }
  }
  BigInt value(text.substr(start));
  return text[0] == '-' ? BigInt(-value) : value;
}

int64_t parse_exponent(const std::string& text, const std::string& field) {
  BigInt value = parse_bigint(text, field);
  if (value > std::numeric_limits<int64_t>::max() / 4 ||
      value < std::numeric_limits<int64_t>::min() / 4) {
    throw InputError(field, "exponent out of range");
  }
  return static_cast<int64_t>(value);
}

}  // namespace

DyadicRational::DyadicRational(BigInt numerator, int64_t exponent)
    : numerator_(std::move(numerator)), exponent_(exponent) {
  canonicalize();
}

DyadicRational::DyadicRational(int64_t value) : numerator_(value) {
  canonicalize();
}

DyadicRational DyadicRational::pow2(int64_t exponent) {
  return DyadicRational(BigInt(1), exponent);
}

DyadicRational DyadicRational::parse(const std::string& text) {
  const std::string field = "dyadic";
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  }
  size_t star = s.find("*2^");
  if (star != std::string::npos) {
    return DyadicRational(parse_bigint(s.substr(0, star), field),
                          parse_exponent(s.substr(star + 3), field));
  }
  size_t slash = s.find("/2^");
  if (slash != std::string::npos) {
    return DyadicRational(parse_bigint(s.substr(0, slash), field),
                          -parse_exponent(s.substr(slash + 3), field));
  }
  return DyadicRational(parse_bigint(s, field), 0);
}

void DyadicRational::canonicalize() {
  if (numerator_ == 0) {
    exponent_ = 0;
    return;
  }
  BigInt magnitude = numerator_ < 0 ? BigInt(-numerator_) : numerator_;
  unsigned shift = lsb(magnitude);
  if (shift > 0) {
    numerator_ >>= shift;
    exponent_ += shift;
  }
}

int DyadicRational::sign() const {
  return numerator_ < 0 ? -1 : (numerator_ > 0 ? 1 : 0);
}

int64_t DyadicRational::floor_log2() const {
  if (is_zero()) throw PreconditionError("floor_log2 of zero");
  BigInt magnitude = numerator_ < 0 ? BigInt(-numerator_) : numerator_;
  return static_cast<int64_t>(msb(magnitude)) + exponent_;
}

BigInt DyadicRational::floor() const {
  if (exponent_ >= 0) return numerator_ << exponent_;
  // Arithmetic shift of a negative cpp_int rounds toward zero, so adjust.
  BigInt magnitude = numerator_ < 0 ? BigInt(-numerator_) : numerator_;
  BigInt q = magnitude >> static_cast<unsigned>(-exponent_);
  if (numerator_ < 0) return -(q + 1);  // canonical => never exact here
  return q;
}

BigInt DyadicRational::ceil() const {
  if (exponent_ >= 0) return numerator_ << exponent_;
  return floor() + 1;
}

DyadicRational DyadicRational::abs() const {
  DyadicRational result = *this;
  if (result.numerator_ < 0) result.numerator_ = -result.numerator_;
  return result;
}

DyadicRational DyadicRational::operator-() const {
  DyadicRational result = *this;
  result.numerator_ = -result.numerator_;
  return result;
}

DyadicRational& DyadicRational::operator+=(const DyadicRational& other) {
  if (other.is_zero()) return *this;
  if (is_zero()) return *this = other;
  if (exponent_ <= other.exponent_) {
    numerator_ += other.numerator_ << (other.exponent_ - exponent_);
  } else {
    numerator_ = (numerator_ << (exponent_ - other.exponent_)) +
                 other.numerator_;
    exponent_ = other.exponent_;
  }
  canonicalize();
  return *this;
}

DyadicRational& DyadicRational::operator-=(const DyadicRational& other) {
  return *this += -other;
}

DyadicRational& DyadicRational::operator*=(const DyadicRational& other) {
  numerator_ *= other.numerator_;
  exponent_ += other.exponent_;
  canonicalize();
  return *this;
}

DyadicRational DyadicRational::scaled(int64_t shift) const {
  if (is_zero()) return *this;
  DyadicRational result = *this;
  result.exponent_ += shift;
  return result;
}

int compare(const DyadicRational& a, const DyadicRational& b) {
  int sa = a.sign();
  int sb = b.sign();
  if (sa != sb) return sa < sb ? -1 : 1;
  if (sa == 0) return 0;
  // Same sign: compare magnitudes via bit lengths first, then aligned values.
  int64_t la = a.floor_log2();
  int64_t lb = b.floor_log2();
  if (la != lb) return (la < lb) == (sa > 0) ? -1 : 1;
  int64_t e = std::min(a.exponent_, b.exponent_);
  BigInt na = a.numerator_ << (a.exponent_ - e);
  BigInt nb = b.numerator_ << (b.exponent_ - e);
  return na < nb ? -1 : (na > nb ? 1 : 0);
}

BigRational DyadicRational::to_rational() const {
  if (exponent_ >= 0) return BigRational(numerator_ << exponent_);
  return BigRational(numerator_, BigInt(1) << -exponent_);
}

double DyadicRational::to_double() const {
  if (is_zero()) return 0.0;
  BigInt magnitude = numerator_ < 0 ? BigInt(-numerator_) : numerator_;
  int64_t bits = static_cast<int64_t>(msb(magnitude)) + 1;
  int64_t drop = bits > 60 ? bits - 60 : 0;
  double mant = static_cast<double>(static_cast<uint64_t>(magnitude >> drop));
  double value = std::ldexp(mant, static_cast<int>(std::clamp<int64_t>(
                                      exponent_ + drop, -100000, 100000)));
  return numerator_ < 0 ? -value : value;
}

std::string DyadicRational::to_string() const {
  return numerator_.str() + "*2^" + std::to_string(exponent_);
}

DyadicRational divide_round_up(const DyadicRational& a, const BigInt& b,
                               int precision_bits) {
  if (b <= 0) throw PreconditionError("divide_round_up: divisor must be > 0");
  if (a.is_zero()) return DyadicRational();
  // a / b = n * 2^e / b; scale n so the quotient keeps precision_bits bits.
  BigInt n = a.numerator();
  int64_t e = a.exponent();
  int64_t need = static_cast<int64_t>(msb(b)) + precision_bits;
  BigInt magnitude = n < 0 ? BigInt(-n) : n;
  int64_t have = static_cast<int64_t>(msb(magnitude));
  if (have < need) {
    n <<= (need - have);
    e -= (need - have);
  }
  BigInt q = n / b;  // truncates toward zero
  BigInt r = n % b;
  if (r != 0 && n > 0) q += 1;
  return DyadicRational(q, e);
}

int64_t ceil_log2(uint64_t n) {
  if (n == 0) throw PreconditionError("ceil_log2 of zero");
  int64_t r = 0;
  while ((uint64_t{1} << r) < n && r < 64) ++r;
  return r;
}

}  // namespace bsum
