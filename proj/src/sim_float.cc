#include "bsum/sim_float.h"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "bsum/errors.h"

namespace bsum {
namespace {

int bit_length(u128 x) {
  int n = 0;
  uint64_t hi = static_cast<uint64_t>(x >> 64);
  if (hi != 0) return 64 + (64 - __builtin_clzll(hi));
  uint64_t lo = static_cast<uint64_t>(x);
  if (lo != 0) n = 64 - __builtin_clzll(lo);
  return n;
}

// Decides whether truncating `magnitude` by `shift` bits must round the
// magnitude up by one unit in the given mode.
bool round_up(u128 magnitude, int64_t shift, bool negative, uint64_t lower,
              RoundingMode mode) {
  bool nonzero_rem;
  int half_cmp;  // sign of (remainder - half unit)
  if (shift > 128) {
    nonzero_rem = magnitude != 0;
    half_cmp = -1;
  } else if (shift == 128) {
    nonzero_rem = magnitude != 0;
    u128 half = u128{1} << 127;
    half_cmp = magnitude < half ? -1 : (magnitude > half ? 1 : 0);
  } else {
    u128 mask = (u128{1} << shift) - 1;
    u128 rem = magnitude & mask;
    u128 half = u128{1} << (shift - 1);
    nonzero_rem = rem != 0;
    half_cmp = rem < half ? -1 : (rem > half ? 1 : 0);
  }
  switch (mode) {
    case RoundingMode::kNearestEven:
      return half_cmp > 0 || (half_cmp == 0 && (lower & 1) != 0);
    case RoundingMode::kTowardZero:
      return false;
    case RoundingMode::kTowardPosInf:
      return nonzero_rem && !negative;
    case RoundingMode::kTowardNegInf:
      return nonzero_rem && negative;
  }
  return false;
}

}  // namespace

RoundingMode to_mode(Rounding rounding) {
  return rounding == Rounding::kBanker ? RoundingMode::kNearestEven
                                       : RoundingMode::kTowardZero;
}

std::string to_string(Rounding rounding) {
  return rounding == Rounding::kBanker ? "banker" : "rtz";
}

Rounding parse_rounding(const std::string& text) {
  if (text == "banker") return Rounding::kBanker;
  if (text == "rtz") return Rounding::kRtz;
  throw InputError("rounding", "expected banker or rtz, got '" + text + "'");
}

FloatFormat::FloatFormat(int mantissa_bits, int exponent_bits)
    : k_(mantissa_bits), l_(exponent_bits) {
  if (k_ < 1 || k_ > 60) {
    throw PreconditionError("float format: mantissa bits must be in [1, 60]");
  }
  if (l_ < 2 || l_ > 30) {
    throw PreconditionError("float format: exponent bits must be in [2, 30]");
  }
}

std::string FloatFormat::to_string() const {
  return "(k=" + std::to_string(k_) + ",l=" + std::to_string(l_) + ")";
}

SimFloat::SimFloat(FloatFormat format) : format_(format) {}

SimFloat SimFloat::infinity(FloatFormat format, bool negative) {
  SimFloat x(format);
  x.cls_ = negative ? FloatClass::kNegInf : FloatClass::kPosInf;
  x.negative_ = negative;
  return x;
}

SimFloat SimFloat::max_finite(FloatFormat format) {
  return normal(format, false, format.emax(),
                (uint64_t{1} << format.k()) - 1);
}

SimFloat SimFloat::min_finite(FloatFormat format) {
  return -max_finite(format);
}

SimFloat SimFloat::normal(FloatFormat format, bool negative, int64_t exponent,
                          uint64_t mantissa) {
  if (exponent < format.emin() || exponent > format.emax()) {
    throw PreconditionError("normal float: exponent out of range");
  }
  if (mantissa >> format.k() != 0) {
    throw PreconditionError("normal float: mantissa too wide");
  }
  SimFloat x(format);
  x.cls_ = FloatClass::kNormal;
  x.negative_ = negative;
  x.exponent_ = exponent;
  x.mantissa_ = mantissa;
  return x;
}

SimFloat SimFloat::subnormal(FloatFormat format, bool negative,
                             uint64_t mantissa) {
  if (mantissa >> format.k() != 0) {
    throw PreconditionError("subnormal float: mantissa too wide");
  }
  SimFloat x(format);
  if (mantissa == 0) return x;
  x.cls_ = FloatClass::kSubnormal;
  x.negative_ = negative;
  x.exponent_ = format.emin();
  x.mantissa_ = mantissa;
  return x;
}

SimFloat SimFloat::from_bits(FloatFormat format, u128 bits) {
  const int k = format.k();
  const int l = format.l();
  if (format.total_bits() < 128 && (bits >> format.total_bits()) != 0) {
    throw InputError("bits", "pattern wider than the format");
  }
  uint64_t mantissa = static_cast<uint64_t>(bits & ((u128{1} << k) - 1));
  uint64_t field =
      static_cast<uint64_t>((bits >> k) & ((u128{1} << l) - 1));
  bool negative = ((bits >> (k + l)) & 1) != 0;
  uint64_t all_ones = (uint64_t{1} << l) - 1;
  if (field == all_ones) {
    if (mantissa != 0) throw InputError("bits", "NaN patterns are not allowed");
    return infinity(format, negative);
  }
  if (field == 0) return subnormal(format, negative, mantissa);
  return normal(format, negative, static_cast<int64_t>(field) - format.bias(),
                mantissa);
}

SimFloat SimFloat::parse(FloatFormat format, const std::string& text) {
  if (text.size() < 3 || text[0] != '0' || (text[1] != 'x' && text[1] != 'X')) {
    throw InputError("value", "expected a 0x-prefixed bit pattern, got '" +
                                  text + "'");
  }
  if (text.size() - 2 > 32) throw InputError("value", "pattern too long");
  u128 bits = 0;
  for (size_t i = 2; i < text.size(); ++i) {
    char c = static_cast<char>(std::tolower(static_cast<unsigned char>(text[i])));
    int digit;
    if (c >= '0' && c <= '9') {
      digit = c - '0';
    } else if (c >= 'a' && c <= 'f') {
      digit = 10 + (c - 'a');
    } else {
      throw InputError("value", "invalid hex digit in '" + text + "'");
    }
    bits = (bits << 4) | static_cast<u128>(digit);
  }
  return from_bits(format, bits);
}

SimFloat SimFloat::exact(FloatFormat format, const DyadicRational& q) {
  SimFloat x = round_toward_zero(q, format);
  if (x.is_inf() || x.to_exact() != q) {
    throw PreconditionError("value " + q.to_string() +
                            " is not representable in " + format.to_string());
  }
  return x;
}

uint64_t SimFloat::significand() const {
  switch (cls_) {
    case FloatClass::kNormal:
      return (uint64_t{1} << format_.k()) | mantissa_;
    case FloatClass::kSubnormal:
      return mantissa_;
    default:
      return 0;
  }
}

int64_t SimFloat::quantum_exponent() const {
  if (cls_ == FloatClass::kNormal) return exponent_ - format_.k();
  return format_.emin() - format_.k();
}

SimFloat SimFloat::operator-() const {
  SimFloat x = *this;
  switch (cls_) {
    case FloatClass::kZero:
      return x;
    case FloatClass::kPosInf:
      return infinity(format_, true);
    case FloatClass::kNegInf:
      return infinity(format_, false);
    default:
      x.negative_ = !negative_;
      return x;
  }
}

u128 SimFloat::bits() const {
  const int k = format_.k();
  const int l = format_.l();
  u128 field = 0;
  switch (cls_) {
    case FloatClass::kZero:
    case FloatClass::kSubnormal:
      field = 0;
      break;
    case FloatClass::kNormal:
      field = static_cast<u128>(exponent_ + format_.bias());
      break;
    case FloatClass::kPosInf:
    case FloatClass::kNegInf:
      field = (u128{1} << l) - 1;
      break;
  }
  u128 sign = negative_ ? 1 : 0;
  return (sign << (k + l)) | (field << k) | static_cast<u128>(mantissa_);
}

std::string SimFloat::to_hex() const {
  static const char kDigits[] = "0123456789abcdef";
  int digits = (format_.total_bits() + 3) / 4;
  std::string out(digits, '0');
  u128 b = bits();
  for (int i = digits - 1; i >= 0; --i) {
    out[i] = kDigits[static_cast<int>(b & 0xf)];
    b >>= 4;
  }
  return "0x" + out;
}

DyadicRational SimFloat::to_exact() const {
  if (is_inf()) throw PreconditionError("to_exact: value is infinite");
  if (is_zero()) return DyadicRational();
  BigInt n(significand());
  if (negative_) n = -n;
  return DyadicRational(n, quantum_exponent());
}

double SimFloat::to_double() const {
  if (cls_ == FloatClass::kPosInf) return HUGE_VAL;
  if (cls_ == FloatClass::kNegInf) return -HUGE_VAL;
  double v = std::ldexp(static_cast<double>(significand()),
                        static_cast<int>(std::clamp<int64_t>(
                            quantum_exponent(), -100000, 100000)));
  return negative_ ? -v : v;
}

int compare(const SimFloat& a, const SimFloat& b) {
  // The packed pattern without its sign is monotone in magnitude.
  auto signed_rank = [](const SimFloat& x) -> std::pair<int, u128> {
    if (x.is_zero()) return {0, 0};
    u128 magnitude = x.bits() & ~(u128{1} << (x.format().total_bits() - 1));
    return {x.negative() ? -1 : 1, magnitude};
  };
  auto [sa, ma] = signed_rank(a);
  auto [sb, mb] = signed_rank(b);
  if (sa != sb) return sa < sb ? -1 : 1;
  if (ma == mb) return 0;
  bool a_smaller_magnitude = ma < mb;
  return (a_smaller_magnitude == (sa > 0)) ? -1 : 1;
}

SimFloat round_scaled(const FloatFormat& format, bool negative, u128 magnitude,
                      int64_t exponent, RoundingMode mode) {
  SimFloat out(format);
  if (magnitude == 0) return out;
  const int k = format.k();
  const int64_t top = bit_length(magnitude) - 1 + exponent;  // floor(log2)
  int64_t e = std::max(top, format.emin());
  const int64_t quantum = e - k;
  uint64_t sig;
  if (quantum <= exponent) {
    sig = static_cast<uint64_t>(magnitude << (exponent - quantum));
  } else {
    const int64_t shift = quantum - exponent;
    uint64_t lower =
        shift >= 128 ? 0 : static_cast<uint64_t>(magnitude >> shift);
    sig = lower + (round_up(magnitude, shift, negative, lower, mode) ? 1 : 0);
    if (sig == (uint64_t{1} << (k + 1))) {
      sig = uint64_t{1} << k;
      ++e;
    }
  }
  if (sig == 0) return out;
  out.negative_ = negative;
  if (sig < (uint64_t{1} << k)) {
    out.cls_ = FloatClass::kSubnormal;
    out.exponent_ = format.emin();
    out.mantissa_ = sig;
    return out;
  }
  if (e > format.emax()) return SimFloat::infinity(format, negative);
  out.cls_ = FloatClass::kNormal;
  out.exponent_ = e;
  out.mantissa_ = sig & ((uint64_t{1} << k) - 1);
  return out;
}

SimFloat round(const DyadicRational& q, const FloatFormat& format,
               RoundingMode mode) {
  if (q.is_zero()) return SimFloat(format);
  const bool negative = q.sign() < 0;
  BigInt magnitude = negative ? BigInt(-q.numerator()) : q.numerator();
  const int64_t bits = static_cast<int64_t>(boost::multiprecision::msb(magnitude)) + 1;
  if (bits <= 120) {
    return round_scaled(format, negative, static_cast<u128>(magnitude),
                        q.exponent(), mode);
  }
  // Keep the top 120 bits plus a sticky bit; the rounding position is at
  // most 61 bits below the leading one, far above the sticky bit.
  const int64_t drop = bits - 120;
  BigInt kept = magnitude >> drop;
  bool sticky = (kept << drop) != magnitude;
  u128 m = (static_cast<u128>(kept) << 1) | (sticky ? 1 : 0);
  return round_scaled(format, negative, m, q.exponent() + drop - 1, mode);
}

SimFloat round_banker(const DyadicRational& q, const FloatFormat& format) {
  return round(q, format, RoundingMode::kNearestEven);
}

SimFloat round_toward_zero(const DyadicRational& q, const FloatFormat& format) {
  return round(q, format, RoundingMode::kTowardZero);
}

SimFloat round_directed(const DyadicRational& q, const FloatFormat& format,
                        bool toward_pos_inf) {
  return round(q, format,
               toward_pos_inf ? RoundingMode::kTowardPosInf
                              : RoundingMode::kTowardNegInf);
}

DyadicRational ulp(const DyadicRational& x, const FloatFormat& format) {
  if (x.is_zero()) return DyadicRational::pow2(format.emin() - format.k());
  return DyadicRational::pow2(x.floor_log2() - format.k());
}

DyadicRational ulp(const SimFloat& x) {
  if (x.is_inf()) throw PreconditionError("ulp of an infinite value");
  return ulp(x.to_exact(), x.format());
}

bool is_representable(const DyadicRational& q, const FloatFormat& format) {
  if (q.is_zero()) return true;
  SimFloat x = round_toward_zero(q, format);
  return !x.is_inf() && x.to_exact() == q;
}

SimFloat add(const SimFloat& x, const SimFloat& y, RoundingMode mode) {
  if (x.format() != y.format()) {
    throw PreconditionError("add: operands have different formats");
  }
  if (x.is_inf() || y.is_inf()) {
    if (x.is_inf() && y.is_inf() && x.cls() != y.cls()) {
      throw ArithmeticError("inf + (-inf) has no value");
    }
    return x.is_inf() ? x : y;
  }
  if (x.is_zero()) return y;
  if (y.is_zero()) return x;
  const FloatFormat& format = x.format();
  const SimFloat* big = &x;
  const SimFloat* small = &y;
  if (big->quantum_exponent() < small->quantum_exponent()) std::swap(big, small);
  const int64_t gap = big->quantum_exponent() - small->quantum_exponent();
  const bool same_sign = big->negative() == small->negative();
  if (gap <= format.k() + 3) {
    u128 a = static_cast<u128>(big->significand()) << gap;
    u128 b = small->significand();
    u128 magnitude;
    bool negative;
    if (same_sign) {
      magnitude = a + b;
      negative = big->negative();
    } else if (a >= b) {
      magnitude = a - b;
      negative = big->negative();
    } else {
      magnitude = b - a;
      negative = small->negative();
    }
    return round_scaled(format, negative, magnitude,
                        small->quantum_exponent(), mode);
  }
  // The smaller operand is below a quarter unit of the larger one's last
  // place. Replacing it by an eighth of that unit lands in the same open
  // interval between rounding boundaries, so the rounded result is exact.
  u128 a = static_cast<u128>(big->significand()) << 3;
  u128 magnitude = same_sign ? a + 1 : a - 1;
  return round_scaled(format, big->negative(), magnitude,
                      big->quantum_exponent() - 3, mode);
}

std::vector<SimFloat> enumerate_floats(const FloatFormat& format,
                                       bool include_infinities) {
  if (format.total_bits() > 20) {
    throw GuardExceededError("enumerate_floats: format too large");
  }
  std::vector<SimFloat> out;
  const uint64_t fields = (uint64_t{1} << format.l()) - 1;  // excludes inf
  const uint64_t mantissas = uint64_t{1} << format.k();
  for (int sign = 0; sign < 2; ++sign) {
    for (uint64_t field = 0; field < fields; ++field) {
      for (uint64_t m = 0; m < mantissas; ++m) {
        if (sign == 1 && field == 0 && m == 0) continue;  // -0
        u128 bits = (static_cast<u128>(sign) << (format.k() + format.l())) |
                    (static_cast<u128>(field) << format.k()) | m;
        out.push_back(SimFloat::from_bits(format, bits));
      }
    }
  }
  if (include_infinities) {
    out.push_back(SimFloat::infinity(format, false));
    out.push_back(SimFloat::infinity(format, true));
  }
  std::sort(out.begin(), out.end(),
            [](const SimFloat& a, const SimFloat& b) { return less(a, b); });
  return out;
}

std::vector<SimFloat> enumerate_range(const FloatFormat& format,
                                      const SimFloat& lo, const SimFloat& hi) {
  std::vector<SimFloat> out;
  for (const SimFloat& x : enumerate_floats(format)) {
    if (compare(lo, x) <= 0 && compare(x, hi) <= 0) out.push_back(x);
  }
  return out;
}

}  // namespace bsum

namespace bsum {

std::ostream& operator<<(std::ostream& os, const SimFloat& x) {
  os << x.to_hex() << " (";
  if (x.is_inf()) {
    os << (x.negative() ? "-inf" : "inf");
  } else {
    os << x.to_exact().to_string();
  }
  return os << ")";
}

}  // namespace bsum
