#include "bsum/kint.h"

#include <cctype>

#include "bsum/errors.h"

namespace bsum {

IntFormat::IntFormat(int bits, bool is_signed, Overflow overflow)
    : bits_(bits), signed_(is_signed), overflow_(overflow) {
  if (bits_ < 1 || bits_ > 64) {
    throw PreconditionError("integer format: bits must be in [1, 64]");
  }
}

i128 IntFormat::min_value() const {
  return signed_ ? -(i128{1} << (bits_ - 1)) : 0;
}

i128 IntFormat::max_value() const {
  return signed_ ? (i128{1} << (bits_ - 1)) - 1 : (i128{1} << bits_) - 1;
}

std::string IntFormat::to_string() const {
  return std::to_string(bits_) + "-bit " + (signed_ ? "signed" : "unsigned") +
         (overflow_ == Overflow::kWraparound ? " wraparound" : " saturating");
}

KInt::KInt(IntFormat format, i128 value) : format_(format), value_(value) {
  if (value < format.min_value() || value > format.max_value()) {
    throw PreconditionError("integer " + i128_to_string(value) +
                            " outside the range of " + format.to_string());
  }
}

KInt KInt::from_big(IntFormat format, const BigInt& value) {
  if (value < BigInt(i128_to_string(format.min_value())) ||
      value > BigInt(i128_to_string(format.max_value()))) {
    throw PreconditionError("integer " + value.str() +
                            " outside the range of " + format.to_string());
  }
  return KInt(format, static_cast<i128>(value));
}

KInt KInt::parse(IntFormat format, const std::string& text) {
  size_t start = (!text.empty() && (text[0] == '-' || text[0] == '+')) ? 1 : 0;
  if (start == text.size()) throw InputError("value", "empty integer");
  for (size_t i = start; i < text.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
      throw InputError("value", "invalid integer '" + text + "'");
    }
  }
  BigInt magnitude(text.substr(start));
  BigInt value = text[0] == '-' ? BigInt(-magnitude) : magnitude;
  try {
    return from_big(format, value);
  } catch (const PreconditionError& e) {
    throw InputError("value", e.what());
  }
}

DyadicRational KInt::to_exact() const { return DyadicRational(to_big(), 0); }

BigInt KInt::to_big() const {
  // cpp_int does not construct from __int128 on every toolchain; go via
  // two 64-bit halves.
  bool negative = value_ < 0;
  unsigned __int128 m =
      negative ? static_cast<unsigned __int128>(-value_) : value_;
  BigInt out = BigInt(static_cast<uint64_t>(m >> 64)) << 64;
  out += BigInt(static_cast<uint64_t>(m));
  return negative ? BigInt(-out) : out;
}

std::string KInt::to_string() const { return i128_to_string(value_); }

i128 wrap(const IntFormat& format, const BigInt& value) {
  BigInt m = format.modulus();
  BigInt r = value % m;
  if (r < 0) r += m;
  if (format.is_signed() && r > BigInt(i128_to_string(format.max_value()))) {
    r -= m;
  }
  return static_cast<i128>(r);
}

KInt add(const KInt& x, const KInt& y) {
  if (x.format() != y.format()) {
    throw PreconditionError("add: operands have different formats");
  }
  const IntFormat& f = x.format();
  // Both values fit in 65 bits, so the exact sum fits in an i128.
  i128 sum = x.value() + y.value();
  if (sum >= f.min_value() && sum <= f.max_value()) return KInt(f, sum);
  if (f.overflow() == Overflow::kSaturating) {
    return KInt(f, sum < f.min_value() ? f.min_value() : f.max_value());
  }
  i128 modulus = i128{1} << f.bits();
  i128 r = sum % modulus;
  if (r < 0) r += modulus;
  if (r > f.max_value()) r -= modulus;
  return KInt(f, r);
}

std::string i128_to_string(i128 value) {
  if (value == 0) return "0";
  bool negative = value < 0;
  unsigned __int128 m =
      negative ? static_cast<unsigned __int128>(-value) : value;
  std::string digits;
  while (m != 0) {
    digits.push_back(static_cast<char>('0' + static_cast<int>(m % 10)));
    m /= 10;
  }
  if (negative) digits.push_back('-');
  return std::string(digits.rbegin(), digits.rend());
}

}  // namespace bsum
