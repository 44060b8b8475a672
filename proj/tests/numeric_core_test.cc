#include <algorithm>
#include <cfenv>
#include <cfloat>
#include <cmath>
#include <cstring>
#include <map>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "bsum/dyadic.h"
#include "bsum/errors.h"
#include "bsum/kint.h"
#include "bsum/sim_float.h"

namespace bsum {
namespace {

const FloatFormat kTiny(3, 4);

DyadicRational D(int64_t n, int64_t e = 0) { return DyadicRational(n, e); }

// ---------------------------------------------------------------------------
// Independent rounding oracle: builds the value set of a format straight
// from the definitions of normal and subnormal floats (no emulator code),
// then rounds by locating the two neighbours of q in that sorted set.

struct OracleValue {
  BigRational value;
  bool even;  // mantissa ends in a 0 bit
};

std::vector<OracleValue> oracle_positive_values(int k, int l) {
  const int64_t emin = -((int64_t{1} << (l - 1)) - 2);
  const int64_t emax = (int64_t{1} << (l - 1)) - 1;
  std::vector<OracleValue> out;
  out.push_back({BigRational(0), true});
  auto pow2 = [](int64_t e) {
    return e >= 0 ? BigRational(BigInt(1) << e)
                  : BigRational(BigInt(1), BigInt(1) << -e);
  };
  for (int64_t m = 1; m < (int64_t{1} << k); ++m) {
    out.push_back({BigRational(m) * pow2(emin - k), m % 2 == 0});
  }
  for (int64_t e = emin; e <= emax; ++e) {
    for (int64_t m = 0; m < (int64_t{1} << k); ++m) {
      out.push_back({(BigRational(1) + BigRational(m) * pow2(-k)) * pow2(e),
                     m % 2 == 0});
    }
  }
  // +inf stands in for 2^(emax+1), whose mantissa field is all zeros.
  out.push_back({pow2(emax + 1), true});
  return out;
}

struct OracleResult {
  bool inf;
  bool negative;
  BigRational value;
};

OracleResult oracle_round(const BigRational& q, int k, int l,
                          RoundingMode mode) {
  static std::map<std::pair<int, int>, std::vector<OracleValue>> cache;
  auto& vals = cache[{k, l}];
  if (vals.empty()) vals = oracle_positive_values(k, l);
  if (q == 0) return {false, false, BigRational(0)};
  const bool negative = q < 0;
  const BigRational a = negative ? BigRational(-q) : q;
  const BigRational& inf_value = vals.back().value;
  if (a >= inf_value) return {true, negative, BigRational(0)};
  auto hi_it = std::lower_bound(
      vals.begin(), vals.end(), a,
      [](const OracleValue& v, const BigRational& x) { return v.value < x; });
  const OracleValue& hi = *hi_it;
  if (hi.value == a) return {false, negative, negative ? BigRational(-a) : a};
  const OracleValue& lo = *(hi_it - 1);
  bool pick_hi = false;
  switch (mode) {
    case RoundingMode::kNearestEven: {
      BigRational dl = a - lo.value;
      BigRational dh = hi.value - a;
      pick_hi = dh < dl || (dh == dl && hi.even);
      break;
    }
    case RoundingMode::kTowardZero:
      pick_hi = false;
      break;
    case RoundingMode::kTowardPosInf:
      pick_hi = !negative;
      break;
    case RoundingMode::kTowardNegInf:
      pick_hi = negative;
      break;
  }
  const OracleValue& chosen = pick_hi ? hi : lo;
  if (&chosen == &vals.back()) return {true, negative, BigRational(0)};
  return {false, negative, negative ? BigRational(-chosen.value) : chosen.value};
}

void expect_matches_oracle(const SimFloat& got, const OracleResult& want,
                           const std::string& context) {
  if (want.inf) {
    EXPECT_TRUE(got.is_inf()) << context;
    EXPECT_EQ(got.negative(), want.negative) << context;
    return;
  }
  ASSERT_FALSE(got.is_inf()) << context;
  EXPECT_EQ(got.to_exact().to_rational(), want.value) << context;
}

const RoundingMode kAllModes[] = {
    RoundingMode::kNearestEven, RoundingMode::kTowardZero,
    RoundingMode::kTowardPosInf, RoundingMode::kTowardNegInf};

// ---------------------------------------------------------------------------

TEST(DyadicRational, CanonicalFormAndArithmetic) {
  DyadicRational x(BigInt(12), 0);
  EXPECT_EQ(x.numerator(), 3);
  EXPECT_EQ(x.exponent(), 2);
  EXPECT_EQ(DyadicRational(BigInt(0), 7).exponent(), 0);
  EXPECT_EQ(D(9, -3) + D(7, -3), D(2));
  EXPECT_EQ(D(9, -3) * D(3, 1), D(27, -2));
  EXPECT_EQ((D(1, -1) - D(1)).to_string(), "-1*2^-1");
  EXPECT_LT(D(-5), D(1, -100));
  EXPECT_EQ(D(-7, -1).floor(), -4);
  EXPECT_EQ(D(-7, -1).ceil(), -3);
  EXPECT_EQ(D(7, -1).floor(), 3);
  EXPECT_EQ(DyadicRational::parse("9*2^-3"), D(9, -3));
  EXPECT_EQ(DyadicRational::parse("-40"), D(-5, 3));
  EXPECT_EQ(DyadicRational::parse("3/2^4"), D(3, -4));
  EXPECT_THROW(DyadicRational::parse("1.5"), InputError);
}

TEST(DyadicRational, DivideRoundUpNeverUnderestimates) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    DyadicRational a(BigInt(static_cast<int64_t>(rng() % 100000) + 1),
                     static_cast<int64_t>(rng() % 40) - 20);
    BigInt b(static_cast<int64_t>(rng() % 997) + 1);
    DyadicRational q = divide_round_up(a, b);
    EXPECT_GE(q.to_rational(), a.to_rational() / BigRational(b));
    EXPECT_LE(q.to_rational() - a.to_rational() / BigRational(b),
              a.to_rational() / BigRational(b) / BigRational(BigInt(1) << 90));
  }
}

TEST(Ulp, Examples) {
  EXPECT_EQ(ulp(D(1), kTiny), D(1, -3));
  EXPECT_EQ(ulp(D(1, 5), kTiny), D(1, 2));
  EXPECT_EQ(ulp(D(3, -1), kTiny), D(1, -3));
  EXPECT_EQ(ulp(D(0), kTiny), D(1, -9));
}

TEST(IsRepresentable, Examples) {
  EXPECT_TRUE(is_representable(D(9, -3), kTiny));
  EXPECT_FALSE(is_representable(D(17, -4), kTiny));
  EXPECT_FALSE(is_representable(D(17), kTiny));
}

TEST(IsRepresentable, AgreesWithExhaustiveEnumeration) {
  // Every multiple of the subnormal spacing up to beyond the largest finite
  // value, both signs.
  auto vals = oracle_positive_values(3, 4);
  std::set<BigRational> members;
  for (size_t i = 0; i + 1 < vals.size(); ++i) members.insert(vals[i].value);
  int64_t limit = int64_t{300} << 9;
  for (int64_t n = -limit; n <= limit; ++n) {
    DyadicRational q(BigInt(n), -9);
    bool want = members.count(q.abs().to_rational()) > 0;
    ASSERT_EQ(is_representable(q, kTiny), want) << q.to_string();
  }
  EXPECT_EQ(enumerate_floats(kTiny).size(), 2 * (vals.size() - 1) - 1);
}

TEST(Rounding, BankerExamples) {
  EXPECT_EQ(round_banker(D(17, -4), kTiny).to_exact(), D(1));
  EXPECT_EQ(round_banker(D(19, -4), kTiny).to_exact(), D(5, -2));
  EXPECT_EQ(round_banker(D(9, -3), kTiny).to_exact(), D(9, -3));
}

TEST(Rounding, TowardZeroAndDirectedExamples) {
  EXPECT_EQ(round_toward_zero(D(17, -4), kTiny).to_exact(), D(1));
  EXPECT_EQ(round_toward_zero(D(-17, -4), kTiny).to_exact(), D(-1));
  EXPECT_EQ(round_toward_zero(D(9, -3), kTiny).to_exact(), D(9, -3));
  EXPECT_EQ(round_directed(D(17, -4), kTiny, true).to_exact(), D(9, -3));
  EXPECT_EQ(round_directed(D(17, -4), kTiny, false).to_exact(), D(1));
  EXPECT_EQ(round_directed(D(9, -3), kTiny, true).to_exact(), D(9, -3));
  EXPECT_EQ(round_directed(D(9, -3), kTiny, false).to_exact(), D(9, -3));
}

TEST(Rounding, OverflowFollowsInfinityConvention) {
  // n_max = 15 * 2^4 = 240; inf stands for 256.
  EXPECT_EQ(round_banker(D(247), kTiny).to_exact(), D(240));
  EXPECT_TRUE(round_banker(D(248), kTiny).is_inf());  // tie, inf is even
  EXPECT_EQ(round_toward_zero(D(255), kTiny).to_exact(), D(240));
  EXPECT_TRUE(round_toward_zero(D(256), kTiny).is_inf());
  EXPECT_TRUE(round_directed(D(-300), kTiny, true).is_inf());
  EXPECT_TRUE(round_directed(D(241), kTiny, true).is_inf());
}

TEST(Rounding, MatchesOracleOnFineGrid) {
  // Step 2^-11 is finer than the subnormal spacing, so every rounding case
  // (exact, below/at/above midpoints, overflow) is exercised.
  for (int64_t n = -(int64_t{270} << 11); n <= (int64_t{270} << 11); n += 7) {
    DyadicRational q(BigInt(n), -11);
    for (RoundingMode mode : kAllModes) {
      expect_matches_oracle(round(q, kTiny, mode),
                            oracle_round(q.to_rational(), 3, 4, mode),
                            q.to_string());
    }
  }
}

TEST(Rounding, MatchesOracleForWideNumerators) {
  // Numerators beyond 120 bits exercise the sticky-bit reduction.
  std::mt19937_64 rng(11);
  FloatFormat f(8, 5);
  for (int i = 0; i < 3000; ++i) {
    BigInt n = BigInt(rng()) << 128;
    n += BigInt(rng()) << 64;
    n += BigInt(rng() >> (rng() % 64));
    if (rng() % 2) n = -n;
    DyadicRational q(n, -150 - static_cast<int64_t>(rng() % 30));
    for (RoundingMode mode : kAllModes) {
      expect_matches_oracle(round(q, f, mode),
                            oracle_round(q.to_rational(), 8, 5, mode),
                            q.to_string());
    }
  }
}

TEST(AddFloat, Examples) {
  SimFloat a = SimFloat::exact(kTiny, D(16));
  SimFloat b = SimFloat::exact(kTiny, D(9, -3));
  EXPECT_EQ(add(a, b, Rounding::kBanker).to_exact(), D(18));
  EXPECT_EQ(add(a, b, Rounding::kRtz).to_exact(), D(16));
  for (const SimFloat& x : enumerate_floats(kTiny)) {
    EXPECT_EQ(add(x, SimFloat::zero(kTiny), Rounding::kBanker), x);
    EXPECT_EQ(add(x, SimFloat::zero(kTiny), Rounding::kRtz), x);
  }
}

TEST(AddFloat, ExhaustiveAgainstOracle) {
  std::vector<SimFloat> all = enumerate_floats(kTiny);
  for (const SimFloat& x : all) {
    for (const SimFloat& y : all) {
      BigRational exact = x.to_exact().to_rational() + y.to_exact().to_rational();
      for (RoundingMode mode : kAllModes) {
        expect_matches_oracle(add(x, y, mode), oracle_round(exact, 3, 4, mode),
                              x.to_hex() + "+" + y.to_hex());
      }
    }
  }
}

TEST(AddFloat, CommutativeInBothModes) {
  std::vector<SimFloat> all = enumerate_floats(kTiny, true);
  for (const SimFloat& x : all) {
    for (const SimFloat& y : all) {
      if (x.is_inf() && y.is_inf() && x.cls() != y.cls()) continue;
      EXPECT_EQ(add(x, y, Rounding::kBanker), add(y, x, Rounding::kBanker));
      EXPECT_EQ(add(x, y, Rounding::kRtz), add(y, x, Rounding::kRtz));
    }
  }
}

TEST(AddFloat, NotAssociativeWitnessByExhaustiveSearch) {
  std::vector<SimFloat> all = enumerate_floats(kTiny);
  bool found = false;
  for (size_t i = 0; i < all.size() && !found; ++i) {
    for (size_t j = 0; j < all.size() && !found; ++j) {
      for (size_t l = 0; l < all.size() && !found; ++l) {
        const SimFloat &x = all[i], &y = all[j], &z = all[l];
        SimFloat left = add(add(x, y, Rounding::kBanker), z, Rounding::kBanker);
        SimFloat right = add(x, add(y, z, Rounding::kBanker), Rounding::kBanker);
        found = left != right;
      }
    }
  }
  EXPECT_TRUE(found);
}

TEST(AddFloat, InfinityArithmetic) {
  SimFloat inf = SimFloat::infinity(kTiny, false);
  SimFloat one = SimFloat::exact(kTiny, D(1));
  EXPECT_EQ(add(inf, one, Rounding::kBanker), inf);
  EXPECT_EQ(add(inf, inf, Rounding::kRtz), inf);
  EXPECT_THROW(add(inf, -inf, Rounding::kBanker), ArithmeticError);
  EXPECT_THROW(inf.to_exact(), PreconditionError);
}

TEST(AddFloat, MatchesNativeDoubleAndFloat) {
  std::mt19937_64 rng(2024);
  FloatFormat f64(52, 11);
  FloatFormat f32(23, 8);
  auto random_double = [&rng]() {
    uint64_t bits = rng();
    // Skew exponents toward a narrow band half the time so cancellation and
    // ties actually happen.
    if (rng() % 2) bits = (bits & 0x800fffffffffffffULL) |
                          (uint64_t{1000 + rng() % 40} << 52);
    double d;
    std::memcpy(&d, &bits, sizeof d);
    return d;
  };
  for (int i = 0; i < 200000; ++i) {
    double a = random_double();
    double b = random_double();
    if (!std::isfinite(a) || !std::isfinite(b)) continue;
    volatile double va = a, vb = b;
    double native = va + vb;
    if (!std::isfinite(native)) continue;
    uint64_t abits, bbits;
    std::memcpy(&abits, &a, 8);
    std::memcpy(&bbits, &b, 8);
    SimFloat x = SimFloat::from_bits(f64, abits);
    SimFloat y = SimFloat::from_bits(f64, bbits);
    SimFloat sum = add(x, y, Rounding::kBanker);
    if (native == 0.0) {
      ASSERT_TRUE(sum.is_zero());
      continue;
    }
    uint64_t nbits;
    std::memcpy(&nbits, &native, 8);
    ASSERT_EQ(static_cast<uint64_t>(sum.bits()), nbits) << a << " + " << b;
  }
  std::fesetround(FE_TOWARDZERO);
  for (int i = 0; i < 200000; ++i) {
    uint32_t abits = static_cast<uint32_t>(rng());
    uint32_t bbits = static_cast<uint32_t>(rng());
    float a, b;
    std::memcpy(&a, &abits, 4);
    std::memcpy(&b, &bbits, 4);
    if (!std::isfinite(a) || !std::isfinite(b)) continue;
    volatile float va = a, vb = b;
    float native = va + vb;
    if (!std::isfinite(native) || std::fabs(native) == FLT_MAX) continue;
    SimFloat sum = add(SimFloat::from_bits(f32, abits),
                       SimFloat::from_bits(f32, bbits), Rounding::kRtz);
    if (native == 0.0f) {
      ASSERT_TRUE(sum.is_zero());
      continue;
    }
    uint32_t nbits;
    std::memcpy(&nbits, &native, 4);
    ASSERT_EQ(static_cast<uint32_t>(sum.bits()), nbits);
  }
  std::fesetround(FE_TONEAREST);
}

TEST(ToExact, Examples) {
  EXPECT_EQ(SimFloat::exact(kTiny, D(9, -3)).to_exact(), D(9, -3));
  EXPECT_EQ(KInt(IntFormat(8, true, Overflow::kWraparound), 7).to_exact(),
            D(7));
  EXPECT_EQ(SimFloat::subnormal(kTiny, false, 1).to_exact(), D(1, -9));
  std::vector<SimFloat> all = enumerate_floats(kTiny);
  EXPECT_EQ(all[all.size() / 2 + 1].to_exact(), D(1, -9));
}

TEST(ToExact, RoundTripEveryTinyFloat) {
  for (const SimFloat& x : enumerate_floats(kTiny)) {
    EXPECT_EQ(round_banker(x.to_exact(), kTiny), x);
    EXPECT_EQ(round_toward_zero(x.to_exact(), kTiny), x);
    EXPECT_EQ(SimFloat::parse(kTiny, x.to_hex()), x);
  }
}

TEST(ToExact, RoundTripRandomDoubles) {
  std::mt19937_64 rng(5);
  FloatFormat f64(52, 11);
  for (int i = 0; i < 20000; ++i) {
    uint64_t bits = rng();
    double d;
    std::memcpy(&d, &bits, 8);
    if (std::isnan(d)) continue;
    SimFloat x = SimFloat::from_bits(f64, bits);
    if (x.is_inf()) continue;
    if (x.is_zero() && x.negative()) continue;
    EXPECT_EQ(round_banker(x.to_exact(), f64), x);
    EXPECT_EQ(x.to_double(), d);
  }
}

TEST(Rounding, RelativeErrorBoundInNormalRange) {
  std::mt19937_64 rng(99);
  FloatFormat f(6, 8);
  for (int i = 0; i < 20000; ++i) {
    BigInt n(static_cast<int64_t>(rng() % (uint64_t{1} << 40)) + 1);
    if (rng() % 2) n = -n;
    DyadicRational q(n, static_cast<int64_t>(rng() % 80) - 80);
    if (q.floor_log2() < f.emin() || q.floor_log2() > f.emax()) continue;
    SimFloat r = round_banker(q, f);
    ASSERT_FALSE(r.is_inf());
    EXPECT_LE((r.to_exact() - q).abs(), q.abs().scaled(-(f.k() + 1)));
    SimFloat t = round_toward_zero(q, f);
    EXPECT_LE(t.to_exact().abs(), q.abs());
  }
}

TEST(Encoding, DoublePatternsMatchIeee) {
  FloatFormat f64(52, 11);
  SimFloat one = SimFloat::exact(f64, D(1));
  EXPECT_EQ(one.to_hex(), "0x3ff0000000000000");
  EXPECT_EQ((-SimFloat::exact(f64, D(5, -1))).to_hex(), "0xc004000000000000");
  EXPECT_EQ(SimFloat::exact(kTiny, D(9, -3)).to_hex(), "0x39");
  EXPECT_THROW(SimFloat::parse(kTiny, "0x0f9"), InputError);  // NaN
  EXPECT_THROW(SimFloat::parse(kTiny, "12"), InputError);
}

TEST(AddInt, Examples) {
  IntFormat u4w(4, false, Overflow::kWraparound);
  IntFormat s4s(4, true, Overflow::kSaturating);
  EXPECT_EQ(add(KInt(u4w, 15), KInt(u4w, 1)).value(), 0);
  EXPECT_EQ(add(KInt(s4s, 7), KInt(s4s, 3)).value(), 7);
  EXPECT_EQ(add(KInt(s4s, -8), KInt(s4s, -1)).value(), -8);
  EXPECT_THROW(KInt(u4w, 16), PreconditionError);
}

TEST(AddInt, WraparoundAssociativeOnRandomTriples) {
  std::mt19937_64 rng(3);
  for (int bits : {3, 8, 17, 63, 64}) {
    for (bool is_signed : {false, true}) {
      IntFormat f(bits, is_signed, Overflow::kWraparound);
      auto draw = [&]() {
        i128 span = f.max_value() - f.min_value() + 1;
        u128 r = (static_cast<u128>(rng()) << 64) | rng();
        return KInt(f, f.min_value() + static_cast<i128>(r % static_cast<u128>(span)));
      };
      for (int i = 0; i < 2000; ++i) {
        KInt a = draw(), b = draw(), c = draw();
        EXPECT_EQ(add(add(a, b), c), add(a, add(b, c)));
      }
    }
  }
}

TEST(AddInt, SaturatingSignedIsNotAssociative) {
  IntFormat f(8, true, Overflow::kSaturating);
  KInt mx = KInt::max(f);
  KInt m1(f, -1);
  EXPECT_NE(add(add(mx, mx), m1), add(mx, add(mx, m1)));
}

TEST(AddInt, WrapHelper) {
  IntFormat s4(4, true, Overflow::kWraparound);
  EXPECT_EQ(wrap(s4, BigInt(8)), -8);
  EXPECT_EQ(wrap(s4, BigInt(-9)), 7);
  IntFormat u64(64, false, Overflow::kWraparound);
  EXPECT_EQ(wrap(u64, (BigInt(1) << 64)), 0);
}

}  // namespace
}  // namespace bsum
