#include "bsum/io.h"

#include <string>

#include "bsum/errors.h"
#include "gtest/gtest.h"

namespace bsum {
namespace {

TEST(FormatJsonTest, RoundTripsBothTypes) {
  FloatFormat f(8, 6);
  AnyFormat back = format_from_json(format_to_json(f));
  ASSERT_TRUE(std::holds_alternative<FloatFormat>(back));
  EXPECT_EQ(std::get<FloatFormat>(back), f);

  IntFormat i(16, true, Overflow::kSaturating);
  AnyFormat back_i = format_from_json(format_to_json(i));
  ASSERT_TRUE(std::holds_alternative<IntFormat>(back_i));
  EXPECT_EQ(std::get<IntFormat>(back_i), i);
}

TEST(FormatJsonTest, NamesTheBadField) {
  try {
    format_from_json(Json{{"type", "int"}, {"bits", 8}, {"signed", false},
                          {"overflow", "clamp"}});
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_EQ(e.field(), "format.overflow");
  }
  try {
    format_from_json(Json{{"type", "float"}, {"k", 0}, {"l", 5}});
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_EQ(e.field(), "format");
  }
  EXPECT_THROW(format_from_json(Json{{"type", "decimal"}}), InputError);
}

TEST(ParseElementTest, FloatsAcceptPatternsAndExactDyadics) {
  FloatFormat f(3, 4);
  SimFloat a = parse_element(f, "9*2^-3", "x");
  EXPECT_EQ(a.to_exact(), DyadicRational(9, -3));
  EXPECT_EQ(parse_element(f, a.to_hex(), "x"), a);
  EXPECT_EQ(parse_element(f, "-2", "x").to_exact(), DyadicRational(-2));
  // 17 needs five significant bits.
  EXPECT_THROW(parse_element(f, "17", "x"), InputError);
  EXPECT_THROW(parse_element(f, "abc", "x"), InputError);
}

TEST(DatasetJsonTest, RunLengthRoundTrip) {
  FloatFormat f(52, 11);
  SimFloat lo = SimFloat::exact(f, DyadicRational(0));
  SimFloat hi = SimFloat::exact(f, DyadicRational(1));
  FloatDataset d(lo, hi);
  d.push_back(hi, uint64_t{1} << 40);
  d.push_back(SimFloat::exact(f, DyadicRational(1, -1)));
  Json j = dataset_to_json(d);
  EXPECT_EQ(j["elements"].size(), 2u);
  EXPECT_EQ(j["elements"][0]["count"].get<uint64_t>(), uint64_t{1} << 40);
  EXPECT_TRUE(j["elements"][1].is_string());

  AnyDataset back = dataset_from_json(j);
  const FloatDataset& b = std::get<FloatDataset>(back);
  EXPECT_EQ(b.size(), d.size());
  EXPECT_EQ(b.runs().size(), 2u);
  EXPECT_EQ(b.runs()[0].value, hi);
  EXPECT_EQ(dump(dataset_to_json(b)), dump(j));
}

TEST(DatasetJsonTest, IntegersAndStringCounts) {
  Json j = Json::parse(R"({
    "format": {"type": "int", "bits": 8, "signed": true,
               "overflow": "wraparound"},
    "bounds": {"L": "-5", "U": "7"},
    "elements": ["3", {"value": "-5", "count": "4"}]
  })");
  AnyDataset any = dataset_from_json(j);
  const IntDataset& d = std::get<IntDataset>(any);
  EXPECT_EQ(d.size(), 5u);
  EXPECT_EQ(d.runs()[1].value.value(), -5);
}

TEST(DatasetJsonTest, ErrorsNameTheElement) {
  Json j = Json::parse(R"({
    "format": {"type": "int", "bits": 4, "signed": false,
               "overflow": "wraparound"},
    "bounds": {"L": "0", "U": "10"},
    "elements": ["3", "11"]
  })");
  try {
    dataset_from_json(j, "in");
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_EQ(e.field(), "in.elements[1]");
  }
  j["elements"] = Json::array({Json{{"value", "1"}, {"count", -2}}});
  try {
    dataset_from_json(j, "in");
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_EQ(e.field(), "in.elements[0].count");
  }
  j.erase("bounds");
  EXPECT_THROW(dataset_from_json(j), InputError);
}

TEST(MethodJsonTest, RoundTripsTransforms) {
  SumMethod m;
  m.algorithm = Algorithm::kKahan;
  m.rounding = Rounding::kRtz;
  m.transforms = {Transform::random_permutation(UINT64_MAX),
                  Transform::truncate(1000), Transform::shift_bounds()};
  Json j = method_to_json(m);
  // Seeds are strings so 64-bit values survive any JSON reader.
  EXPECT_EQ(j["transforms"][0]["seed"], "18446744073709551615");
  SumMethod back = method_from_json(j);
  EXPECT_EQ(back.to_string(), m.to_string());
  EXPECT_EQ(back.transforms[0].seed, UINT64_MAX);
  EXPECT_THROW(method_from_json(Json{{"algorithm", "bogus"}}), InputError);
}

TEST(RationalTextTest, Format) {
  EXPECT_EQ(rational_to_string(BigRational(6, 4)), "3/2");
  EXPECT_EQ(rational_to_string(BigRational(-8)), "-8/1");
}

}  // namespace
}  // namespace bsum
