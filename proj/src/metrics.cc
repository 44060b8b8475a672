#include "bsum/metrics.h"

namespace bsum {

std::string to_string(Metric metric) {
  switch (metric) {
    case Metric::kSym:
      return "sym";
    case Metric::kCo:
      return "co";
    case Metric::kHam:
      return "ham";
    case Metric::kId:
      return "id";
  }
  return "?";
}

Metric parse_metric(const std::string& text) {
  if (text == "sym") return Metric::kSym;
  if (text == "co") return Metric::kCo;
  if (text == "ham") return Metric::kHam;
  if (text == "id") return Metric::kId;
  throw InputError("metric", "unknown metric '" + text +
                                 "' (expected sym, co, ham or id)");
}

u128 d_mod(i128 x, i128 y, u128 modulus) {
  if (modulus == 0) throw PreconditionError("d_mod: modulus must be positive");
  auto reduce = [modulus](i128 v) {
    i128 m = static_cast<i128>(modulus);
    i128 r = v % m;
    return static_cast<u128>(r < 0 ? r + m : r);
  };
  u128 forward = reduce(x - y);
  u128 backward = forward == 0 ? 0 : modulus - forward;
  return forward < backward ? forward : backward;
}

u128 d_mod(const KInt& x, const KInt& y) {
  if (x.format() != y.format()) {
    throw PreconditionError("d_mod: operands have different formats");
  }
  return d_mod(x.value(), y.value(), u128{1} << x.format().bits());
}

}  // namespace bsum
