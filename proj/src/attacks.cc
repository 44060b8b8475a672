#include "bsum/attacks.h"

#include "bsum/errors.h"
#include "bsum/value_ops.h"

namespace bsum {
namespace {

SumMethod iterative(Rounding rounding = Rounding::kBanker) {
  SumMethod m;
  m.algorithm = Algorithm::kIterative;
  m.rounding = rounding;
  return m;
}

SimFloat exact_float(const FloatFormat& f, const DyadicRational& q,
                     const std::string& what) {
  try {
    return SimFloat::exact(f, q);
  } catch (const PreconditionError& e) {
    throw PreconditionError(what + " = " + q.to_string() +
                            " is not representable in " + f.to_string());
  }
}

void require(bool condition, const std::string& message) {
  if (!condition) throw PreconditionError(message);
}

// Fills in the derived fields and checks the adjacency claim.
template <class T>
AttackInstance<T> finish(std::string name, std::string claim, Dataset<T> u,
                         Dataset<T> v, Metric metric, uint64_t adjacency,
                         DyadicRational predicted, DyadicRational idealized,
                         SumMethod native,
                         std::vector<std::pair<std::string, std::string>> params) {
  Distance d = distance(metric, u, v);
  if (!d.at_most(adjacency) || d.value() != adjacency) {
    throw VerificationError(name + ": constructed pair has " + to_string(metric) +
                            " distance " + d.to_string() + ", expected " +
                            std::to_string(adjacency));
  }
  BigRational blowup = predicted.to_rational() / idealized.to_rational();
  return AttackInstance<T>{std::move(name),
                           std::move(claim),
                           std::move(u),
                           std::move(v),
                           metric,
                           adjacency,
                           std::move(predicted),
                           std::move(idealized),
                           blowup,
                           std::move(native),
                           std::move(params)};
}

std::string str(int64_t v) { return std::to_string(v); }

}  // namespace

IntAttack overflow_attack(const IntFormat& format, const KInt& lower,
                          const KInt& upper, bool ham_variant) {
  require(format.overflow() == Overflow::kWraparound,
          "overflow attack: format must use wraparound addition");
  require(lower.format() == format && upper.format() == format,
          "overflow attack: bounds must be in the attacked format");
  require(lower.is_zero(), "overflow attack: requires L = 0");
  require(upper.value() >= 1, "overflow attack: requires U >= 1");
  i128 max = format.max_value();
  i128 u_val = upper.value();
  i128 q = (max + u_val - 1) / u_val;  // ceil(max / U)
  i128 last = max - (q - 1) * u_val;   // in (0, U]
  Dataset<KInt> u(lower, upper);
  u.push_back(upper, static_cast<uint64_t>(q - 1));
  u.push_back(KInt(format, last));
  Dataset<KInt> v = u;
  v.push_back(KInt(format, 1));
  Metric metric = Metric::kId;
  DyadicRational idealized = upper.to_exact();
  if (ham_variant) {
    u.push_back(KInt(format, 0));
    metric = Metric::kHam;
    idealized = upper.to_exact() - lower.to_exact();
  }
  DyadicRational predicted = DyadicRational(format.modulus(), 0) - DyadicRational(1);
  return finish<KInt>(
      "overflow",
      "wraparound iterative sum: one extra element of 1 wraps max to min",
      std::move(u), std::move(v), metric, 1, predicted, idealized, iterative(),
      {{"format", format.to_string()},
       {"L", lower.to_string()},
       {"U", upper.to_string()},
       {"ham_variant", ham_variant ? "true" : "false"}});
}

IntAttack saturation_reorder_attack(const IntFormat& format, const KInt& lower,
                                    const KInt& upper) {
  require(format.overflow() == Overflow::kSaturating,
          "saturation reorder attack: format must use saturating addition");
  require(format.is_signed(), "saturation reorder attack: format must be signed");
  require(lower.format() == format && upper.format() == format,
          "saturation reorder attack: bounds must be in the attacked format");
  require(lower.value() < 0, "saturation reorder attack: requires L < 0");
  require(upper.value() > 0, "saturation reorder attack: requires U > 0");
  BigInt span = BigInt(i128_to_string(format.max_value())) -
                BigInt(i128_to_string(format.min_value()));
  BigInt abs_l = -lower.to_big();
  BigInt abs_u = upper.to_big();
  BigInt b = (span + abs_l - 1) / abs_l;
  BigInt c = (span + abs_u - 1) / abs_u;
  uint64_t nb = b.convert_to<uint64_t>();
  uint64_t nc = c.convert_to<uint64_t>();
  Dataset<KInt> u(lower, upper);
  u.push_back(lower, nb);
  u.push_back(upper, nc);
  Dataset<KInt> v(lower, upper);
  v.push_back(upper, nc);
  v.push_back(lower, nb);
  DyadicRational predicted(span, 0);
  return finish<KInt>(
      "saturation_reorder",
      "saturating iterative sum: reordering saturates at opposite ends",
      std::move(u), std::move(v), Metric::kCo, 0, predicted,
      upper.to_exact() - lower.to_exact(), iterative(),
      {{"format", format.to_string()},
       {"L", lower.to_string()},
       {"U", upper.to_string()},
       {"b", b.str()},
       {"c", c.str()}});
}

FloatAttack float_reorder_attack(const FloatFormat& format, int64_t j,
                                 int64_t a, int64_t d, bool drop_last) {
  const int64_t k = format.k();
  require(j >= format.emin(), "float reorder attack: requires j >= " +
                                  str(format.emin()));
  require(j <= format.emax() - 2 - k,
          "float reorder attack: requires j <= " + str(format.emax() - 2 - k));
  require(a >= 0, "float reorder attack: requires a >= 0");
  require(d > 0, "float reorder attack: requires d > 0");
  require(a + d <= k + 1, "float reorder attack: requires a + d <= k + 1");
  SimFloat lower = exact_float(format, DyadicRational::pow2(j), "L");
  SimFloat upper = exact_float(format, DyadicRational::pow2(j + d), "U");
  uint64_t b = uint64_t{1} << (k + 1 - a);
  uint64_t c = uint64_t{1} << (k + 1 - d);
  Dataset<SimFloat> u(lower, upper);
  u.push_back(lower, b);
  u.push_back(upper, c);
  Dataset<SimFloat> v(lower, upper);
  v.push_back(upper, c);
  v.push_back(lower, drop_last ? b - 1 : b);
  DyadicRational predicted = DyadicRational::pow2(k + 1 - a - d) * upper.to_exact();
  return finish<SimFloat>(
      "float_reorder",
      "banker's iterative float sum: small values vanish when added last",
      std::move(u), std::move(v), Metric::kSym, drop_last ? 1 : 0, predicted,
      upper.to_exact(), iterative(),
      {{"format", format.to_string()},
       {"j", str(j)},
       {"a", str(a)},
       {"d", str(d)},
       {"drop_last", drop_last ? "true" : "false"}});
}

FloatAttack rounding_attack(const FloatFormat& format, int64_t j, int64_t m) {
  const int64_t k = format.k();
  require(j > 1, "rounding attack: requires j > 1");
  require(2 * j < k + 1, "rounding attack: requires j < (k + 1) / 2");
  require(m >= format.emin(),
          "rounding attack: requires m >= " + str(format.emin()));
  require(m <= format.emax() - j,
          "rounding attack: requires m <= " + str(format.emax() - j));
  DyadicRational l_exact =
      (DyadicRational(1) + DyadicRational::pow2(j - k - 1)) * DyadicRational::pow2(m);
  SimFloat lower = exact_float(format, l_exact, "L");
  SimFloat upper =
      exact_float(format, l_exact + DyadicRational::pow2(m - k), "U");
  uint64_t b = uint64_t{1} << j;
  Dataset<SimFloat> u(lower, upper);
  u.push_back(lower, b);
  u.push_back(upper);
  Dataset<SimFloat> v(lower, upper);
  v.push_back(lower, b + 1);
  return finish<SimFloat>(
      "rounding",
      "banker's iterative float sum: the last addition rounds U up and L down",
      std::move(u), std::move(v), Metric::kHam, 1, DyadicRational::pow2(j + m - k),
      upper.to_exact() - lower.to_exact(), iterative(),
      {{"format", format.to_string()}, {"j", str(j)}, {"m", str(m)}});
}

FloatAttack repeated_rounding_attack_1(const FloatFormat& format, int64_t j,
                                       int64_t m) {
  const int64_t k = format.k();
  require(j > 0, "repeated rounding attack: requires j > 0");
  require(j <= k, "repeated rounding attack: requires j <= k");
  require(m >= format.emin(),
          "repeated rounding attack: requires m >= " + str(format.emin()));
  require(m <= format.emax() - 1 - j - k,
          "repeated rounding attack: requires m <= " +
              str(format.emax() - 1 - j - k));
  SimFloat lower = SimFloat::zero(format);
  SimFloat upper = exact_float(format, DyadicRational::pow2(k + m), "U");
  uint64_t reps = uint64_t{1} << k;
  Dataset<SimFloat> u(lower, upper);
  Dataset<SimFloat> v(lower, upper);
  u.push_back(upper, 2);
  v.push_back(upper, 1);
  for (int64_t x = 0; x < j; ++x) {
    SimFloat step = exact_float(
        format, DyadicRational::pow2(x + m) + DyadicRational::pow2(x + m - k),
        "f(" + str(x) + ")");
    u.push_back(step, reps);
    v.push_back(step, reps);
  }
  return finish<SimFloat>(
      "repeated_rounding_1",
      "banker's iterative float sum: rounding errors compound over a staircase",
      std::move(u), std::move(v), Metric::kId, 1,
      DyadicRational::pow2(k + j + m), upper.to_exact(), iterative(),
      {{"format", format.to_string()}, {"j", str(j)}, {"m", str(m)}});
}

DyadicRational repeated_rounding_2_gap(const FloatFormat& format, int64_t j,
                                      int64_t a) {
  const int64_t k = format.k();
  require(j >= 2, "repeated rounding attack: requires j >= 2");
  require(j < k, "repeated rounding attack: requires j < k");
  require(a >= format.emin(),
          "repeated rounding attack: requires a >= " + str(format.emin()));
  require(j + a >= format.emin() + 1 + k,
          "repeated rounding attack: requires j + a >= " +
              str(format.emin() + 1 + k));
  require(j + a <= format.emax(),
          "repeated rounding attack: requires j + a <= " + str(format.emax()));
  // n^2 / 2^(k + 3) * U + U with n = 2^j and U = 2^a.
  return DyadicRational::pow2(2 * j - k - 3 + a) + DyadicRational::pow2(a);
}

FloatAttack repeated_rounding_attack_2(const FloatFormat& format, int64_t j,
                                       int64_t a) {
  const int64_t k = format.k();
  DyadicRational predicted = repeated_rounding_2_gap(format, j, a);
  uint64_t half = uint64_t{1} << (j - 1);
  // U * half / 2^k = 2^(a + j - 1 - k).
  DyadicRational scale = DyadicRational::pow2(a + j - 1 - k);
  DyadicRational tiny = DyadicRational::pow2(-k);
  DyadicRational one_half = DyadicRational::pow2(-1);
  SimFloat upper = exact_float(format, DyadicRational::pow2(a), "U");
  SimFloat lower = exact_float(format, -(scale * (one_half - tiny)), "L");
  SimFloat x = exact_float(format, scale * (one_half + tiny), "x");
  Dataset<SimFloat> u(lower, upper);
  Dataset<SimFloat> v(lower, upper);
  u.push_back(upper, half);
  v.push_back(upper, half - 1);
  for (uint64_t i = 0; i < half / 2; ++i) {
    u.push_back(x);
    u.push_back(lower);
    v.push_back(x);
    v.push_back(lower);
  }
  DyadicRational idealized = max(lower.to_exact().abs(), upper.to_exact());
  return finish<SimFloat>(
      "repeated_rounding_2",
      "banker's iterative float sum: alternating terms round up only after an "
      "extra U",
      std::move(u), std::move(v), Metric::kId, 1, predicted, idealized,
      iterative(),
      {{"format", format.to_string()}, {"j", str(j)}, {"a", str(a)}});
}

bool same_method(const SumMethod& a, const SumMethod& b) {
  if (a.algorithm != b.algorithm || a.checked != b.checked ||
      a.effective_rounding() != b.effective_rounding() ||
      a.transforms.size() != b.transforms.size()) {
    return false;
  }
  for (size_t i = 0; i < a.transforms.size(); ++i) {
    const Transform& x = a.transforms[i];
    const Transform& y = b.transforms[i];
    if (x.kind != y.kind || x.n_max != y.n_max || x.seed != y.seed) return false;
  }
  return true;
}

template <class T>
RealizedGap realized_gap(const AttackInstance<T>& instance,
                         const SumMethod& method) {
  SumResult<T> ru = run_sum(instance.u, method);
  SumResult<T> rv = run_sum(instance.v, method);
  auto text = [](const SumResult<T>& r) {
    if (r.value) return describe(*r.value);
    return r.exact->to_string();
  };
  RealizedGap out;
  out.sum_u = text(ru);
  out.sum_v = text(rv);
  if (ru.exact && rv.exact) {
    out.gap = (*ru.exact - *rv.exact).abs();
    out.midpoint = (*ru.exact + *rv.exact) * DyadicRational::pow2(-1);
  } else if (!ru.exact && !rv.exact && *ru.value == *rv.value) {
    out.gap = DyadicRational(0);
  }
  return out;
}

template <class T>
RealizedGap verify_attack(const AttackInstance<T>& instance,
                          const SumMethod& method) {
  RealizedGap r = realized_gap(instance, method);
  if (same_method(method, instance.native_method) && r.gap &&
      *r.gap < instance.predicted_gap) {
    throw VerificationError(instance.name + ": realized gap " + r.gap->to_string() +
                            " is below the predicted " +
                            instance.predicted_gap.to_string());
  }
  return r;
}

template RealizedGap realized_gap(const AttackInstance<SimFloat>&,
                                  const SumMethod&);
template RealizedGap realized_gap(const AttackInstance<KInt>&, const SumMethod&);
template RealizedGap verify_attack(const AttackInstance<SimFloat>&,
                                   const SumMethod&);
template RealizedGap verify_attack(const AttackInstance<KInt>&,
                                   const SumMethod&);

}  // namespace bsum
