#include "bsum/sensitivity.h"

#include <algorithm>
#include <limits>
#include <type_traits>

#include "bsum/attacks.h"
#include "bsum/errors.h"
#include "bsum/value_ops.h"

namespace bsum {

namespace {

template <class T>
DyadicRational exact_of(const T& x) {
  return x.to_exact();
}

template <class T>
DyadicRational max_magnitude(const T& lower, const T& upper) {
  return max(exact_of(lower).abs(), exact_of(upper).abs());
}

// max{|L|, U} for sym/id, U - L for co/ham. With L > 0 or U < 0 the
// sym/id value is still max{|L|, U}: one inserted element moves the sum by
// at most that much.
template <class T>
DyadicRational idealized_value(const T& lower, const T& upper, Metric metric) {
  if (is_ordered(metric) ? metric == Metric::kId : metric == Metric::kSym) {
    return max_magnitude(lower, upper);
  }
  return exact_of(upper) - exact_of(lower);
}

Metric coupled(Metric metric) {
  switch (metric) {
    case Metric::kSym:
      return Metric::kId;
    case Metric::kCo:
      return Metric::kHam;
    default:
      return metric;
  }
}

bool is_insert_delete(Metric metric) {
  return metric == Metric::kSym || metric == Metric::kId;
}

template <class T>
SumMethod resolve(const SumMethod& method) {
  if constexpr (std::is_same_v<T, SimFloat>) {
    return resolve_for_floats(method);
  } else {
    return resolve_for_ints(method);
  }
}

// The effect of a transform list on the adjacency the algorithm sees. A
// random permutation turns an unordered metric into its ordered coupling;
// truncation needs ordered adjacency at the point where it runs.
struct Plan {
  Metric effective;
  std::optional<uint64_t> n_max;
  bool permuted = false;
};

Plan plan_transforms(Metric metric, const SumMethod& method) {
  Plan plan{metric, std::nullopt, false};
  for (const Transform& t : method.transforms) {
    switch (t.kind) {
      case Transform::Kind::kRandomPermutation:
        plan.effective = coupled(plan.effective);
        plan.permuted = true;
        break;
      case Transform::Kind::kTruncate:
        if (!is_ordered(plan.effective)) {
          throw UnsupportedError(
              "truncation of unordered data needs a random permutation "
              "before it");
        }
        plan.n_max = plan.n_max ? std::min(*plan.n_max, t.n_max) : t.n_max;
        break;
      case Transform::Kind::kShiftBounds:
        break;
    }
  }
  return plan;
}

SumMethod without(const SumMethod& method, Transform::Kind kind) {
  SumMethod out = method;
  out.transforms.clear();
  for (const Transform& t : method.transforms) {
    if (t.kind != kind) out.transforms.push_back(t);
  }
  return out;
}

struct Piece {
  DyadicRational value;
  std::string source;
  BoundKind kind = BoundKind::kImplementedUpper;
  bool modular = false;
};

// Bound for the algorithm alone under effective metric e, with datasets
// of length at most n (exactly n for co/ham) when n is present.
template <class T>
Piece base_bound(const T& lower, const T& upper, Metric e,
                 std::optional<uint64_t> n, const SumMethod& method) {
  DyadicRational ideal = idealized_value(lower, upper, e);
  if (method.algorithm == Algorithm::kExact) {
    return {ideal, "exact summation attains the idealized sensitivity",
            BoundKind::kIdealized};
  }
  if constexpr (std::is_same_v<T, KInt>) {
    const IntFormat& f = lower.format();
    if (method.checked) {
      if (!n) {
        throw UnsupportedError("checked integer sums need a length bound");
      }
      if (!check_multiplication(lower, upper, *n)) {
        throw UnsupportedError("checked multiplication fails: n * L or n * U "
                               "leaves the integer range for n = " +
                               std::to_string(*n));
      }
      return {ideal, "checked parameters: no overflow, so the sum is exact",
              BoundKind::kIdealized};
    }
    if (f.overflow() == Overflow::kWraparound) {
      DyadicRational half(f.modulus() / 2, 0);
      return {min(half, ideal),
              "wraparound sum measured mod 2^k: min{2^k / 2, idealized}",
              BoundKind::kModular, true};
    }
    if (method.algorithm == Algorithm::kSplitInt) {
      return {ideal, "saturating split sum attains the idealized sensitivity",
              BoundKind::kImplementedUpper};
    }
    if (is_ordered(e)) {
      return {ideal,
              "saturating iterative sum is 1-Lipschitz in each element and "
              "monotone, so ordered adjacency keeps the idealized value",
              BoundKind::kImplementedUpper};
    }
    DyadicRational span =
        exact_of(max_value(f)) - exact_of(min_value(f));
    return {span,
            "saturating iterative sum under unordered adjacency: only the "
            "format range max - min",
            BoundKind::kImplementedUpper};
  } else {
    const FloatFormat& f = lower.format();
    switch (method.algorithm) {
      case Algorithm::kIterative:
      case Algorithm::kPairwise:
      case Algorithm::kPairwiseLevelwise:
      case Algorithm::kKahan: {
        if (!n) {
          throw UnsupportedError(
              "float " + to_string(method.algorithm) +
              " summation needs a length bound (known n or truncation)");
        }
        DyadicRational acc =
            accuracy_bound(method.algorithm, method.rounding, *n, f, lower,
                           upper);
        if (!float_overflow_check(lower, upper, *n, acc)) {
          throw UnsupportedError("float_overflow_check fails for n = " +
                                 std::to_string(*n));
        }
        std::string constant =
            method.algorithm == Algorithm::kKahan
                ? " (C = " + std::to_string(kKahanConstant) + ")"
                : "";
        return {ideal + acc + acc,
                "idealized + 2 * accuracy bound of " +
                    to_string(method.algorithm) + " summation" + constant +
                    " at n = " + std::to_string(*n),
                BoundKind::kImplementedUpper};
      }
      case Algorithm::kSplitFloatRtz: {
        if (e == Metric::kId) {
          SplitRtzBound b = split_rtz_bound_unknown_n(lower, upper);
          return {b.value, "RTZ split bound for insert/delete adjacency",
                  BoundKind::kImplementedUpper};
        }
        if (e == Metric::kHam) {
          if (!n) throw UnsupportedError("RTZ split under ham needs n");
          SplitRtzBound b = split_rtz_bound_known_n(lower, upper, *n);
          return {b.value, "RTZ split bound for substitution adjacency at n = " +
                               std::to_string(*n),
                  BoundKind::kImplementedUpper};
        }
        throw UnsupportedError(
            "RTZ split under unordered adjacency needs a random permutation");
      }
      default:
        break;
    }
    throw UnsupportedError("no sensitivity bound for float " +
                           to_string(method.algorithm) + " summation");
  }
}

template <class T>
T exact_value(const typename T::Format& format, const DyadicRational& q) {
  if constexpr (std::is_same_v<T, SimFloat>) {
    return SimFloat::exact(format, q);
  } else {
    if (!q.is_integer()) throw PreconditionError("non-integer bound");
    BigInt v = q.floor();
    if (v < BigInt(static_cast<int64_t>(0)) && !format.is_signed()) {
      throw PreconditionError("negative value in an unsigned format");
    }
    if (v > BigInt(i128_to_string(format.max_value())) ||
        v < BigInt(i128_to_string(format.min_value()))) {
      throw PreconditionError(q.to_string() + " is not representable");
    }
    return KInt::from_big(format, v);
  }
}

template <class T>
SensitivityBound to_bound(const Piece& p) {
  SensitivityBound b;
  b.value = p.value;
  b.kind = p.kind;
  b.source = p.source;
  b.modular = p.modular;
  return b;
}

i128 big_to_i128(const BigInt& v) {
  static const BigInt kInt64Max(std::numeric_limits<int64_t>::max());
  static const BigInt kInt64Min(std::numeric_limits<int64_t>::min());
  if (v <= kInt64Max && v >= kInt64Min) return v.convert_to<int64_t>();
  static const BigInt limit = BigInt(1) << 120;
  if (v >= limit || v <= -limit) {
    throw UnsupportedError("brute force: output does not fit the scaled table");
  }
  BigInt mag = v < 0 ? BigInt(-v) : v;
  u128 out = 0;
  out = static_cast<u128>(static_cast<uint64_t>(mag >> 64)) << 64;
  out |= static_cast<uint64_t>(mag & BigInt(std::numeric_limits<uint64_t>::max()));
  i128 r = static_cast<i128>(out);
  return v < 0 ? -r : r;
}

DyadicRational from_i128(i128 v, int64_t scale) {
  return DyadicRational(BigInt(i128_to_string(v)), -scale);
}

// Released value of one evaluation: the computed sum plus any shift
// offset, or an infinity, or undefined.
struct Released {
  enum class State { kFinite, kPosInf, kNegInf, kUndefined };
  State state = State::kFinite;
  DyadicRational value;
};

template <class T>
Released release(const Dataset<T>& data, const SumMethod& method) {
  Released out;
  try {
    SumResult<T> r = run_sum(data, method);
    if (!r.exact) {
      out.state = r.value->is_negative_value() ? Released::State::kNegInf
                                               : Released::State::kPosInf;
      return out;
    }
    out.value = *r.exact;
    if (r.offset) {
      out.value += exact_of(*r.offset) *
                   DyadicRational(static_cast<int64_t>(*r.offset_count));
    }
  } catch (const ArithmeticError&) {
    out.state = Released::State::kUndefined;
  }
  return out;
}

// Cyclic distance between integers (given as dyadics) modulo m.
DyadicRational cyclic_distance(const DyadicRational& a,
                               const DyadicRational& b, const BigInt& m) {
  BigInt d = (a - b).floor() % m;
  if (d < 0) d += m;
  BigInt other = m - d;
  return DyadicRational(d < other ? d : other, 0);
}

// Output distance; nullopt for infinite.
std::optional<DyadicRational> released_distance(
    const Released& a, const Released& b, const std::optional<BigInt>& modulus) {
  using S = Released::State;
  if (a.state == S::kUndefined || b.state == S::kUndefined) {
    return std::nullopt;
  }
  if (a.state != S::kFinite || b.state != S::kFinite) {
    if (a.state == b.state) return DyadicRational(0);
    return std::nullopt;
  }
  if (modulus) return cyclic_distance(a.value, b.value, *modulus);
  return (a.value - b.value).abs();
}

template <class T>
std::optional<BigInt> cyclic_modulus(const T& lower, const SumMethod& method) {
  if constexpr (std::is_same_v<T, KInt>) {
    if (lower.format().overflow() == Overflow::kWraparound && !method.checked &&
        method.algorithm != Algorithm::kExact) {
      return lower.format().modulus();
    }
  }
  return std::nullopt;
}

// Strips the random permutation and couples the metric, as the
// brute-force oracle and the attack lower bound both do.
struct Coupled {
  Metric metric;
  SumMethod method;
};

template <class T>
Coupled couple(const SensSpec<T>& spec) {
  SumMethod m = resolve<T>(spec.method);
  if (m.has(Transform::Kind::kRandomPermutation)) {
    return {coupled(spec.metric),
            without(m, Transform::Kind::kRandomPermutation)};
  }
  return {spec.metric, m};
}

}  // namespace

// ---------------------------------------------------------------------------

template <class T>
void validate(const SensSpec<T>& spec) {
  if (spec.lower.format() != spec.upper.format()) {
    throw InputError("bounds", "L and U have different formats");
  }
  if (!is_finite_value(spec.lower) || !is_finite_value(spec.upper)) {
    throw InputError("bounds", "L and U must be finite");
  }
  if (compare(spec.lower, spec.upper) > 0) {
    throw InputError("bounds", "L > U");
  }
  if (requires_known_length(spec.metric) && !spec.n) {
    throw InputError("n", to_string(spec.metric) + " adjacency needs n");
  }
}

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::kIdealized:
      return "idealized";
    case BoundKind::kImplementedUpper:
      return "implemented_upper";
    case BoundKind::kAttackLower:
      return "attack_lower";
    case BoundKind::kBruteForceExact:
      return "brute_force_exact";
    case BoundKind::kModular:
      return "modular";
  }
  return "unknown";
}

bool bound_le(const SensitivityBound& a, const SensitivityBound& b) {
  if (!b.value) return true;
  if (!a.value) return false;
  return *a.value <= *b.value;
}

template <class T>
SensitivityBound idealized_sensitivity(const SensSpec<T>& spec) {
  validate(spec);
  SensitivityBound b;
  b.value = idealized_value(spec.lower, spec.upper, spec.metric);
  b.kind = BoundKind::kIdealized;
  b.source = is_insert_delete(spec.metric) ? "max{|L|, U}" : "U - L";
  return b;
}

SensitivityBound modular_sensitivity_bound(const IntSensSpec& spec) {
  validate(spec);
  if (spec.format().overflow() != Overflow::kWraparound) {
    throw UnsupportedError("modular bound applies to wraparound formats");
  }
  DyadicRational half(spec.format().modulus() / 2, 0);
  SensitivityBound b;
  b.value = min(half, idealized_value(spec.lower, spec.upper, spec.metric));
  b.kind = BoundKind::kModular;
  b.source = "min{floor(2^k / 2), idealized}";
  b.modular = true;
  return b;
}

DyadicRational accuracy_bound(Algorithm algorithm, Rounding rounding,
                              uint64_t n, const FloatFormat& format,
                              const SimFloat& lower, const SimFloat& upper) {
  if (!lower.is_finite() || !upper.is_finite()) {
    throw PreconditionError("accuracy bound needs finite L and U");
  }
  DyadicRational m = max_magnitude(lower, upper);
  const int64_t k = format.k();
  // t = 2^t_exp.
  const int64_t t_exp = rounding == Rounding::kBanker ? -(k + 1) : -k;
  const DyadicRational nn(static_cast<int64_t>(n));
  if (n == 0 || m.is_zero()) {
    if (algorithm == Algorithm::kSplitInt ||
        algorithm == Algorithm::kSplitFloatRtz) {
      throw UnsupportedError("no accuracy bound for split summation");
    }
    return DyadicRational(0);
  }
  switch (algorithm) {
    case Algorithm::kExact:
      return DyadicRational(0);
    case Algorithm::kIterative:
      return nn * nn * m * DyadicRational::pow2(t_exp);
    case Algorithm::kPairwise:
    case Algorithm::kPairwiseLevelwise: {
      if (k < 64 && n >= (uint64_t{1} << k)) {
        throw PreconditionError("pairwise accuracy bound needs n < 2^k");
      }
      const int64_t c = ceil_log2(n);
      if (c == 0) return DyadicRational(0);
      // c t / (1 - c t) = c / (2^-t_exp - c).
      BigInt denom = (BigInt(1) << static_cast<unsigned>(-t_exp)) - c;
      DyadicRational ct_over = nn * m * DyadicRational(c);
      if (denom <= 2 * BigInt(c)) {
        throw PreconditionError("pairwise accuracy bound needs c * t < 1/2");
      }
      return divide_round_up(ct_over, denom);
    }
    case Algorithm::kKahan: {
      if (k < 64 && n >= (uint64_t{1} << k)) {
        throw PreconditionError("Kahan accuracy bound needs n < 2^k");
      }
      DyadicRational t = DyadicRational::pow2(t_exp);
      DyadicRational factor = t + t +
                              DyadicRational(kKahanConstant) * nn * t * t;
      return factor * nn * m;
    }
    default:
      break;
  }
  throw UnsupportedError("no accuracy bound for " + to_string(algorithm) +
                         " summation");
}

SplitRtzBound split_rtz_bound_unknown_n(const SimFloat& lower,
                                        const SimFloat& upper) {
  DyadicRational u = upper.to_exact();
  DyadicRational l = lower.to_exact();
  std::optional<DyadicRational> a_term, b_term;
  auto side = [&](const DyadicRational& mag) {
    DyadicRational p = DyadicRational::pow2(mag.floor_log2());
    DyadicRational a = p + mag;
    a_term = a_term ? max(*a_term, a) : a;
    b_term = b_term ? max(*b_term, p) : p;
  };
  if (u.sign() > 0) side(u);
  if (l.sign() < 0) side(l.abs());
  DyadicRational m = max(u.abs(), l.abs());
  SplitRtzBound out;
  out.value = a_term ? *a_term + *b_term : DyadicRational(0);
  out.coarse = DyadicRational(3) * m;
  return out;
}

SplitRtzBound split_rtz_bound_known_n(const SimFloat& lower,
                                      const SimFloat& upper, uint64_t n) {
  const int64_t k = lower.format().k();
  DyadicRational u = upper.to_exact();
  DyadicRational l = lower.to_exact();
  DyadicRational total(0);
  std::optional<DyadicRational> extra;
  auto side = [&](const DyadicRational& mag) {
    int64_t c = mag.floor_log2();
    int64_t b = c;
    if (n > 0) {
      DyadicRational nm = mag * DyadicRational(static_cast<int64_t>(n));
      b = std::min(c, nm.floor_log2() - k);
    }
    DyadicRational pb = DyadicRational::pow2(b);
    total += pb + mag;
    DyadicRational e = min(pb, DyadicRational::pow2(c + 1));
    extra = extra ? max(*extra, e) : e;
  };
  if (u.sign() > 0) side(u);
  if (l.sign() < 0) side(l.abs());
  SplitRtzBound out;
  out.value = extra ? total + *extra : DyadicRational(0);
  out.coarse = DyadicRational(5) * max(u.abs(), l.abs());
  return out;
}

template <class T>
SensitivityBound implemented_sensitivity_bound(const SensSpec<T>& spec) {
  validate(spec);
  SumMethod method = resolve<T>(spec.method);
  if (method.has(Transform::Kind::kShiftBounds)) {
    if (is_insert_delete(spec.metric)) {
      throw UnsupportedError(
          "shift_bounds changes the sum by L * n and is unsound for "
          "insert/delete adjacency");
    }
    DyadicRational span = exact_of(spec.upper) - exact_of(spec.lower);
    SensSpec<T> inner = spec;
    inner.lower = exact_value<T>(spec.format(), DyadicRational(0));
    inner.upper = exact_value<T>(spec.format(), span);
    inner.method = without(method, Transform::Kind::kShiftBounds);
    SensitivityBound b = implemented_sensitivity_bound(inner);
    b.source = "bounds shifted to [0, U - L]: " + b.source;
    return b;
  }
  Plan plan = plan_transforms(spec.metric, method);
  const Metric e = plan.effective;
  std::optional<uint64_t> n = spec.n;
  Piece piece;
  if (plan.n_max && is_insert_delete(e)) {
    if (n && *n <= *plan.n_max) {
      piece = base_bound(spec.lower, spec.upper, e, n, method);
    } else {
      // Truncated id-adjacent datasets are id-adjacent (both shorter than
      // n_max) or ham-adjacent at length n_max.
      Piece by_id =
          base_bound(spec.lower, spec.upper, Metric::kId, plan.n_max, method);
      Piece by_ham =
          base_bound(spec.lower, spec.upper, Metric::kHam, plan.n_max, method);
      piece = by_id.value >= by_ham.value ? by_id : by_ham;
      piece.source = "truncated to n_max = " + std::to_string(*plan.n_max) +
                     ": max of the insert/delete and substitution bounds; " +
                     piece.source;
    }
  } else {
    if (plan.n_max) n = n ? std::min(*n, *plan.n_max) : *plan.n_max;
    piece = base_bound(spec.lower, spec.upper, e, n, method);
  }
  if (plan.permuted && e != spec.metric) {
    piece.source = "random permutation couples " + to_string(spec.metric) +
                   " to " + to_string(e) + "; " + piece.source;
  }
  return to_bound<T>(piece);
}

// ---------------------------------------------------------------------------
// Brute force.

template <class T>
struct BruteForceTable<T>::Summary {
  bool any_finite = false;
  bool pos_inf = false;
  bool neg_inf = false;
  bool undefined = false;
  uint64_t pos_inf_id = 0, neg_inf_id = 0, undefined_id = 0, finite_id = 0;
  i128 lo = 0, hi = 0;
  uint64_t lo_id = 0, hi_id = 0;
  // Cyclic tables keep every distinct finite value.
  std::vector<std::pair<i128, uint64_t>> values;
  uint64_t any_id = 0;
  uint64_t count = 0;
};

template <class T>
struct BruteForceTable<T>::Gap {
  bool infinite = false;
  i128 value = 0;
  uint64_t a = 0, b = 0;
  bool valid = false;  // at least one pair was compared
};

namespace {

template <class G>
bool better(const G& candidate, const G& best) {
  if (!candidate.valid) return false;
  if (!best.valid) return true;
  if (best.infinite) return false;
  if (candidate.infinite) return true;
  return candidate.value > best.value;
}

i128 cyclic_i128(i128 a, i128 b, u128 modulus) {
  return static_cast<i128>(d_mod(a, b, modulus));
}

}  // namespace

template <class T>
BruteForceTable<T>::BruteForceTable(const T& lower, const T& upper,
                                    uint64_t n, const SumMethod& method,
                                    const BruteForceOptions& options)
    : lower_(lower), upper_(upper), n_(n), method_(resolve<T>(method)) {
  if (method_.has(Transform::Kind::kRandomPermutation)) {
    throw PreconditionError(
        "brute-force table: replace the random permutation by its coupling");
  }
  cyclic_ = cyclic_modulus(lower, method_).has_value();
  if constexpr (std::is_same_v<T, SimFloat>) {
    domain_ = enumerate_range(lower.format(), lower, upper);
    // Every finite output is a multiple of the smallest subnormal, and the
    // exact algorithm adds at most n values, so this scale keeps them
    // integral.
    scale_ = lower.format().k() - lower.format().emin();
  } else {
    for (i128 v = lower.value(); v <= upper.value(); ++v) {
      domain_.emplace_back(lower.format(), v);
      if (domain_.size() > options.guard) break;
    }
    scale_ = 0;
  }
  if (domain_.empty()) throw PreconditionError("brute force: empty domain");
  const uint64_t base = domain_.size();
  powers_.assign(1, 1);
  offsets_.assign(1, 0);
  uint64_t total = 0;
  for (uint64_t len = 0; len <= n_; ++len) {
    if (len > 0) {
      if (powers_.back() > options.guard / base) {
        throw GuardExceededError("brute force: |D|^" + std::to_string(len) +
                                 " datasets exceed the guard of " +
                                 std::to_string(options.guard));
      }
      powers_.push_back(powers_.back() * base);
    }
    total += powers_[len];
    if (total > options.guard) {
      throw GuardExceededError("brute force: " + std::to_string(total) +
                               " evaluations exceed the guard of " +
                               std::to_string(options.guard));
    }
    offsets_.push_back(total);
  }
  outputs_.resize(total);
  std::vector<uint32_t> digits;
  std::vector<T> elements;
  for (uint64_t len = 0; len <= n_; ++len) {
    digits.assign(len, 0);
    elements.assign(len, domain_[0]);
    for (uint64_t idx = 0; idx < powers_[len]; ++idx) {
      if (idx > 0) {
        // Increment the little-endian digit counter.
        for (uint64_t p = 0; p < len; ++p) {
          if (++digits[p] < base) {
            elements[p] = domain_[digits[p]];
            break;
          }
          digits[p] = 0;
          elements[p] = domain_[0];
        }
      }
      outputs_[tuple_id(len, idx)] = evaluate(elements);
      ++evaluations_;
    }
  }
}

template <class T>
typename BruteForceTable<T>::Output BruteForceTable<T>::evaluate(
    const std::vector<T>& elements) const {
  Dataset<T> data(lower_, upper_, elements);
  Released r = release(data, method_);
  Output out;
  switch (r.state) {
    case Released::State::kFinite: {
      DyadicRational s = r.value.scaled(scale_);
      if (!s.is_integer()) {
        throw UnsupportedError("brute force: output finer than the scale");
      }
      out.scaled = big_to_i128(s.floor());
      if constexpr (std::is_same_v<T, KInt>) {
        if (!cyclic_) break;
        BigInt m = lower_.format().modulus();
        BigInt w = s.floor() % m;
        if (w < 0) w += m;
        out.scaled = big_to_i128(w);
      }
      break;
    }
    case Released::State::kPosInf:
      out.state = Output::State::kPosInf;
      break;
    case Released::State::kNegInf:
      out.state = Output::State::kNegInf;
      break;
    case Released::State::kUndefined:
      out.state = Output::State::kUndefined;
      break;
  }
  return out;
}

template <class T>
const typename BruteForceTable<T>::Output& BruteForceTable<T>::output(
    uint64_t id) const {
  return outputs_[id];
}

template <class T>
std::vector<T> BruteForceTable<T>::decode(uint64_t id) const {
  uint64_t len = 0;
  while (len + 1 < offsets_.size() && offsets_[len + 1] <= id) ++len;
  uint64_t idx = id - offsets_[len];
  std::vector<T> out;
  const uint64_t base = domain_.size();
  for (uint64_t p = 0; p < len; ++p) {
    out.push_back(domain_[idx % base]);
    idx /= base;
  }
  return out;
}

template <class T>
void BruteForceTable<T>::add_to(Summary& s, uint64_t id) const {
  const Output& o = outputs_[id];
  if (s.count++ == 0) s.any_id = id;
  switch (o.state) {
    case Output::State::kUndefined:
      s.undefined = true;
      s.undefined_id = id;
      return;
    case Output::State::kPosInf:
      s.pos_inf = true;
      s.pos_inf_id = id;
      return;
    case Output::State::kNegInf:
      s.neg_inf = true;
      s.neg_inf_id = id;
      return;
    case Output::State::kFinite:
      break;
  }
  if (!s.any_finite) {
    s.any_finite = true;
    s.lo = s.hi = o.scaled;
    s.lo_id = s.hi_id = s.finite_id = id;
  } else {
    if (o.scaled < s.lo) {
      s.lo = o.scaled;
      s.lo_id = id;
    }
    if (o.scaled > s.hi) {
      s.hi = o.scaled;
      s.hi_id = id;
    }
  }
  if (cyclic_) {
    for (const auto& v : s.values) {
      if (v.first == o.scaled) return;
    }
    s.values.emplace_back(o.scaled, id);
  }
}

template <class T>
typename BruteForceTable<T>::Gap BruteForceTable<T>::gap_of(
    const Summary& s) const {
  Gap g;
  if (s.count < 2) return g;
  g.valid = true;
  if (s.undefined) {
    g.infinite = true;
    g.a = s.undefined_id;
    g.b = s.any_id != s.undefined_id ? s.any_id : s.undefined_id;
    return g;
  }
  int kinds = (s.any_finite ? 1 : 0) + (s.pos_inf ? 1 : 0) +
              (s.neg_inf ? 1 : 0);
  if (kinds >= 2) {
    g.infinite = true;
    std::vector<uint64_t> ids;
    if (s.any_finite) ids.push_back(s.finite_id);
    if (s.pos_inf) ids.push_back(s.pos_inf_id);
    if (s.neg_inf) ids.push_back(s.neg_inf_id);
    g.a = ids[0];
    g.b = ids[1];
    return g;
  }
  if (!s.any_finite) {
    g.a = g.b = s.any_id;
    return g;
  }
  if (!cyclic_) {
    g.value = s.hi - s.lo;
    g.a = s.lo_id;
    g.b = s.hi_id;
    return g;
  }
  u128 m = 0;
  if constexpr (std::is_same_v<T, KInt>) {
    m = static_cast<u128>(1) << lower_.format().bits();
  }
  g.a = g.b = s.values[0].second;
  for (size_t i = 0; i < s.values.size(); ++i) {
    for (size_t j = i + 1; j < s.values.size(); ++j) {
      i128 d = cyclic_i128(s.values[i].first, s.values[j].first, m);
      if (d > g.value) {
        g.value = d;
        g.a = s.values[i].second;
        g.b = s.values[j].second;
      }
    }
  }
  return g;
}

template <class T>
typename BruteForceTable<T>::Gap BruteForceTable<T>::pair_gap(
    uint64_t a, uint64_t b) const {
  Summary s;
  add_to(s, a);
  add_to(s, b);
  Gap g = gap_of(s);
  if (!g.valid) {
    g.valid = true;
    g.a = a;
    g.b = b;
  }
  if (!g.infinite && g.value == 0) {
    g.a = a;
    g.b = b;
  }
  return g;
}

template <class T>
template <class F>
void BruteForceTable<T>::for_each_ordering(std::vector<uint32_t> digits,
                                           F&& f) const {
  std::sort(digits.begin(), digits.end());
  const uint64_t base = domain_.size();
  do {
    uint64_t idx = 0;
    for (size_t p = digits.size(); p-- > 0;) idx = idx * base + digits[p];
    f(idx);
  } while (std::next_permutation(digits.begin(), digits.end()));
}

namespace {

// Calls f(digits) for every nondecreasing digit sequence of the given size
// over [0, base).
template <class F>
void for_each_multiset(uint64_t size, uint32_t base, F&& f) {
  std::vector<uint32_t> digits(size, 0);
  while (true) {
    f(digits);
    size_t p = size;
    while (p > 0 && digits[p - 1] + 1 == base) --p;
    if (p == 0) return;
    uint32_t next = digits[p - 1] + 1;
    for (size_t q = p - 1; q < size; ++q) digits[q] = next;
  }
}

}  // namespace

template <class T>
BruteForceResult<T> BruteForceTable<T>::sensitivity(Metric metric) const {
  const uint64_t base = domain_.size();
  const uint32_t base32 = static_cast<uint32_t>(base);
  Gap best;
  auto consider = [&best](const Gap& g) {
    if (better(g, best)) best = g;
  };
  switch (metric) {
    case Metric::kHam: {
      for (uint64_t p = 0; p < n_; ++p) {
        const uint64_t low = powers_[p];
        const uint64_t high = powers_[n_ - p - 1];
        for (uint64_t h = 0; h < high; ++h) {
          for (uint64_t l = 0; l < low; ++l) {
            uint64_t start = h * low * base + l;
            Summary s;
            for (uint64_t d = 0; d < base; ++d) {
              add_to(s, tuple_id(n_, start + d * low));
            }
            consider(gap_of(s));
          }
        }
      }
      break;
    }
    case Metric::kId: {
      for (uint64_t len = 0; len < n_; ++len) {
        for (uint64_t idx = 0; idx < powers_[len]; ++idx) {
          const uint64_t shorter = tuple_id(len, idx);
          for (uint64_t p = 0; p <= len; ++p) {
            // Insert digit d at position p: idx = hi * B^p + lo becomes
            // hi * B^(p+1) + d * B^p + lo.
            const uint64_t lo = idx % powers_[p];
            const uint64_t hi = idx / powers_[p];
            for (uint64_t d = 0; d < base; ++d) {
              uint64_t longer =
                  hi * powers_[p + 1] + d * powers_[p] + lo;
              consider(pair_gap(shorter, tuple_id(len + 1, longer)));
            }
          }
        }
      }
      break;
    }
    case Metric::kCo: {
      if (n_ == 0) break;
      for_each_multiset(n_ - 1, base32, [&](const std::vector<uint32_t>& h) {
        Summary s;
        std::vector<uint32_t> full(h);
        full.push_back(0);
        for (uint32_t a = 0; a < base32; ++a) {
          full.back() = a;
          for_each_ordering(full, [&](uint64_t idx) {
            add_to(s, tuple_id(n_, idx));
          });
        }
        consider(gap_of(s));
      });
      break;
    }
    case Metric::kSym: {
      for (uint64_t size = 0; size < n_; ++size) {
        for_each_multiset(size, base32, [&](const std::vector<uint32_t>& h) {
          Summary inner;
          for_each_ordering(h, [&](uint64_t idx) {
            add_to(inner, tuple_id(size, idx));
          });
          // Orderings of one histogram are at d_sym 0 from each other.
          consider(gap_of(inner));
          std::vector<uint32_t> full(h);
          full.push_back(0);
          for (uint32_t a = 0; a < base32; ++a) {
            Summary s = inner;
            full.back() = a;
            for_each_ordering(full, [&](uint64_t idx) {
              add_to(s, tuple_id(size + 1, idx));
            });
            consider(gap_of(s));
          }
        });
      }
      if (n_ > 0) {
        for_each_multiset(n_, base32, [&](const std::vector<uint32_t>& h) {
          Summary s;
          for_each_ordering(h, [&](uint64_t idx) {
            add_to(s, tuple_id(n_, idx));
          });
          consider(gap_of(s));
        });
      }
      break;
    }
  }
  return finish(best, metric);
}

template <class T>
BruteForceResult<T> BruteForceTable<T>::finish(const Gap& best,
                                               Metric metric) const {
  BruteForceResult<T> out;
  out.evaluations = evaluations_;
  out.bound.kind = BoundKind::kBruteForceExact;
  out.bound.modular = cyclic_;
  out.bound.source = "exhaustive search over " +
                     std::to_string(domain_.size()) + " values, n <= " +
                     std::to_string(n_) + ", " + to_string(metric);
  if (!best.valid) {
    out.bound.value = DyadicRational(0);
    return out;
  }
  if (!best.infinite) out.bound.value = from_i128(best.value, scale_);
  out.witness_u = decode(best.a);
  out.witness_v = decode(best.b);
  return out;
}

template <class T>
BruteForceResult<T> brute_force_sensitivity(const SensSpec<T>& spec,
                                            const BruteForceOptions& options) {
  validate(spec);
  if (!spec.n) throw InputError("n", "brute force needs n");
  Coupled c = couple(spec);
  BruteForceTable<T> table(spec.lower, spec.upper, *spec.n, c.method,
                           options);
  BruteForceResult<T> r = table.sensitivity(c.metric);
  if (c.metric != spec.metric) {
    r.bound.source += " (random permutation replaced by its coupling)";
  }
  return r;
}

// ---------------------------------------------------------------------------
// Attack lower bounds.

namespace {

template <class T>
struct Candidate {
  std::vector<Run<T>> u;
  std::vector<Run<T>> v;
};

template <class T>
uint64_t run_length(const std::vector<Run<T>>& runs) {
  uint64_t n = 0;
  for (const Run<T>& r : runs) n += r.count;
  return n;
}

// Candidates with no length restriction beyond the limit.
constexpr uint64_t kAttackLengthCap = 1 << 14;

void add_float_candidates(const SimFloat& lower, const SimFloat& upper,
                          uint64_t limit,
                          std::vector<Candidate<SimFloat>>& out) {
  const FloatFormat& f = lower.format();
  const int64_t k = f.k();
  DyadicRational lo = lower.to_exact(), hi = upper.to_exact();
  auto fits = [&](const DyadicRational& a, const DyadicRational& b) {
    return lo <= a && b <= hi;
  };
  auto take = [&](const FloatAttack& a) {
    out.push_back({a.u.runs(), a.v.runs()});
  };
  auto attempt = [&](auto&& make) {
    try {
      take(make());
    } catch (const PreconditionError&) {
    } catch (const VerificationError&) {
    }
  };
  // Float reorder: sizes 2^(k+1-a) + 2^(k+1-d).
  for (int64_t d = 1; d <= k + 1; ++d) {
    for (int64_t a = 0; a + d <= k + 1; ++a) {
      if (k + 1 - a >= 62 || k + 1 - d >= 62) continue;
      uint64_t size = (uint64_t{1} << (k + 1 - a)) +
                      (uint64_t{1} << (k + 1 - d));
      if (size - 1 > limit) continue;
      for (int64_t j = f.emin(); j + d <= f.emax(); ++j) {
        if (!fits(DyadicRational::pow2(j), DyadicRational::pow2(j + d))) {
          continue;
        }
        for (bool drop : {false, true}) {
          if (!drop && size > limit) continue;
          attempt([&] { return float_reorder_attack(f, j, a, d, drop); });
        }
      }
    }
  }
  // Rounding: n = 2^j + 1.
  for (int64_t j = 1; j < 62 && (uint64_t{1} << j) + 1 <= limit; ++j) {
    if (j > k) break;
    for (int64_t m = f.emin(); m <= f.emax(); ++m) {
      DyadicRational l =
          (DyadicRational(1) + DyadicRational::pow2(j - k - 1)) *
          DyadicRational::pow2(m);
      DyadicRational u = l + DyadicRational::pow2(m - k);
      if (!fits(l, u)) continue;
      attempt([&] { return rounding_attack(f, j, m); });
    }
  }
  // Repeated rounding I: length j * 2^k + 2, elements in [0, 2^(k+m)].
  if (k < 40) {
    for (int64_t j = 1; j <= k; ++j) {
      uint64_t size = static_cast<uint64_t>(j) * (uint64_t{1} << k) + 2;
      if (size > limit) break;
      for (int64_t m = f.emin(); m + k <= f.emax(); ++m) {
        if (!fits(DyadicRational(0), DyadicRational::pow2(k + m))) continue;
        attempt([&] { return repeated_rounding_attack_1(f, j, m); });
      }
    }
  }
  // Repeated rounding II: length 2^j.
  for (int64_t j = 2; j < 62 && (uint64_t{1} << j) <= limit; ++j) {
    for (int64_t a = f.emin(); a <= f.emax(); ++a) {
      // U = 2^a plus a small negative L; exact membership is checked when
      // the datasets are rebuilt with the spec's bounds.
      if (lo.sign() >= 0 || hi < DyadicRational::pow2(a)) continue;
      attempt([&] { return repeated_rounding_attack_2(f, j, a); });
    }
  }
}

void add_int_candidates(const KInt& lower, const KInt& upper, uint64_t limit,
                        std::vector<Candidate<KInt>>& out) {
  const IntFormat& f = lower.format();
  auto attempt = [&](auto&& make) {
    try {
      IntAttack a = make();
      out.push_back({a.u.runs(), a.v.runs()});
    } catch (const PreconditionError&) {
    } catch (const VerificationError&) {
    }
  };
  // A small spread of magnitudes: the bound itself and powers of two.
  auto spread = [](i128 top) {
    std::vector<i128> vals;
    if (top <= 0) return vals;
    vals.push_back(top);
    for (i128 p = 1; p < top && vals.size() < 130; p *= 2) vals.push_back(p);
    return vals;
  };
  if (f.overflow() == Overflow::kWraparound && lower.value() <= 0) {
    for (i128 u : spread(upper.value())) {
      i128 q = f.max_value() / u + 2;
      if (static_cast<u128>(q) > limit) continue;
      for (bool ham : {false, true}) {
        attempt([&] {
          return overflow_attack(f, KInt(f, 0), KInt(f, u), ham);
        });
      }
    }
  }
  if (f.overflow() == Overflow::kSaturating && lower.value() < 0 &&
      upper.value() > 0) {
    i128 span = f.max_value() - f.min_value();
    for (i128 u : spread(upper.value())) {
      for (i128 l : spread(-lower.value())) {
        i128 size = (span + l - 1) / l + (span + u - 1) / u;
        if (static_cast<u128>(size) > limit) continue;
        attempt([&] {
          return saturation_reorder_attack(f, KInt(f, -l), KInt(f, u));
        });
      }
    }
  }
}

}  // namespace

template <class T>
SensitivityBound attack_lower(const SensSpec<T>& spec) {
  validate(spec);
  Coupled c = couple(spec);
  const std::optional<BigInt> modulus = cyclic_modulus(spec.lower, c.method);
  const bool exact_length = requires_known_length(c.metric);
  uint64_t limit = spec.n ? *spec.n : kAttackLengthCap;
  limit = std::min(limit, kAttackLengthCap);

  std::vector<Candidate<T>> candidates;
  // Extreme-value pairs attaining the idealized sensitivity.
  {
    const uint64_t len = spec.n ? *spec.n : 1;
    if (exact_length) {
      if (len > 0) {
        std::vector<Run<T>> base_runs;
        if (len > 1) base_runs.push_back({spec.lower, len - 1});
        std::vector<Run<T>> a = base_runs, b = base_runs;
        a.push_back({spec.lower, 1});
        b.push_back({spec.upper, 1});
        candidates.push_back({a, b});
        std::vector<Run<T>> c2{{spec.upper, len - 1}}, d2 = c2;
        c2.push_back({spec.lower, 1});
        d2.push_back({spec.upper, 1});
        candidates.push_back({c2, d2});
      }
    } else if (limit > 0) {
      for (const T& x : {spec.lower, spec.upper}) {
        for (uint64_t fill : {uint64_t{0}, limit - 1}) {
          for (const T& y : {spec.lower, spec.upper}) {
            std::vector<Run<T>> a{{y, fill}}, b = a;
            b.push_back({x, 1});
            candidates.push_back({a, b});
          }
        }
      }
    }
  }
  if constexpr (std::is_same_v<T, SimFloat>) {
    add_float_candidates(spec.lower, spec.upper, limit, candidates);
  } else {
    add_int_candidates(spec.lower, spec.upper, limit, candidates);
  }

  SensitivityBound best;
  best.kind = BoundKind::kAttackLower;
  best.modular = modulus.has_value();
  best.value = DyadicRational(0);
  best.source = "no admissible pair";
  for (const Candidate<T>& cand : candidates) {
    try {
      Dataset<T> u(spec.lower, spec.upper, cand.u);
      Dataset<T> v(spec.lower, spec.upper, cand.v);
      if (exact_length) {
        if (u.size() != *spec.n || v.size() != *spec.n) continue;
      } else if (spec.n && (u.size() > *spec.n || v.size() > *spec.n)) {
        continue;
      }
      if (!distance(c.metric, u, v).at_most(1)) continue;
      std::optional<DyadicRational> d = released_distance(
          release(u, c.method), release(v, c.method), modulus);
      if (!d) {
        best.value.reset();
        best.source = "adjacent pair with an infinite or undefined output";
        return best;
      }
      if (*d > *best.value) {
        best.value = *d;
        best.source = "adjacent pair of lengths " + std::to_string(u.size()) +
                      " and " + std::to_string(v.size());
      }
    } catch (const PreconditionError&) {
      continue;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Recommendations.

template <class T>
std::vector<Recommendation<T>> recommend(const T& lower, const T& upper,
                                         Metric metric, bool n_known,
                                         std::optional<uint64_t> n,
                                         uint64_t seed) {
  std::vector<Recommendation<T>> out;
  const DyadicRational m = max_magnitude(lower, upper);
  auto consider = [&](SumMethod method, std::optional<uint64_t> spec_n,
                      std::string note) {
    SensSpec<T> spec{lower, upper, metric, spec_n, method};
    try {
      SensitivityBound b = implemented_sensitivity_bound(spec);
      Recommendation<T> r{method, b, std::nullopt, std::move(note)};
      if (b.value && !m.is_zero()) {
        r.factor = b.value->to_rational() / m.to_rational();
      }
      out.push_back(std::move(r));
    } catch (const PreconditionError&) {
    }
  };
  const std::optional<uint64_t> known =
      n_known ? n : std::optional<uint64_t>{};
  if (requires_known_length(metric) && !known) {
    throw InputError("n", to_string(metric) + " adjacency needs a known n");
  }
  auto permuted = [seed](SumMethod m) {
    m.transforms.insert(m.transforms.begin(),
                        Transform::random_permutation(seed));
    return m;
  };
  if constexpr (std::is_same_v<T, KInt>) {
    const IntFormat& f = lower.format();
    if (f.overflow() == Overflow::kWraparound) {
      consider(SumMethod{Algorithm::kIterative, Rounding::kBanker, false, {}},
               known,
               "add discrete Laplace noise modulo 2^k (modular noise "
               "addition); calibrate to the modular bound");
    }
    if (known && check_multiplication(lower, upper, *known)) {
      consider(SumMethod{Algorithm::kIterative, Rounding::kBanker, true, {}},
               known, "parameters pass check_multiplication for n = " +
                          std::to_string(*known));
    }
    if (f.overflow() == Overflow::kSaturating) {
      consider(SumMethod{Algorithm::kSplitInt, Rounding::kBanker, false, {}},
               known, "sum negatives and non-negatives separately with "
                      "saturating addition");
      consider(permuted(SumMethod{Algorithm::kIterative, Rounding::kBanker,
                                  false, {}}),
               known, "randomly permute, then sum with saturation");
    }
  } else {
    std::vector<Transform> prefix;
    std::optional<uint64_t> length = known;
    std::string truncation_note;
    if (!n_known && n) {
      truncation_note = "truncate to n_max = " + std::to_string(*n) + "; ";
    }
    auto shaped = [&](Algorithm a) {
      SumMethod method{a, Rounding::kBanker, false, {}};
      method.transforms.push_back(Transform::random_permutation(seed));
      if (!n_known && n) method.transforms.push_back(Transform::truncate(*n));
      return method;
    };
    if (n) {
      consider(shaped(Algorithm::kIterative), length,
               truncation_note + "randomly permute, then sum iteratively");
      consider(shaped(Algorithm::kPairwise), length,
               truncation_note + "randomly permute, then sum pairwise");
      consider(shaped(Algorithm::kKahan), length,
               truncation_note + "randomly permute, then Kahan summation");
    }
    SumMethod split{Algorithm::kSplitFloatRtz, Rounding::kRtz, false, {}};
    split.transforms.push_back(Transform::random_permutation(seed));
    consider(split, length,
             "randomly permute, then the RTZ split sum; no length bound "
             "needed");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Explicit instantiations.

template void validate(const SensSpec<SimFloat>&);
template void validate(const SensSpec<KInt>&);
template SensitivityBound idealized_sensitivity(const SensSpec<SimFloat>&);
template SensitivityBound idealized_sensitivity(const SensSpec<KInt>&);
template SensitivityBound implemented_sensitivity_bound(
    const SensSpec<SimFloat>&);
template SensitivityBound implemented_sensitivity_bound(const SensSpec<KInt>&);
template class BruteForceTable<SimFloat>;
template class BruteForceTable<KInt>;
template BruteForceResult<SimFloat> brute_force_sensitivity(
    const SensSpec<SimFloat>&, const BruteForceOptions&);
template BruteForceResult<KInt> brute_force_sensitivity(
    const SensSpec<KInt>&, const BruteForceOptions&);
template SensitivityBound attack_lower(const SensSpec<SimFloat>&);
template SensitivityBound attack_lower(const SensSpec<KInt>&);
template std::vector<Recommendation<SimFloat>> recommend(
    const SimFloat&, const SimFloat&, Metric, bool, std::optional<uint64_t>,
    uint64_t);
template std::vector<Recommendation<KInt>> recommend(
    const KInt&, const KInt&, Metric, bool, std::optional<uint64_t>, uint64_t);

}  // namespace bsum
