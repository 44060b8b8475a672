#include "bsum/summation.h"

#include <bit>
#include <map>
#include <utility>

#include "bsum/errors.h"
#include "bsum/metrics.h"
#include "bsum/rng.h"
#include "bsum/value_ops.h"

namespace bsum {

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kIterative:
      return "iterative";
    case Algorithm::kPairwise:
      return "pairwise";
    case Algorithm::kPairwiseLevelwise:
      return "pairwise_levelwise";
    case Algorithm::kKahan:
      return "kahan";
    case Algorithm::kSplitInt:
      return "split_int";
    case Algorithm::kSplitFloatRtz:
      return "split_float_rtz";
    case Algorithm::kExact:
      return "exact";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& text) {
  if (text == "iterative") return Algorithm::kIterative;
  if (text == "pairwise") return Algorithm::kPairwise;
  if (text == "pairwise_levelwise") return Algorithm::kPairwiseLevelwise;
  if (text == "kahan") return Algorithm::kKahan;
  if (text == "split_int") return Algorithm::kSplitInt;
  if (text == "split_float_rtz") return Algorithm::kSplitFloatRtz;
  // Resolved per element type by resolve_for_floats / resolve_for_ints.
  if (text == "split") return Algorithm::kSplitInt;
  if (text == "exact") return Algorithm::kExact;
  throw InputError("method", "unknown summation method '" + text + "'");
}

std::string Transform::to_string() const {
  switch (kind) {
    case Kind::kTruncate:
      return "truncate(" + std::to_string(n_max) + ")";
    case Kind::kRandomPermutation:
      return "rp(" + std::to_string(seed) + ")";
    case Kind::kShiftBounds:
      return "shift";
  }
  return "?";
}

const Transform* SumMethod::find(Transform::Kind kind) const {
  for (const Transform& t : transforms) {
    if (t.kind == kind) return &t;
  }
  return nullptr;
}

std::string SumMethod::to_string() const {
  std::string out;
  for (const Transform& t : transforms) out += t.to_string() + " -> ";
  out += bsum::to_string(algorithm);
  if (algorithm != Algorithm::kExact && algorithm != Algorithm::kSplitFloatRtz &&
      algorithm != Algorithm::kSplitInt) {
    out += "[" + bsum::to_string(rounding) + "]";
  }
  if (checked) out += " (checked)";
  return out;
}

SumMethod resolve_for_floats(SumMethod method) {
  if (method.algorithm == Algorithm::kSplitInt) {
    method.algorithm = Algorithm::kSplitFloatRtz;
  }
  if (method.algorithm == Algorithm::kSplitFloatRtz) {
    method.rounding = Rounding::kRtz;
  }
  if (method.checked) {
    throw UnsupportedError(
        "checked multiplication applies to integer formats only");
  }
  return method;
}

SumMethod resolve_for_ints(SumMethod method) {
  switch (method.algorithm) {
    case Algorithm::kPairwise:
    case Algorithm::kPairwiseLevelwise:
    case Algorithm::kKahan:
    case Algorithm::kSplitFloatRtz:
      throw UnsupportedError(bsum::to_string(method.algorithm) +
                             " summation applies to float formats only");
    default:
      return method;
  }
}

namespace {

// ---------------------------------------------------------------------------
// Run accumulation.

// 2-adic valuation of a nonzero finite float's value.
int64_t valuation(const SimFloat& x) {
  uint64_t sig = x.significand();
  return x.quantum_exponent() + std::countr_zero(sig);
}

// Integer coefficient c with x = c * 2^e, for e <= valuation(x).
i128 scaled_integer(const SimFloat& x, int64_t e) {
  if (x.is_zero()) return 0;
  uint64_t sig = x.significand();
  int tz = std::countr_zero(sig);
  i128 odd = static_cast<i128>(sig >> tz);
  i128 c = odd << (x.quantum_exponent() + tz - e);
  return x.negative() ? -c : c;
}

// Number of further additions of x to s (at most limit) whose results are
// all exactly representable, so they need no rounding. Both values are
// multiples of g = 2^(E - k) where E = min(emax, min valuation + k); every
// multiple of g below 2^(E + 1) in magnitude is a float, and the partial
// sums s + i x are such multiples until they leave that window.
uint64_t exact_steps(const SimFloat& s, const SimFloat& x, uint64_t limit,
                     int64_t* grid_exponent, i128* s_scaled, i128* x_scaled) {
  const FloatFormat& f = s.format();
  int64_t v = valuation(x);
  if (!s.is_zero()) v = std::min(v, valuation(s));
  int64_t big_e = std::min<int64_t>(f.emax(), v + f.k());
  int64_t g = big_e - f.k();
  // The window must already contain s.
  if (!s.is_zero() &&
      s.quantum_exponent() + static_cast<int64_t>(std::bit_width(s.significand())) - 1 >
          big_e) {
    return 0;
  }
  i128 sc = scaled_integer(s, g);
  i128 xc = scaled_integer(x, g);
  i128 bound = i128{1} << (f.k() + 1);
  i128 room = xc > 0 ? bound - sc : bound + sc;
  i128 step = xc > 0 ? xc : -xc;
  i128 steps = (room + step - 1) / step - 1;  // largest i with |s + i x| < B
  if (steps <= 0) return 0;
  *grid_exponent = g;
  *s_scaled = sc;
  *x_scaled = xc;
  return steps > static_cast<i128>(limit) ? limit : static_cast<uint64_t>(steps);
}

SimFloat accumulate_run(SimFloat s, const SimFloat& x, uint64_t count,
                        Rounding rounding) {
  if (x.is_zero()) return s;
  const RoundingMode mode = to_mode(rounding);
  while (count > 0) {
    if (s.is_finite()) {
      int64_t g;
      i128 sc, xc;
      uint64_t jump = exact_steps(s, x, count, &g, &sc, &xc);
      if (jump > 0) {
        i128 total = sc + static_cast<i128>(jump) * xc;
        bool neg = total < 0;
        s = round_scaled(s.format(), neg,
                         static_cast<u128>(neg ? -total : total), g,
                         RoundingMode::kTowardZero);
        count -= jump;
        continue;
      }
    }
    SimFloat next = add(s, x, mode);
    --count;
    if (next == s) return s;  // the sum no longer moves
    s = std::move(next);
  }
  return s;
}

KInt accumulate_run(const KInt& s, const KInt& x, uint64_t count, Rounding) {
  const IntFormat& f = s.format();
  BigInt total = s.to_big() + x.to_big() * BigInt(count);
  if (f.overflow() == Overflow::kWraparound) return KInt(f, wrap(f, total));
  // Every addend in a run has one sign, so clamping once at the end equals
  // clamping after each step.
  BigInt lo = KInt::min(f).to_big(), hi = KInt::max(f).to_big();
  if (total < lo) return KInt::min(f);
  if (total > hi) return KInt::max(f);
  return KInt::from_big(f, total);
}

SimFloat zero_like(const SimFloat& x) { return SimFloat::zero(x.format()); }
KInt zero_like(const KInt& x) { return KInt(x.format()); }

// ---------------------------------------------------------------------------
// Pairwise summation with memoization of single-run subtrees.

class PairwiseSummer {
 public:
  PairwiseSummer(const FloatDataset& v, Rounding rounding)
      : v_(v), mode_(to_mode(rounding)) {}

  SimFloat sum(uint64_t lo, uint64_t hi) {
    uint64_t n = hi - lo;
    if (n == 0) return SimFloat::zero(v_.format());
    size_t r = v_.run_index(lo);
    if (r == v_.run_index(hi - 1)) return uniform(r, n);
    uint64_t m = n / 2;
    SimFloat left = sum(lo, lo + m);
    SimFloat right = sum(lo + m, hi);
    return add(left, right, mode_);
  }

 private:
  // Pairwise sum of n copies of run r's value; depends only on n.
  SimFloat uniform(size_t r, uint64_t n) {
    if (n == 1) return v_.runs()[r].value;
    auto key = std::make_pair(r, n);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    uint64_t m = n / 2;
    SimFloat left = uniform(r, m);
    SimFloat right = uniform(r, n - m);
    SimFloat out = add(left, right, mode_);
    memo_.emplace(key, out);
    return out;
  }

  const FloatDataset& v_;
  RoundingMode mode_;
  std::map<std::pair<size_t, uint64_t>, SimFloat> memo_;
};

// ---------------------------------------------------------------------------
// Exact shifting.

SimFloat subtract_exact(const SimFloat& a, const SimFloat& b) {
  DyadicRational d = a.to_exact() - b.to_exact();
  if (!is_representable(d, a.format())) {
    throw PreconditionError("shift_bounds: " + describe(a) + " - " +
                            describe(b) + " is not exactly representable");
  }
  return SimFloat::exact(a.format(), d);
}

KInt subtract_exact(const KInt& a, const KInt& b) {
  BigInt d = a.to_big() - b.to_big();
  if (d < KInt::min(a.format()).to_big() || d > KInt::max(a.format()).to_big()) {
    throw PreconditionError("shift_bounds: " + a.to_string() + " - " +
                            b.to_string() + " does not fit the integer format");
  }
  return KInt::from_big(a.format(), d);
}

void check_float_algorithm(Algorithm a) {
  if (a == Algorithm::kSplitInt) {
    throw UnsupportedError("split_int applies to integer formats; use "
                           "split_float_rtz for floats");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

template <class T>
DyadicRational bs_exact(const Dataset<T>& v) {
  DyadicRational total;
  for (const Run<T>& r : v.runs()) {
    total += r.value.to_exact() * DyadicRational(BigInt(r.count), 0);
  }
  return total;
}

template <class T>
T bs_iterative(const Dataset<T>& v, Rounding rounding) {
  T s = zero_like(v.lower());
  for (const Run<T>& r : v.runs()) {
    s = accumulate_run(s, r.value, r.count, rounding);
  }
  return s;
}

SimFloat bs_pairwise(const FloatDataset& v, Rounding rounding) {
  PairwiseSummer summer(v, rounding);
  return summer.sum(0, v.size());
}

SimFloat bs_pairwise_levelwise(const FloatDataset& v, Rounding rounding) {
  if (v.empty()) return SimFloat::zero(v.format());
  const RoundingMode mode = to_mode(rounding);
  // Each level is kept in run form: a run of c copies of x contributes
  // floor(c / 2) copies of x + x, and an odd leftover pairs with the first
  // element of the next run.
  std::vector<Run<SimFloat>> level = v.runs();
  uint64_t n = v.size();
  while (n > 1) {
    std::vector<Run<SimFloat>> next;
    auto emit = [&next](SimFloat x, uint64_t count) {
      if (count == 0) return;
      if (!next.empty() && next.back().value == x) {
        next.back().count += count;
      } else {
        next.push_back({std::move(x), count});
      }
    };
    std::optional<SimFloat> pending;
    for (const Run<SimFloat>& r : level) {
      uint64_t count = r.count;
      if (pending) {
        emit(add(*pending, r.value, mode), 1);
        pending.reset();
        --count;
      }
      emit(add(r.value, r.value, mode), count / 2);
      if (count % 2 == 1) pending = r.value;
    }
    if (pending) emit(*pending, 1);  // an odd last element moves up unchanged
    level = std::move(next);
    n = (n + 1) / 2;
  }
  return level.front().value;
}

SimFloat bs_kahan(const FloatDataset& v, Rounding rounding) {
  const RoundingMode mode = to_mode(rounding);
  SimFloat sum = SimFloat::zero(v.format());
  SimFloat c = SimFloat::zero(v.format());
  for (const Run<SimFloat>& r : v.runs()) {
    const SimFloat& elt = r.value;
    for (uint64_t i = 0; i < r.count; ++i) {
      SimFloat y = add(elt, -c, mode);
      SimFloat t = add(sum, y, mode);
      SimFloat next_c = add(add(t, -sum, mode), -y, mode);
      bool steady = t == sum && next_c == c;
      sum = std::move(t);
      c = std::move(next_c);
      if (steady) break;  // the state is a fixed point for this value
    }
  }
  return sum;
}

KInt bs_split(const IntDataset& v) {
  KInt p(v.format()), n(v.format());
  for (const Run<KInt>& r : v.runs()) {
    if (r.value.is_negative_value()) {
      n = accumulate_run(n, r.value, r.count, Rounding::kBanker);
    } else {
      p = accumulate_run(p, r.value, r.count, Rounding::kBanker);
    }
  }
  return add(p, n);
}

SplitFloatResult bs_split_float_rtz(const FloatDataset& v) {
  SimFloat p = SimFloat::zero(v.format());
  SimFloat n = SimFloat::zero(v.format());
  for (const Run<SimFloat>& r : v.runs()) {
    if (r.value.is_negative_value()) {
      n = accumulate_run(n, r.value, r.count, Rounding::kRtz);
    } else {
      p = accumulate_run(p, r.value, r.count, Rounding::kRtz);
    }
  }
  SplitFloatResult out{SimFloat::zero(v.format())};
  if (p.is_inf()) {
    p = SimFloat::max_finite(v.format());
    out.clamped_positive = true;
  }
  if (n.is_inf()) {
    n = SimFloat::min_finite(v.format());
    out.clamped_negative = true;
  }
  out.value = add(p, n, Rounding::kBanker);
  return out;
}

template <class T>
Dataset<T> random_permutation(const Dataset<T>& v, uint64_t seed) {
  if (v.size() > kDefaultExpandGuard) {
    throw GuardExceededError("random permutation of " +
                             std::to_string(v.size()) + " elements");
  }
  std::vector<T> items;
  items.reserve(static_cast<size_t>(v.size()));
  for (const auto& [value, count] : histogram(v)) {
    for (uint64_t i = 0; i < count; ++i) items.push_back(value);
  }
  Rng rng(seed, 0, RngTag::kPermutation);
  shuffle(items, rng);
  return v.with_elements(items);
}

template <class T>
ShiftedDataset<T> shift_bounds(const Dataset<T>& v) {
  T width = subtract_exact(v.upper(), v.lower());
  Dataset<T> out(zero_like(v.lower()), width);
  for (const Run<T>& r : v.runs()) {
    out.push_back(subtract_exact(r.value, v.lower()), r.count);
  }
  return {std::move(out), v.size(), v.lower()};
}

bool check_multiplication(const KInt& lower, const KInt& upper, uint64_t n) {
  const IntFormat& f = lower.format();
  BigInt count(n);
  return upper.to_big() * count <= KInt::max(f).to_big() &&
         lower.to_big() * count >= KInt::min(f).to_big();
}

bool float_overflow_check(const SimFloat& lower, const SimFloat& upper,
                          uint64_t n, const DyadicRational& acc) {
  const FloatFormat& f = lower.format();
  DyadicRational count(BigInt(n), 0);
  SimFloat lo = round_directed(lower.to_exact() * count, f, false);
  SimFloat hi = round_directed(upper.to_exact() * count, f, true);
  if (lo.is_inf() || hi.is_inf()) return false;
  SimFloat lo2 = round_directed(lo.to_exact() - acc, f, false);
  SimFloat hi2 = round_directed(hi.to_exact() + acc, f, true);
  return !lo2.is_inf() && !hi2.is_inf();
}

template <class T>
Dataset<T> apply_transforms(const Dataset<T>& v, const SumMethod& method,
                            std::optional<ShiftedDataset<T>>* shift_info) {
  Dataset<T> cur = v;
  bool shifted = false;
  T offset = v.lower();
  for (const Transform& t : method.transforms) {
    switch (t.kind) {
      case Transform::Kind::kTruncate:
        cur = truncate(cur, t.n_max);
        break;
      case Transform::Kind::kRandomPermutation:
        cur = random_permutation(cur, t.seed);
        break;
      case Transform::Kind::kShiftBounds: {
        if (shifted) throw PreconditionError("shift_bounds applied twice");
        ShiftedDataset<T> s = shift_bounds(cur);
        offset = s.offset;
        cur = std::move(s.data);
        shifted = true;
        break;
      }
    }
  }
  if (shift_info != nullptr) {
    if (shifted) {
      shift_info->emplace(ShiftedDataset<T>{cur, cur.size(), offset});
    } else {
      shift_info->reset();
    }
  }
  return cur;
}

template <class T>
T sum_value(const Dataset<T>& v, const SumMethod& method) {
  if constexpr (std::is_same_v<T, SimFloat>) {
    check_float_algorithm(method.algorithm);
    switch (method.algorithm) {
      case Algorithm::kIterative:
        return bs_iterative(v, method.rounding);
      case Algorithm::kPairwise:
        return bs_pairwise(v, method.rounding);
      case Algorithm::kPairwiseLevelwise:
        return bs_pairwise_levelwise(v, method.rounding);
      case Algorithm::kKahan:
        return bs_kahan(v, method.rounding);
      case Algorithm::kSplitFloatRtz:
        return bs_split_float_rtz(v).value;
      default:
        break;
    }
  } else {
    switch (method.algorithm) {
      case Algorithm::kIterative:
        return bs_iterative(v, method.rounding);
      case Algorithm::kSplitInt:
        return bs_split(v);
      case Algorithm::kPairwise:
      case Algorithm::kPairwiseLevelwise:
      case Algorithm::kKahan:
      case Algorithm::kSplitFloatRtz:
        throw UnsupportedError(to_string(method.algorithm) +
                               " summation applies to float formats only");
      default:
        break;
    }
  }
  throw PreconditionError("sum_value: use bs_exact for the exact algorithm");
}

template <class T>
SumResult<T> run_sum(const Dataset<T>& v, const SumMethod& method) {
  std::optional<ShiftedDataset<T>> shift;
  Dataset<T> data = apply_transforms(v, method, &shift);
  SumResult<T> out;
  out.length = data.size();
  if (shift) {
    out.offset_count = shift->offset_count;
    out.offset = shift->offset;
  }
  if (method.checked) {
    if constexpr (std::is_same_v<T, KInt>) {
      if (!check_multiplication(data.lower(), data.upper(), data.size())) {
        throw PreconditionError(
            "checked multiplication: n * L or n * U leaves the integer range "
            "for n = " + std::to_string(data.size()));
      }
    } else {
      throw UnsupportedError(
          "checked multiplication applies to integer formats only");
    }
  }
  if (method.algorithm == Algorithm::kExact) {
    out.exact = bs_exact(data);
    return out;
  }
  if constexpr (std::is_same_v<T, SimFloat>) {
    if (method.algorithm == Algorithm::kSplitFloatRtz) {
      SplitFloatResult r = bs_split_float_rtz(data);
      out.clamped_positive = r.clamped_positive;
      out.clamped_negative = r.clamped_negative;
      out.value = r.value;
    } else {
      out.value = sum_value(data, method);
    }
  } else {
    out.value = sum_value(data, method);
  }
  if (is_finite_value(*out.value)) out.exact = out.value->to_exact();
  return out;
}

template <class T>
std::pair<SumResult<T>, uint64_t> shift_bounds_sum(const Dataset<T>& v,
                                                   const SumMethod& inner) {
  SumMethod m = inner;
  m.transforms.push_back(Transform::shift_bounds());
  SumResult<T> r = run_sum(v, m);
  return {r, *r.offset_count};
}

template DyadicRational bs_exact(const Dataset<SimFloat>&);
template DyadicRational bs_exact(const Dataset<KInt>&);
template SimFloat bs_iterative(const Dataset<SimFloat>&, Rounding);
template KInt bs_iterative(const Dataset<KInt>&, Rounding);
template Dataset<SimFloat> random_permutation(const Dataset<SimFloat>&, uint64_t);
template Dataset<KInt> random_permutation(const Dataset<KInt>&, uint64_t);
template ShiftedDataset<SimFloat> shift_bounds(const Dataset<SimFloat>&);
template ShiftedDataset<KInt> shift_bounds(const Dataset<KInt>&);
template Dataset<SimFloat> apply_transforms(
    const Dataset<SimFloat>&, const SumMethod&,
    std::optional<ShiftedDataset<SimFloat>>*);
template Dataset<KInt> apply_transforms(const Dataset<KInt>&, const SumMethod&,
                                        std::optional<ShiftedDataset<KInt>>*);
template SimFloat sum_value(const Dataset<SimFloat>&, const SumMethod&);
template KInt sum_value(const Dataset<KInt>&, const SumMethod&);
template SumResult<SimFloat> run_sum(const Dataset<SimFloat>&, const SumMethod&);
template SumResult<KInt> run_sum(const Dataset<KInt>&, const SumMethod&);
template std::pair<SumResult<SimFloat>, uint64_t> shift_bounds_sum(
    const Dataset<SimFloat>&, const SumMethod&);
template std::pair<SumResult<KInt>, uint64_t> shift_bounds_sum(
    const Dataset<KInt>&, const SumMethod&);

}  // namespace bsum
