// Constructive generators for adjacent dataset pairs on which a bounded-sum
// implementation moves much further than its idealized sensitivity allows,
// plus a verifier that runs the emulated arithmetic on both datasets.
//
// Every generator takes the construction's free parameters explicitly and
// validates each precondition up front; nothing is clamped silently. Large
// instances stay in run-length form, so building and summing them costs
// time proportional to the number of runs rather than the number of
// elements.

#ifndef BSUM_ATTACKS_H_
#define BSUM_ATTACKS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bsum/dataset.h"
#include "bsum/dyadic.h"
#include "bsum/kint.h"
#include "bsum/metrics.h"
#include "bsum/sim_float.h"
#include "bsum/summation.h"

namespace bsum {

template <class T>
struct AttackInstance {
  // Generator name as accepted by the CLI ("overflow", "rounding", ...).
  std::string name;
  // One-line statement of the claim the pair demonstrates.
  std::string claim;
  Dataset<T> u;
  Dataset<T> v;
  Metric metric;
  // distance(metric, u, v); 0 for pure reorderings.
  uint64_t adjacency_distance = 0;
  // Lower bound on |BS*(u) - BS*(v)| under native_method.
  DyadicRational predicted_gap;
  // Idealized sensitivity of the bounded sum for (L, U, metric).
  DyadicRational idealized;
  // predicted_gap / idealized.
  BigRational blowup;
  // The summation the construction targets.
  SumMethod native_method;
  // Free parameters in the order they were given, for reports.
  std::vector<std::pair<std::string, std::string>> parameters;
};

using IntAttack = AttackInstance<KInt>;
using FloatAttack = AttackInstance<SimFloat>;

// Iterative sum with wraparound addition, L = 0, U >= 1. With
// n = ceil(max / U) + 1, u = [U x (n - 2), M] sums to max and v = u + [1]
// wraps to min, a gap of 2^k - 1. d_id(u, v) = 1. With ham_variant, u gets
// a trailing 0 so both have length n and d_ham(u, v) = 1.
IntAttack overflow_attack(const IntFormat& format, const KInt& lower,
                          const KInt& upper, bool ham_variant = false);

// Iterative sum with saturating signed addition, L < 0 < U. u = [L x b,
// U x c] and v = [U x c, L x b] with b = ceil((max - min) / |L|) and
// c = ceil((max - min) / U): u saturates low then high, v the reverse, so
// the gap is 2^k - 1 although the histograms agree.
IntAttack saturation_reorder_attack(const IntFormat& format, const KInt& lower,
                                    const KInt& upper);

// Iterative banker's sum over floats: L = 2^j, U = 2^(j + d),
// u = [L x b, U x c] and v = [U x c, L x b] with b = 2^(k + 1 - a) and
// c = 2^(k + 1 - d). Summing the large values first makes every later L
// vanish, for a gap of at least 2^((k + 1) - (a + d)) * U. With drop_last,
// the final element of v is removed, giving a pair at d_sym = 1 instead of
// a pure reordering.
FloatAttack float_reorder_attack(const FloatFormat& format, int64_t j,
                                 int64_t a, int64_t d, bool drop_last = false);

// Iterative banker's sum over floats with n = 2^j + 1,
// L = (1 + 2^(j - k - 1)) * 2^m and U = L + 2^(m - k): u = [L x 2^j, U] and
// v = [L x (2^j + 1)] differ in one position, and the final addition rounds
// them 2^(j + m - k) = 2^j * (U - L) apart. One rounding causes the whole
// gap, so compensated and pairwise summation keep it.
FloatAttack rounding_attack(const FloatFormat& format, int64_t j, int64_t m);

// Iterative banker's sum over floats with L = 0 and U = 2^(k + m). The
// staircase f(x) = (2^x + 2^(x - k)) * 2^m, repeated 2^k times for each of
// x = 0 .. j - 1, is prefixed by [U, U] in u and by [U] in v. Every
// addition then rounds up in u and down in v, so the gap doubles with each
// step of the staircase and reaches 2^(k + j + m).
FloatAttack repeated_rounding_attack_1(const FloatFormat& format, int64_t j,
                                       int64_t m);

// Iterative banker's sum over floats with n = 2^j, h = n / 2, U = 2^a,
// L = -(U * h / 2^k) * (1/2 - 1/2^k) and x = (U * h / 2^k) * (1/2 + 1/2^k).
// u = [U x h, x, L, x, L, ...] with h alternating terms and v drops one U.
// In u each x rounds up by a full ulp and each L rounds away, while in v
// each (x, L) pair cancels, for a gap of n^2 / 2^(k + 3) * U + U.
FloatAttack repeated_rounding_attack_2(const FloatFormat& format, int64_t j,
                                       int64_t a);

// The predicted gap of repeated_rounding_attack_2 in closed form, after the
// same precondition checks. Usable at parameters whose datasets are too
// large to build (the alternating tail has no long runs).
DyadicRational repeated_rounding_2_gap(const FloatFormat& format, int64_t j,
                                      int64_t a);

// Outcome of summing both datasets of an instance.
struct RealizedGap {
  // |BS*(u) - BS*(v)|; absent when exactly one side is infinite or the
  // sides are infinities of opposite sign.
  std::optional<DyadicRational> gap;
  std::string sum_u;  // describe() of each result
  std::string sum_v;
  // Midpoint of the two results when both are finite; the default
  // threshold for distinguishing experiments.
  std::optional<DyadicRational> midpoint;
};

template <class T>
RealizedGap realized_gap(const AttackInstance<T>& instance,
                         const SumMethod& method);

// realized_gap, and throws VerificationError when method is the instance's
// native method and the realized gap falls short of predicted_gap.
template <class T>
RealizedGap verify_attack(const AttackInstance<T>& instance,
                          const SumMethod& method);

bool same_method(const SumMethod& a, const SumMethod& b);

}  // namespace bsum

#endif  // BSUM_ATTACKS_H_
