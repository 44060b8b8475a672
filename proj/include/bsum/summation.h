// Bounded-sum implementations over emulated arithmetic and the dataset
// transforms that precede them.
//
// Algorithms: iterative (left-to-right fold), pairwise (recursive halving
// at floor(n/2)), level-wise pairwise (adjacent elements paired level by
// level, an odd last element carried up unchanged), Kahan (compensated), split (negatives and non-negatives
// accumulated separately; for floats with round-toward-zero partials and a
// single banker's combine), and exact (the real-valued sum as a dyadic).
// Transforms: truncation to the first n_max elements, a seeded random
// permutation, and shifting the bounds to [0, U - L].
//
// All algorithms consume the run-length form directly. Long runs are
// accelerated without changing results: integer runs use closed forms, and
// float runs skip stretches where every partial sum is exactly
// representable (so no rounding happens) or where the sum has stopped
// changing.

#ifndef BSUM_SUMMATION_H_
#define BSUM_SUMMATION_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bsum/dataset.h"
#include "bsum/dyadic.h"
#include "bsum/kint.h"
#include "bsum/sim_float.h"

namespace bsum {

enum class Algorithm {
  kIterative,
  kPairwise,
  kPairwiseLevelwise,
  kKahan,
  kSplitInt,
  kSplitFloatRtz,
  kExact,
};

std::string to_string(Algorithm algorithm);
// Accepts the names above in snake case ("split_float_rtz"); "split" is
// accepted too and resolved by element type in resolve_split().
Algorithm parse_algorithm(const std::string& text);

struct Transform {
  enum class Kind { kTruncate, kRandomPermutation, kShiftBounds };

  Kind kind;
  uint64_t n_max = 0;  // truncate
  uint64_t seed = 0;   // random permutation

  static Transform truncate(uint64_t n_max) {
    return {Kind::kTruncate, n_max, 0};
  }
  static Transform random_permutation(uint64_t seed) {
    return {Kind::kRandomPermutation, 0, seed};
  }
  static Transform shift_bounds() { return {Kind::kShiftBounds, 0, 0}; }

  std::string to_string() const;
};

struct SumMethod {
  Algorithm algorithm = Algorithm::kIterative;
  Rounding rounding = Rounding::kBanker;
  // Integer sums whose parameters were verified by check_multiplication.
  // run_sum re-verifies against the actual length and refuses otherwise.
  bool checked = false;
  std::vector<Transform> transforms;

  const Transform* find(Transform::Kind kind) const;
  bool has(Transform::Kind kind) const { return find(kind) != nullptr; }
  // The rounding actually used by the partial sums.
  Rounding effective_rounding() const {
    return algorithm == Algorithm::kSplitFloatRtz ? Rounding::kRtz : rounding;
  }
  std::string to_string() const;
};

// Maps a generic split request to the variant for the element type and
// rejects algorithms that do not apply to it (pairwise, Kahan and the RTZ
// split are float-only; the integer split is integer-only).
SumMethod resolve_for_floats(SumMethod method);
SumMethod resolve_for_ints(SumMethod method);

// ---------------------------------------------------------------------------
// Core algorithms.

template <class T>
DyadicRational bs_exact(const Dataset<T>& v);

template <class T>
T bs_iterative(const Dataset<T>& v, Rounding rounding);

SimFloat bs_pairwise(const FloatDataset& v, Rounding rounding);
// Pairs (u1 + u2), (u3 + u4), ... and repeats on the results. Same tree as
// bs_pairwise when n is a power of two; otherwise an odd trailing element
// is added only at the level where it meets a partner, so for n = 2^j + 1
// it is added last.
SimFloat bs_pairwise_levelwise(const FloatDataset& v, Rounding rounding);
SimFloat bs_kahan(const FloatDataset& v, Rounding rounding);

// Integer split: P + N with the format's addition.
KInt bs_split(const IntDataset& v);

struct SplitFloatResult {
  SimFloat value;
  bool clamped_positive = false;  // P overflowed and was set to max
  bool clamped_negative = false;  // N overflowed and was set to min
};
SplitFloatResult bs_split_float_rtz(const FloatDataset& v);
inline SimFloat bs_split(const FloatDataset& v) {
  return bs_split_float_rtz(v).value;
}

// ---------------------------------------------------------------------------
// Transforms.

template <class T>
Dataset<T> truncate(const Dataset<T>& v, uint64_t n_max) {
  return v.prefix(n_max);
}

// Uniformly random permutation driven by the seeded generator. The input
// is first put in canonical (sorted) order, so the output depends only on
// the histogram and the seed: datasets with equal histograms receive equal
// outputs under equal seeds.
template <class T>
Dataset<T> random_permutation(const Dataset<T>& v, uint64_t seed);

template <class T>
struct ShiftedDataset {
  Dataset<T> data;        // elements v_i - L, bounds [0, U - L]
  uint64_t offset_count;  // n; the caller adds L * n after noising
  T offset;               // L
};

// Throws PreconditionError when U - L or any v_i - L is not exactly
// representable in the element format.
template <class T>
ShiftedDataset<T> shift_bounds(const Dataset<T>& v);

// ---------------------------------------------------------------------------
// Parameter checks.

// True iff U * n and L * n, computed exactly, lie in the format's range.
bool check_multiplication(const KInt& lower, const KInt& upper, uint64_t n);

// Rejects float parameters whose sums could overflow even allowing an error
// of acc: with L' = round_down(L * n) and U' = round_up(U * n), requires
// round_down(L' - acc) > -inf and round_up(U' + acc) < +inf.
bool float_overflow_check(const SimFloat& lower, const SimFloat& upper,
                          uint64_t n, const DyadicRational& acc);

// ---------------------------------------------------------------------------
// Full pipeline: transforms in order, then the algorithm.

template <class T>
struct SumResult {
  // Computed value; absent for the exact algorithm.
  std::optional<T> value;
  // Exact value of the result when finite (for the exact algorithm, the
  // real sum itself).
  std::optional<DyadicRational> exact;
  bool clamped_positive = false;
  bool clamped_negative = false;
  uint64_t length = 0;  // elements summed, after transforms
  // Present when shift_bounds ran: the reported sum excludes L * n.
  std::optional<uint64_t> offset_count;
  std::optional<T> offset;

  bool is_infinite() const { return !exact.has_value(); }
};

template <class T>
Dataset<T> apply_transforms(const Dataset<T>& v, const SumMethod& method,
                            std::optional<ShiftedDataset<T>>* shift_info);

template <class T>
SumResult<T> run_sum(const Dataset<T>& v, const SumMethod& method);

// The algorithm alone, ignoring transforms and the checked flag. Returns
// the computed value; for the exact algorithm use bs_exact.
template <class T>
T sum_value(const Dataset<T>& v, const SumMethod& method);

// shift_bounds followed by the inner method.
template <class T>
std::pair<SumResult<T>, uint64_t> shift_bounds_sum(const Dataset<T>& v,
                                                   const SumMethod& inner);

}  // namespace bsum

#endif  // BSUM_SUMMATION_H_
