// Sensitivities of bounded sums: the idealized values over exact
// arithmetic, proven upper bounds for implemented methods, an exhaustive
// brute-force oracle for tiny formats, lower bounds from concrete adjacent
// pairs, and a recommender that ranks safe configurations.
//
// All bound arithmetic is exact (dyadic rationals and unbounded integers).
// Conversion to a float happens only when a mechanism calibrates its noise,
// and rounds up there.

#ifndef BSUM_SENSITIVITY_H_
#define BSUM_SENSITIVITY_H_

#include <cstdint>
#include <map>
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

// What is being bounded: the bounded sum over [L, U] computed by method,
// with adjacency measured by metric. For co/ham, n is the dataset length;
// for sym/id it is optional and, when present, caps the dataset length.
template <class T>
struct SensSpec {
  T lower;
  T upper;
  Metric metric;
  std::optional<uint64_t> n;
  SumMethod method;

  const typename T::Format& format() const { return lower.format(); }
};

using FloatSensSpec = SensSpec<SimFloat>;
using IntSensSpec = SensSpec<KInt>;

// Throws InputError for inconsistent specs: bounds in different formats,
// non-finite bounds, L > U, or co/ham without n.
template <class T>
void validate(const SensSpec<T>& spec);

enum class BoundKind {
  kIdealized,
  kImplementedUpper,
  kAttackLower,
  kBruteForceExact,
  kModular,
};

std::string to_string(BoundKind kind);

struct SensitivityBound {
  // Absent when the sensitivity is unbounded (an output can be infinite
  // or undefined on one side of an adjacent pair).
  std::optional<DyadicRational> value;
  BoundKind kind;
  // Which result the value comes from, in words.
  std::string source;
  // Distances between outputs are measured cyclically, mod 2^k.
  bool modular = false;

  bool is_infinite() const { return !value.has_value(); }
};

// True iff a <= b, treating an absent value as +infinity.
bool bound_le(const SensitivityBound& a, const SensitivityBound& b);

// max{|L|, U} for sym/id and U - L for co/ham.
template <class T>
SensitivityBound idealized_sensitivity(const SensSpec<T>& spec);

// Integer wraparound formats: min{floor(2^k / 2), idealized}, computed in
// unbounded integers so |L| cannot itself overflow.
SensitivityBound modular_sensitivity_bound(const IntSensSpec& spec);

// Worst-case |BS*(u) - BS_exact(u)| over datasets of length at most n with
// elements in [L, U], for float algorithms. With t = 2^-(k+1) under
// banker's rounding and t = 2^-k under round-toward-zero, and
// M = max{|L|, U}:
//   iterative: n^2 * t * M
//   pairwise (both tree shapes): c * t / (1 - c * t) * n * M with
//     c = ceil(log2 n); requires n < 2^k and c * t < 1/2
//   Kahan: (2 t + kKahanConstant * n * t^2) * n * M; requires n < 2^k
//   exact: 0
// Throws UnsupportedError for other algorithms and PreconditionError when a
// requirement on n fails.
inline constexpr int kKahanConstant = 8;
DyadicRational accuracy_bound(Algorithm algorithm, Rounding rounding,
                              uint64_t n, const FloatFormat& format,
                              const SimFloat& lower, const SimFloat& upper);

// Proven upper bound on the implemented sensitivity. Dispatch:
//   shift_bounds (co/ham only): the bound for [0, U - L];
//   checked integers or the exact algorithm: idealized;
//   integer wraparound: modular bound (kind kModular);
//   saturating split: idealized; saturating iterative: idealized for
//     ordered metrics (or unordered ones made ordered by a random
//     permutation), else the format's full range max - min;
//   float iterative / pairwise / Kahan: idealized + 2 * accuracy_bound,
//     which needs a length bound (n or truncation) and a passing
//     float_overflow_check;
//   float RTZ split: the explicit power-of-two bounds, for id (unknown n)
//     and ham (known n), with a random permutation for sym / co.
// Truncation to n_max under id adjacency yields truncated pairs that are
// either id-adjacent or ham-adjacent at length n_max, so the bound is the
// larger of the two. Truncating unordered data requires a random
// permutation before the truncation. Throws UnsupportedError for
// combinations no result covers.
template <class T>
SensitivityBound implemented_sensitivity_bound(const SensSpec<T>& spec);

// The split + RTZ bounds on their own, with the coarse corollaries.
struct SplitRtzBound {
  DyadicRational value;   // explicit power-of-two expression
  DyadicRational coarse;  // 3 * max{U, |L|} or 5 * max{U, |L|}
};
SplitRtzBound split_rtz_bound_unknown_n(const SimFloat& lower,
                                        const SimFloat& upper);
SplitRtzBound split_rtz_bound_known_n(const SimFloat& lower,
                                      const SimFloat& upper, uint64_t n);

// ---------------------------------------------------------------------------
// Exhaustive oracle.

struct BruteForceOptions {
  // Maximum number of BS* evaluations (datasets summed).
  uint64_t guard = 10'000'000;
};

template <class T>
struct BruteForceResult {
  SensitivityBound bound;
  // An adjacent pair attaining the bound.
  std::vector<T> witness_u;
  std::vector<T> witness_v;
  uint64_t evaluations = 0;
};

// Evaluates the method on every dataset over the finite domain [L, U] of
// every relevant length (exactly n for co/ham, 0..n for sym/id; n is
// required) and takes the maximum output distance over all adjacent pairs.
// A random permutation in the method is replaced by its coupling: the
// permutation is dropped and sym/co become id/ham. Wraparound integer
// outputs are compared with the cyclic distance. Throws GuardExceededError
// when the search space exceeds options.guard.
template <class T>
BruteForceResult<T> brute_force_sensitivity(const SensSpec<T>& spec,
                                            const BruteForceOptions& options = {});

// Evaluation table shared by several metrics over one (L, U, n, method):
// sums each dataset once, then answers sensitivity queries per metric.
template <class T>
class BruteForceTable {
 public:
  // Datasets of lengths 0..n over [L, U], summed with method (which must
  // not contain a random permutation; see brute_force_sensitivity).
  BruteForceTable(const T& lower, const T& upper, uint64_t n,
                  const SumMethod& method,
                  const BruteForceOptions& options = {});

  // Maximum over pairs adjacent under metric. For co/ham only datasets of
  // length exactly n are compared; for sym/id all lengths 0..n.
  BruteForceResult<T> sensitivity(Metric metric) const;

  uint64_t evaluations() const { return evaluations_; }
  size_t domain_size() const { return domain_.size(); }

  // One evaluated output: a finite value scaled to an integer, an infinity,
  // or undefined (the method raised ArithmeticError).
  struct Output {
    enum class State : uint8_t { kFinite, kPosInf, kNegInf, kUndefined };
    State state = State::kFinite;
    i128 scaled = 0;
  };

 private:
  struct Summary;

  struct Gap;

  Output evaluate(const std::vector<T>& elements) const;
  // Global tuple ids number the datasets of all lengths consecutively.
  uint64_t tuple_id(uint64_t length, uint64_t index) const {
    return offsets_[length] + index;
  }
  const Output& output(uint64_t id) const;
  std::vector<T> decode(uint64_t id) const;
  void add_to(Summary& s, uint64_t id) const;
  Gap gap_of(const Summary& s) const;
  Gap pair_gap(uint64_t a, uint64_t b) const;
  // Calls f(index) for every distinct ordering of a sorted digit multiset.
  template <class F>
  void for_each_ordering(std::vector<uint32_t> digits, F&& f) const;
  BruteForceResult<T> finish(const Gap& best, Metric metric) const;

  T lower_;
  T upper_;
  uint64_t n_;
  SumMethod method_;
  bool cyclic_;
  int64_t scale_;
  std::vector<T> domain_;
  std::vector<uint64_t> powers_;   // |D|^i
  std::vector<uint64_t> offsets_;  // first global id of each length
  std::vector<Output> outputs_;    // by global id
  uint64_t evaluations_ = 0;
};

// ---------------------------------------------------------------------------
// Lower bounds.

// Maximum output distance over a fixed family of genuinely adjacent pairs:
// the extreme-value pairs that attain the idealized sensitivity, plus every
// attack construction in the same format whose datasets fit the spec
// (elements in [L, U], admissible lengths, adjacent under the metric). The
// method is treated as in brute_force_sensitivity, so the result never
// exceeds the brute-force value for the same spec.
template <class T>
SensitivityBound attack_lower(const SensSpec<T>& spec);

// ---------------------------------------------------------------------------
// Recommendations.

template <class T>
struct Recommendation {
  SumMethod method;
  // Implemented-sensitivity bound under the recommended method.
  SensitivityBound bound;
  // bound / max{|L|, U}, or absent when that is zero or the bound infinite.
  std::optional<BigRational> factor;
  // Extra steps the method needs (modular noise, parameter checks, ...).
  std::string note;
};

// Ordered safe configurations for summing values of [L, U] under metric.
// n is the known length when n_known, else a planned truncation length
// n_max (absent: no truncation possible). Candidates whose bound cannot be
// established are omitted.
//   Integers: wraparound formats lead with modular noise addition; then
//     checked parameters when n is known and n * L, n * U fit; then the
//     split sum with saturation; then a random permutation with the
//     saturating iterative sum.
//   Floats: truncation + random permutation + iterative, then pairwise and
//     Kahan in the same shape, then the RTZ split with a random permutation.
template <class T>
std::vector<Recommendation<T>> recommend(const T& lower, const T& upper,
                                         Metric metric, bool n_known,
                                         std::optional<uint64_t> n,
                                         uint64_t seed = 0);

}  // namespace bsum

#endif  // BSUM_SENSITIVITY_H_
