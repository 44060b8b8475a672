// Noise mechanisms on top of bounded sums, a harness that tries to tell
// two adjacent datasets apart from noisy releases, and an exact privacy
// check for integer mechanisms with finite output support.
//
// The continuous Laplace path samples and adds noise in floating point. It
// exists to reproduce how deployed libraries behave and makes no privacy
// claim of its own. Every privacy verdict in this module uses discrete
// noise, added either exactly, modulo 2^k, or with saturation.

#ifndef BSUM_MECHANISM_H_
#define BSUM_MECHANISM_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "bsum/attacks.h"
#include "bsum/dataset.h"
#include "bsum/dyadic.h"
#include "bsum/kint.h"
#include "bsum/rng.h"
#include "bsum/sensitivity.h"
#include "bsum/sim_float.h"
#include "bsum/summation.h"

namespace bsum {

enum class NoiseKind {
  // Continuous Laplace, sampled as a double, rounded into the sum's float
  // format and added with the sum's rounding. Floats only.
  kLaplace,
  // Discrete Laplace on the grid 2^grid_log2, added exactly.
  kDiscreteLaplace,
  // Discrete Laplace added modulo 2^k. Wraparound integers only.
  kDiscreteLaplaceMod,
  // Discrete Laplace added with saturation at the format's extremes.
  // Integers only. This is the non-modular addition that breaks privacy
  // when the sum itself wrapped.
  kDiscreteLaplaceSaturating,
};

std::string to_string(NoiseKind kind);
NoiseKind parse_noise_kind(const std::string& text);

// Z with Pr[Z = z] proportional to exp(-|z| / scale), as the difference of
// two geometric draws, each sampled by inversion from one uniform double.
// Requires 0 < scale <= 2^57.
int64_t sample_discrete_laplace(double scale, Rng& rng);
int64_t sample_discrete_laplace(double scale, uint64_t seed);

// Continuous Laplace as the difference of two exponential draws.
double sample_laplace(double scale, Rng& rng);

// (value + noise) mod 2^k, in the format's range. Requires a wraparound
// format.
KInt modular_noise_add(const KInt& value, const BigInt& noise);
// value + noise clamped to [min, max] of the format.
KInt saturating_noise_add(const KInt& value, const BigInt& noise);

template <class T>
struct MechanismSpec {
  T lower;
  T upper;
  SumMethod method;
  NoiseKind noise = NoiseKind::kDiscreteLaplace;
  // Laplace scale lambda, in units of the released value.
  DyadicRational scale;
  // Discrete noise takes values Z * 2^grid_log2, with Z discrete Laplace
  // of scale lambda / 2^grid_log2. Integers use 0.
  int64_t grid_log2 = 0;
  // The bound the scale was derived from, when calibrated.
  std::optional<SensitivityBound> calibration;
  std::optional<double> epsilon;
};

// Number of grid steps per unit of scale for discrete noise on floats.
inline constexpr int64_t kFloatNoiseGridBits = 40;

// scale = bound / epsilon, rounded up to a dyadic. For floats the grid is
// 2^(floor(log2 scale) - kFloatNoiseGridBits). Throws PreconditionError
// for an infinite or zero bound, or a non-positive epsilon.
template <class T>
MechanismSpec<T> calibrate(const T& lower, const T& upper,
                           const SumMethod& method, NoiseKind noise,
                           const SensitivityBound& bound, double epsilon);

struct MechanismOutput {
  enum class State { kFinite, kPosInf, kNegInf };
  State state = State::kFinite;
  DyadicRational value;

  std::string describe() const;
};

// BS*(dataset) plus noise drawn from Rng(seed, 0, kNoise). A noise
// override (in output units) replaces the draw, for tests and for
// reproducing a specific release. ArithmeticError from the sum
// propagates.
template <class T>
MechanismOutput run_mechanism(const MechanismSpec<T>& spec,
                              const Dataset<T>& dataset, uint64_t seed,
                              std::optional<DyadicRational> noise_override = {});

// ---------------------------------------------------------------------------
// Distinguishing experiments.

enum class LikelihoodMode {
  // Probability of an outcome at least as extreme as the observed counts:
  // P[X_u >= a] * P[X_v <= b] (or the mirror image), as in hand
  // computations that bound "results this separated".
  kTail,
  // Probability of the observed outcome sequence,
  // p_u^a (1 - p_u)^(N - a) p_v^b (1 - p_v)^(M - b).
  kSequence,
};

// counts[d][o]: number of trials on dataset d (0 = u, 1 = v) whose
// post-processed outcome was o.
using OutcomeCounts = std::array<std::array<uint64_t, 2>, 2>;

// log2 of the largest probability of the observed counts under any pair of
// outcome probabilities (p_u, p_v) an epsilon-DP mechanism could have:
// p_u <= e^eps p_v, p_v <= e^eps p_u, and the same for 1 - p_u, 1 - p_v.
// The feasible p_v for a given p_u is an interval and the objective is
// separable and unimodal in p_v, so the inner maximum is a clamp; the
// outer maximum uses a grid with refinement down to a step of 1e-6.
double dp_violation_log2_bound(const OutcomeCounts& counts, double epsilon,
                               LikelihoodMode mode = LikelihoodMode::kTail);

// Verdicts compare the bound against log2 of this significance level.
inline constexpr double kVerdictAlpha = 0.01;

struct ExperimentReport {
  uint64_t trials = 0;
  OutcomeCounts counts{};
  DyadicRational threshold;
  double epsilon = 0;
  double log2_bound = 0;
  LikelihoodMode mode = LikelihoodMode::kTail;
  // "inconsistent-with-epsilon" when log2_bound < log2(kVerdictAlpha),
  // else "consistent-with-epsilon".
  std::string verdict;
  uint64_t master_seed = 0;
};

// Runs the mechanism trials times on each dataset of the instance. Trial i
// on dataset d uses the seed stream (master_seed, 2 i + d). The outcome is
// 1 iff the release is >= threshold; the default threshold is the midpoint
// of the two sums under spec.method. The method's permutation seed is
// fixed, so each sum is computed once and only the noise is redrawn.
template <class T>
ExperimentReport distinguishing_experiment(
    const AttackInstance<T>& instance, const MechanismSpec<T>& spec,
    std::optional<DyadicRational> threshold, uint64_t trials,
    uint64_t master_seed, double epsilon,
    LikelihoodMode mode = LikelihoodMode::kTail);

// ---------------------------------------------------------------------------
// Exact verification.

// A rational q >= exp(-1 / t): the decay of a discrete Laplace with scale
// t, rounded up to a multiple of 2^-64 so the modelled noise is never
// narrower than the true one.
BigRational discrete_laplace_decay(const BigRational& t);

// Sign of r - e^x, decided with exact integer brackets of e^|x| refined
// until the answer is certain. r must be positive.
int compare_to_exp(const BigRational& r, const BigRational& x);

// The exact rational value of a double.
BigRational exact_rational(double x);

struct DpCheckResult {
  // max over outputs o and both orders of Pr[M(u) = o] / Pr[M(v) = o].
  BigRational max_ratio;
  // Output attaining max_ratio.
  i128 argmax = 0;
  BigRational decay;
  // max_ratio <= e^epsilon, decided exactly.
  bool within_epsilon = false;
};

// Largest supported modulus for exact checks; the PMF weights are exact
// rationals whose size grows with the modulus.
inline constexpr int kMaxExactCheckBits = 12;

// Exact output PMFs of an integer mechanism with modular or saturating
// discrete Laplace noise on u and v, and their largest ratio. The noise
// decay is discrete_laplace_decay(spec.scale). Throws UnsupportedError for
// other noise kinds, shift transforms, or formats wider than
// kMaxExactCheckBits.
DpCheckResult exact_dp_check(const MechanismSpec<KInt>& spec,
                             const IntDataset& u, const IntDataset& v,
                             double epsilon);

}  // namespace bsum

#endif  // BSUM_MECHANISM_H_
