#include "bsum/mechanism.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <type_traits>
#include <utility>
#include <vector>

#include "bsum/errors.h"
#include "bsum/value_ops.h"

namespace bsum {

namespace {

DyadicRational dyadic_from_double(double x) {
  if (!std::isfinite(x)) throw PreconditionError("non-finite double");
  if (x == 0) return DyadicRational(0);
  int exp = 0;
  double frac = std::frexp(x, &exp);  // x = frac * 2^exp, |frac| in [0.5, 1)
  int64_t mant = static_cast<int64_t>(std::ldexp(frac, 53));
  return DyadicRational(BigInt(mant), exp - 53);
}

// Integers lo <= e^x * 2^p <= hi for rational x >= 0.
std::pair<BigInt, BigInt> exp_bracket(const BigRational& x, unsigned p) {
  const BigInt one = BigInt(1) << p;
  const BigInt num = boost::multiprecision::numerator(x);
  const BigInt den = boost::multiprecision::denominator(x);
  const BigInt x_lo = (num << p) / den;
  const BigInt x_hi = x_lo + 1;
  BigInt term = one, lo = one;
  for (unsigned i = 1; term > 0; ++i) {
    term = (term * x_lo) >> p;
    term /= i;
    lo += term;
  }
  // Upper bracket: every step rounds up, and once i + 1 > 2x each term is
  // below half the previous one, so the remaining tail is at most the
  // last term.
  const BigInt x_ceil = (num / den) + 1;
  term = one;
  BigInt hi = one;
  for (unsigned i = 1;; ++i) {
    term = (term * x_hi + one - 1) >> p;
    term = (term + i - 1) / i;
    hi += term;
    if (BigInt(i) > 2 * x_ceil && term <= 1) break;
  }
  hi += term + 1;
  return {lo, hi};
}

double log_add(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

double log_choose(uint64_t n, uint64_t k) {
  return std::lgamma(static_cast<double>(n) + 1) -
         std::lgamma(static_cast<double>(k) + 1) -
         std::lgamma(static_cast<double>(n - k) + 1);
}

double log_binom_term(uint64_t n, uint64_t x, double log_p, double log_q) {
  double t = log_choose(n, x);
  if (x > 0) t += static_cast<double>(x) * log_p;
  if (n - x > 0) t += static_cast<double>(n - x) * log_q;
  return t;
}

// log P[X >= a] (upper = true) or log P[X <= a] for X ~ Bin(n, p).
double log_binom_tail(uint64_t n, uint64_t a, double p, bool upper) {
  if (upper && a == 0) return 0;
  if (!upper && a >= n) return 0;
  if (p <= 0) return upper ? -INFINITY : 0;
  if (p >= 1) return upper ? (a <= n ? 0 : -INFINITY) : -INFINITY;
  const double log_p = std::log(p), log_q = std::log1p(-p);
  const double mode = p * static_cast<double>(n);
  double total = -INFINITY, peak = -INFINITY;
  // Walk away from a; once past the mode the terms only shrink, and terms
  // 60 nats below the peak no longer change a double.
  for (uint64_t step = 0;; ++step) {
    uint64_t x;
    if (upper) {
      x = a + step;
      if (x > n) break;
    } else {
      if (step > a) break;
      x = a - step;
    }
    double t = log_binom_term(n, x, log_p, log_q);
    total = log_add(total, t);
    peak = std::max(peak, t);
    bool past_mode = upper ? static_cast<double>(x) > mode
                           : static_cast<double>(x) < mode;
    if (past_mode && t < peak - 60) break;
  }
  return total;
}

struct Side {
  uint64_t n;
  uint64_t ones;
};

// One dataset's contribution to the log likelihood at outcome probability
// p, and the p that maximizes it.
struct Factor {
  Side side;
  LikelihoodMode mode;
  bool upper;  // tail direction

  double operator()(double p) const {
    if (side.n == 0) return 0;
    if (mode == LikelihoodMode::kTail) {
      return log_binom_tail(side.n, side.ones, p, upper);
    }
    double v = 0;
    uint64_t zeros = side.n - side.ones;
    if (side.ones > 0) v += static_cast<double>(side.ones) * std::log(p);
    if (zeros > 0) v += static_cast<double>(zeros) * std::log1p(-p);
    return v;
  }

  double argmax() const {
    if (side.n == 0) return 0.5;
    if (mode == LikelihoodMode::kTail) return upper ? 1.0 : 0.0;
    return static_cast<double>(side.ones) / static_cast<double>(side.n);
  }
};

template <class T>
void check_noise_kind(NoiseKind kind, const T& sample) {
  if constexpr (std::is_same_v<T, SimFloat>) {
    if (kind == NoiseKind::kDiscreteLaplaceMod ||
        kind == NoiseKind::kDiscreteLaplaceSaturating) {
      throw UnsupportedError(to_string(kind) +
                             " noise applies to integer formats only");
    }
  } else {
    if (kind == NoiseKind::kLaplace) {
      throw UnsupportedError("continuous Laplace noise applies to floats only");
    }
    if (kind == NoiseKind::kDiscreteLaplaceMod &&
        sample.format().overflow() != Overflow::kWraparound) {
      throw UnsupportedError("modular noise needs a wraparound format");
    }
  }
}

KInt clamp_to(const IntFormat& format, const BigInt& v) {
  BigInt lo(i128_to_string(format.min_value()));
  BigInt hi(i128_to_string(format.max_value()));
  return KInt::from_big(format, v < lo ? lo : (v > hi ? hi : v));
}

template <class T>
MechanismOutput apply_noise(const MechanismSpec<T>& spec,
                            const SumResult<T>& r, Rng& rng,
                            const std::optional<DyadicRational>& noise_override) {
  check_noise_kind(spec.noise, spec.lower);
  MechanismOutput out;
  if (!r.exact) {
    out.state = r.value->is_negative_value() ? MechanismOutput::State::kNegInf
                                             : MechanismOutput::State::kPosInf;
    return out;
  }
  DyadicRational offset(0);
  if (r.offset) {
    offset = r.offset->to_exact() *
             DyadicRational(static_cast<int64_t>(*r.offset_count));
  }
  DyadicRational noise;
  if (noise_override) {
    noise = *noise_override;
  } else if (spec.noise == NoiseKind::kLaplace) {
    noise = dyadic_from_double(sample_laplace(spec.scale.to_double(), rng));
  } else {
    double t = spec.scale.scaled(-spec.grid_log2).to_double();
    noise = DyadicRational(sample_discrete_laplace(t, rng)).scaled(
        spec.grid_log2);
  }
  if constexpr (std::is_same_v<T, SimFloat>) {
    if (spec.noise == NoiseKind::kLaplace) {
      const FloatFormat& f = r.value->format();
      Rounding rounding = spec.method.effective_rounding();
      SimFloat released =
          add(*r.value, round(noise, f, to_mode(rounding)), rounding);
      if (r.offset) released = add(released, round(offset, f, to_mode(rounding)),
                                   rounding);
      if (released.is_inf()) {
        out.state = released.negative() ? MechanismOutput::State::kNegInf
                                        : MechanismOutput::State::kPosInf;
      } else {
        out.value = released.to_exact();
      }
      return out;
    }
    out.value = *r.exact + offset + noise;
    return out;
  } else {
    const IntFormat& f = spec.lower.format();
    if (spec.noise == NoiseKind::kDiscreteLaplace) {
      out.value = *r.exact + offset + noise;
      return out;
    }
    if (!noise.is_integer()) {
      throw PreconditionError("integer mechanisms need integer noise");
    }
    BigInt base = (*r.exact + offset).floor();
    if (spec.noise == NoiseKind::kDiscreteLaplaceMod) {
      out.value = modular_noise_add(KInt::from_big(f, wrap(f, base)),
                                    noise.floor())
                      .to_exact();
    } else {
      out.value = clamp_to(f, base + noise.floor()).to_exact();
    }
    return out;
  }
}

}  // namespace

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kLaplace:
      return "laplace";
    case NoiseKind::kDiscreteLaplace:
      return "discrete_laplace";
    case NoiseKind::kDiscreteLaplaceMod:
      return "discrete_laplace_mod";
    case NoiseKind::kDiscreteLaplaceSaturating:
      return "discrete_laplace_saturating";
  }
  return "unknown";
}

NoiseKind parse_noise_kind(const std::string& text) {
  for (NoiseKind k :
       {NoiseKind::kLaplace, NoiseKind::kDiscreteLaplace,
        NoiseKind::kDiscreteLaplaceMod, NoiseKind::kDiscreteLaplaceSaturating}) {
    if (to_string(k) == text) return k;
  }
  throw InputError("noise", "unknown noise kind '" + text + "'");
}

int64_t sample_discrete_laplace(double scale, Rng& rng) {
  if (!(scale > 0) || scale > 0x1.0p57) {
    throw PreconditionError("discrete Laplace scale must lie in (0, 2^57]");
  }
  // P[G >= g] = exp(-g / scale) for G = floor(-scale * log U).
  auto geometric = [&]() {
    double u = rng.uniform_open_closed();
    return static_cast<int64_t>(std::floor(-scale * std::log(u)));
  };
  int64_t a = geometric();
  int64_t b = geometric();
  return a - b;
}

int64_t sample_discrete_laplace(double scale, uint64_t seed) {
  Rng rng(seed, 0, RngTag::kNoise);
  return sample_discrete_laplace(scale, rng);
}

double sample_laplace(double scale, Rng& rng) {
  if (!(scale > 0)) throw PreconditionError("Laplace scale must be positive");
  double a = -std::log(rng.uniform_open_closed());
  double b = -std::log(rng.uniform_open_closed());
  return scale * (a - b);
}

KInt modular_noise_add(const KInt& value, const BigInt& noise) {
  const IntFormat& f = value.format();
  if (f.overflow() != Overflow::kWraparound) {
    throw PreconditionError("modular noise addition needs a wraparound format");
  }
  return KInt(f, wrap(f, value.to_big() + noise));
}

KInt saturating_noise_add(const KInt& value, const BigInt& noise) {
  return clamp_to(value.format(), value.to_big() + noise);
}

template <class T>
MechanismSpec<T> calibrate(const T& lower, const T& upper,
                           const SumMethod& method, NoiseKind noise,
                           const SensitivityBound& bound, double epsilon) {
  check_noise_kind(noise, lower);
  if (!(epsilon > 0) || !std::isfinite(epsilon)) {
    throw PreconditionError("epsilon must be positive and finite");
  }
  if (!bound.value) {
    throw PreconditionError("cannot calibrate noise to an infinite bound");
  }
  if (bound.value->is_zero()) {
    throw PreconditionError("cannot calibrate noise to a zero bound");
  }
  DyadicRational eps = dyadic_from_double(epsilon);
  // value / (M 2^E) = (value 2^-E) / M.
  DyadicRational scale =
      divide_round_up(bound.value->scaled(-eps.exponent()), eps.numerator());
  MechanismSpec<T> spec{lower, upper, method, noise, scale, 0, bound, epsilon};
  if constexpr (std::is_same_v<T, SimFloat>) {
    spec.grid_log2 = scale.floor_log2() - kFloatNoiseGridBits;
  }
  return spec;
}

std::string MechanismOutput::describe() const {
  switch (state) {
    case State::kPosInf:
      return "inf";
    case State::kNegInf:
      return "-inf";
    case State::kFinite:
      break;
  }
  return value.to_string();
}

template <class T>
MechanismOutput run_mechanism(const MechanismSpec<T>& spec,
                              const Dataset<T>& dataset, uint64_t seed,
                              std::optional<DyadicRational> noise_override) {
  Rng rng(seed, 0, RngTag::kNoise);
  return apply_noise(spec, run_sum(dataset, spec.method), rng, noise_override);
}

double dp_violation_log2_bound(const OutcomeCounts& counts, double epsilon,
                               LikelihoodMode mode) {
  if (!(epsilon >= 0)) throw PreconditionError("epsilon must be >= 0");
  Side u{counts[0][0] + counts[0][1], counts[0][1]};
  Side v{counts[1][0] + counts[1][1], counts[1][1]};
  if (u.n == 0 && v.n == 0) return 0;
  // Tails point the way the data is separated.
  bool u_higher = u.n == 0 || v.n == 0 ||
                  static_cast<double>(u.ones) * static_cast<double>(v.n) >=
                      static_cast<double>(v.ones) * static_cast<double>(u.n);
  Factor fu{u, mode, u_higher};
  Factor fv{v, mode, !u_higher};
  const double e = std::exp(epsilon);
  auto objective = [&](double pu) {
    double lo = std::max({0.0, pu / e, 1 - e * (1 - pu)});
    double hi = std::min({1.0, pu * e, 1 - (1 - pu) / e});
    double pv = std::clamp(fv.argmax(), lo, std::max(lo, hi));
    return fu(pu) + fv(pv);
  };
  double best_p = 0, best = -INFINITY;
  double lo = 0, hi = 1;
  for (int points = 1000;; points = 40) {
    double step = (hi - lo) / points;
    for (int i = 0; i <= points; ++i) {
      double p = lo + step * i;
      double val = objective(p);
      if (val > best) {
        best = val;
        best_p = p;
      }
    }
    if (step < 1e-6) break;
    lo = std::max(0.0, best_p - step);
    hi = std::min(1.0, best_p + step);
  }
  return best / std::log(2.0);
}

template <class T>
ExperimentReport distinguishing_experiment(
    const AttackInstance<T>& instance, const MechanismSpec<T>& spec,
    std::optional<DyadicRational> threshold, uint64_t trials,
    uint64_t master_seed, double epsilon, LikelihoodMode mode) {
  ExperimentReport report;
  report.trials = trials;
  report.epsilon = epsilon;
  report.mode = mode;
  report.master_seed = master_seed;
  if (threshold) {
    report.threshold = *threshold;
  } else {
    RealizedGap g = realized_gap(instance, spec.method);
    if (!g.midpoint) {
      throw PreconditionError(
          "no default threshold: one of the sums is not finite");
    }
    report.threshold = *g.midpoint;
  }
  // The method is deterministic given its own seeds, so each dataset is
  // summed once and only the noise is redrawn per trial.
  const SumResult<T> sums[2] = {run_sum(instance.u, spec.method),
                                run_sum(instance.v, spec.method)};
  for (uint64_t i = 0; i < trials; ++i) {
    for (int d = 0; d < 2; ++d) {
      Rng rng(master_seed, 2 * i + static_cast<uint64_t>(d), RngTag::kNoise);
      MechanismOutput o = apply_noise(spec, sums[d], rng, std::nullopt);
      bool one = o.state == MechanismOutput::State::kPosInf ||
                 (o.state == MechanismOutput::State::kFinite &&
                  o.value >= report.threshold);
      ++report.counts[d][one ? 1 : 0];
    }
  }
  report.log2_bound = dp_violation_log2_bound(report.counts, epsilon, mode);
  report.verdict = report.log2_bound < std::log2(kVerdictAlpha)
                       ? "inconsistent-with-epsilon"
                       : "consistent-with-epsilon";
  return report;
}

BigRational exact_rational(double x) {
  return dyadic_from_double(x).to_rational();
}

BigRational discrete_laplace_decay(const BigRational& t) {
  if (t <= 0) throw PreconditionError("discrete Laplace scale must be positive");
  constexpr unsigned kBits = 64;
  // e^(1/t) >= lo / 2^p, so e^(-1/t) <= 2^p / lo.
  auto [lo, hi] = exp_bracket(BigRational(1) / t, kBits);
  (void)hi;
  BigInt full = BigInt(1) << (2 * kBits);
  BigInt q = (full + lo - 1) / lo;
  return BigRational(q, BigInt(1) << kBits);
}

int compare_to_exp(const BigRational& r, const BigRational& x) {
  if (r <= 0) throw PreconditionError("compare_to_exp needs r > 0");
  const bool negative = x < 0;
  const BigRational y = negative ? BigRational(-x) : x;
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  for (unsigned p = 64; p <= 8192; p *= 2) {
    auto [lo, hi] = exp_bracket(y, p);
    const BigInt one = BigInt(1) << p;
    if (!negative) {
      // r * 2^p against [lo, hi].
      BigInt scaled = num << p;
      if (scaled < lo * den) return -1;
      if (scaled > hi * den) return 1;
    } else {
      // r < e^-y iff r e^y < 1.
      if (num * hi < one * den) return -1;
      if (num * lo > one * den) return 1;
    }
  }
  return 0;
}

DpCheckResult exact_dp_check(const MechanismSpec<KInt>& spec,
                             const IntDataset& u, const IntDataset& v,
                             double epsilon) {
  const IntFormat& f = spec.lower.format();
  if (spec.noise != NoiseKind::kDiscreteLaplaceMod &&
      spec.noise != NoiseKind::kDiscreteLaplaceSaturating) {
    throw UnsupportedError(
        "exact checks need modular or saturating discrete noise (finite "
        "output support)");
  }
  check_noise_kind(spec.noise, spec.lower);
  if (f.bits() > kMaxExactCheckBits) {
    throw UnsupportedError("exact check: output support of 2^" +
                           std::to_string(f.bits()) + " exceeds 2^" +
                           std::to_string(kMaxExactCheckBits));
  }
  if (spec.method.has(Transform::Kind::kShiftBounds)) {
    throw UnsupportedError("exact check: shift_bounds is not modelled");
  }
  auto sum_of = [&](const IntDataset& d) {
    SumResult<KInt> r = run_sum(d, spec.method);
    if (r.value) return *r.value;
    return KInt::from_big(f, wrap(f, r.exact->floor()));
  };
  const KInt su = sum_of(u), sv = sum_of(v);
  DpCheckResult out;
  out.decay = discrete_laplace_decay(spec.scale.to_rational());
  const BigRational& q = out.decay;
  const int64_t m = int64_t{1} << f.bits();
  std::vector<BigRational> pow(static_cast<size_t>(m + 1));
  pow[0] = 1;
  for (int64_t d = 1; d <= m; ++d) pow[d] = pow[d - 1] * q;
  const i128 lo = f.min_value(), hi = f.max_value();
  // Unnormalized PMFs; the normalizing constant is the same for u and v.
  auto weight = [&](const KInt& s, i128 r) -> BigRational {
    if (spec.noise == NoiseKind::kDiscreteLaplaceMod) {
      i128 d = (r - s.value()) % m;
      if (d < 0) d += m;
      return pow[static_cast<size_t>(d)] + pow[static_cast<size_t>(m - d)];
    }
    if (lo == hi) return 1;
    if (r == hi) return pow[static_cast<size_t>(hi - s.value())] / (1 - q);
    if (r == lo) return pow[static_cast<size_t>(s.value() - lo)] / (1 - q);
    i128 d = r > s.value() ? r - s.value() : s.value() - r;
    return pow[static_cast<size_t>(d)];
  };
  out.max_ratio = 0;
  for (i128 r = lo; r <= hi; ++r) {
    BigRational a = weight(su, r), b = weight(sv, r);
    BigRational ratio = a > b ? a / b : b / a;
    if (ratio > out.max_ratio) {
      out.max_ratio = ratio;
      out.argmax = r;
    }
  }
  out.within_epsilon = compare_to_exp(out.max_ratio, exact_rational(epsilon)) <= 0;
  return out;
}

template MechanismSpec<SimFloat> calibrate(const SimFloat&, const SimFloat&,
                                           const SumMethod&, NoiseKind,
                                           const SensitivityBound&, double);
template MechanismSpec<KInt> calibrate(const KInt&, const KInt&,
                                       const SumMethod&, NoiseKind,
                                       const SensitivityBound&, double);
template MechanismOutput run_mechanism(const MechanismSpec<SimFloat>&,
                                       const Dataset<SimFloat>&, uint64_t,
                                       std::optional<DyadicRational>);
template MechanismOutput run_mechanism(const MechanismSpec<KInt>&,
                                       const Dataset<KInt>&, uint64_t,
                                       std::optional<DyadicRational>);
template ExperimentReport distinguishing_experiment(
    const AttackInstance<SimFloat>&, const MechanismSpec<SimFloat>&,
    std::optional<DyadicRational>, uint64_t, uint64_t, double, LikelihoodMode);
template ExperimentReport distinguishing_experiment(
    const AttackInstance<KInt>&, const MechanismSpec<KInt>&,
    std::optional<DyadicRational>, uint64_t, uint64_t, double, LikelihoodMode);

}  // namespace bsum
