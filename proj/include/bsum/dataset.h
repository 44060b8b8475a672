// Bounded datasets of emulated values, stored run-length encoded.
//
// Attack instances reach tens of millions of elements at full scale, so a
// dataset is a sequence of runs {value, count}. Streaming consumers walk the
// runs; random access goes through a prefix-count table; expand() produces
// the plain element vector behind a size guard.

#ifndef BSUM_DATASET_H_
#define BSUM_DATASET_H_

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bsum/errors.h"
#include "bsum/kint.h"
#include "bsum/sim_float.h"
#include "bsum/value_ops.h"

namespace bsum {

// Element vectors larger than this are never materialized implicitly.
inline constexpr uint64_t kDefaultExpandGuard = uint64_t{1} << 27;

template <class T>
struct Run {
  T value;
  uint64_t count;
};

// Strict weak order on values. For SimFloat numeric order coincides with
// bit-pattern identity (no NaN, one zero), so it is safe as a map key.
template <class T>
struct ValueLess {
  bool operator()(const T& a, const T& b) const { return less(a, b); }
};

template <class T>
using Histogram = std::map<T, uint64_t, ValueLess<T>>;

template <class T>
class Dataset {
 public:
  using Value = T;
  using Format = typename T::Format;

  // Empty dataset with bounds [lower, upper].
  Dataset(T lower, T upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.format() != upper_.format()) {
      throw PreconditionError("dataset bounds have different formats");
    }
    if (!is_finite_value(lower_) || !is_finite_value(upper_)) {
      throw PreconditionError("dataset bounds must be finite");
    }
    if (compare(lower_, upper_) > 0) {
      throw PreconditionError("dataset bounds: L > U");
    }
  }

  Dataset(T lower, T upper, const std::vector<T>& elements)
      : Dataset(std::move(lower), std::move(upper)) {
    runs_.reserve(elements.size());
    prefix_.reserve(elements.size());
    for (const T& e : elements) push_back(e);
  }

  Dataset(T lower, T upper, const std::vector<Run<T>>& runs)
      : Dataset(std::move(lower), std::move(upper)) {
    for (const Run<T>& r : runs) push_back(r.value, r.count);
  }

  // Appends count copies of value, merging with the last run when equal.
  // Throws PreconditionError when value lies outside [L, U].
  void push_back(const T& value, uint64_t count = 1) {
    if (count == 0) return;
    if (value.format() != lower_.format()) {
      throw PreconditionError("dataset element has a different format");
    }
    if (!is_finite_value(value) || compare(value, lower_) < 0 ||
        compare(value, upper_) > 0) {
      throw PreconditionError("dataset element " + describe(value) +
                              " outside bounds");
    }
    if (!runs_.empty() && runs_.back().value == value) {
      runs_.back().count += count;
      prefix_.back() += count;
    } else {
      runs_.push_back({value, count});
      prefix_.push_back(size() + count);
    }
  }

  const T& lower() const { return lower_; }
  const T& upper() const { return upper_; }
  const Format& format() const { return lower_.format(); }
  const std::vector<Run<T>>& runs() const { return runs_; }
  uint64_t size() const { return prefix_.empty() ? 0 : prefix_.back(); }
  bool empty() const { return size() == 0; }

  // Index of the run holding element i.
  size_t run_index(uint64_t i) const {
    if (i >= size()) throw PreconditionError("dataset index out of range");
    return static_cast<size_t>(
        std::upper_bound(prefix_.begin(), prefix_.end(), i) - prefix_.begin());
  }
  const T& at(uint64_t i) const { return runs_[run_index(i)].value; }
  // Number of elements before run r.
  uint64_t run_start(size_t r) const { return r == 0 ? 0 : prefix_[r - 1]; }

  template <class F>
  void for_each(F&& f) const {
    for (const Run<T>& r : runs_) {
      for (uint64_t c = 0; c < r.count; ++c) f(r.value);
    }
  }

  std::vector<T> expand(uint64_t guard = kDefaultExpandGuard) const {
    if (size() > guard) {
      throw GuardExceededError("dataset of " + std::to_string(size()) +
                               " elements exceeds the expansion guard of " +
                               std::to_string(guard));
    }
    std::vector<T> out;
    out.reserve(static_cast<size_t>(size()));
    for_each([&out](const T& v) { out.push_back(v); });
    return out;
  }

  // First min(size, n) elements, bounds unchanged.
  Dataset prefix(uint64_t n) const {
    Dataset out(lower_, upper_);
    uint64_t left = n;
    for (const Run<T>& r : runs_) {
      if (left == 0) break;
      uint64_t take = std::min(left, r.count);
      out.push_back(r.value, take);
      left -= take;
    }
    return out;
  }

  Dataset with_elements(const std::vector<T>& elements) const {
    return Dataset(lower_, upper_, elements);
  }

 private:
  T lower_;
  T upper_;
  std::vector<Run<T>> runs_;
  std::vector<uint64_t> prefix_;  // prefix_[r] = elements in runs [0, r]
};

using FloatDataset = Dataset<SimFloat>;
using IntDataset = Dataset<KInt>;

template <class T>
Histogram<T> histogram(const Dataset<T>& v) {
  Histogram<T> h;
  for (const Run<T>& r : v.runs()) h[r.value] += r.count;
  return h;
}

// Same bounds and the same element sequence.
template <class T>
bool same_elements(const Dataset<T>& a, const Dataset<T>& b) {
  if (a.size() != b.size() || a.runs().size() != b.runs().size()) return false;
  for (size_t i = 0; i < a.runs().size(); ++i) {
    if (a.runs()[i].value != b.runs()[i].value ||
        a.runs()[i].count != b.runs()[i].count) {
      return false;
    }
  }
  return true;
}

}  // namespace bsum

#endif  // BSUM_DATASET_H_
