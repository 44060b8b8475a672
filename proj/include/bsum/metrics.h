// Adjacency metrics between datasets and the random-permutation couplings
// that relate the unordered metrics to the ordered ones.
//
// Unordered metrics (sym, co) depend only on histograms; ordered metrics
// (ham, id) depend on element order. Lengths that differ make co and ham
// infinite.

#ifndef BSUM_METRICS_H_
#define BSUM_METRICS_H_

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bsum/dataset.h"
#include "bsum/errors.h"
#include "bsum/rng.h"

namespace bsum {

enum class Metric { kSym, kCo, kHam, kId };

std::string to_string(Metric metric);
Metric parse_metric(const std::string& text);
// co and ham compare datasets of one fixed length.
inline bool requires_known_length(Metric m) {
  return m == Metric::kCo || m == Metric::kHam;
}
inline bool is_ordered(Metric m) { return m == Metric::kHam || m == Metric::kId; }

class Distance {
 public:
  static Distance infinite() { return Distance(true, 0); }
  static Distance finite(uint64_t value) { return Distance(false, value); }

  bool is_infinite() const { return infinite_; }
  // Throws PreconditionError when infinite.
  uint64_t value() const {
    if (infinite_) throw PreconditionError("distance is infinite");
    return value_;
  }
  bool at_most(uint64_t bound) const { return !infinite_ && value_ <= bound; }
  std::string to_string() const {
    return infinite_ ? "inf" : std::to_string(value_);
  }

  friend bool operator==(const Distance& a, const Distance& b) {
    return a.infinite_ == b.infinite_ && a.value_ == b.value_;
  }

 private:
  Distance(bool infinite, uint64_t value) : infinite_(infinite), value_(value) {}
  bool infinite_;
  uint64_t value_;
};

// Sum over values z of |h_u(z) - h_v(z)|.
template <class T>
uint64_t d_sym(const Dataset<T>& u, const Dataset<T>& v) {
  Histogram<T> hu = histogram(u);
  Histogram<T> hv = histogram(v);
  uint64_t total = 0;
  auto a = hu.begin();
  auto b = hv.begin();
  ValueLess<T> lt;
  while (a != hu.end() || b != hv.end()) {
    if (b == hv.end() || (a != hu.end() && lt(a->first, b->first))) {
      total += (a++)->second;
    } else if (a == hu.end() || lt(b->first, a->first)) {
      total += (b++)->second;
    } else {
      total += a->second > b->second ? a->second - b->second
                                     : b->second - a->second;
      ++a;
      ++b;
    }
  }
  return total;
}

// Minimum number of elements to change; infinite when lengths differ.
template <class T>
Distance d_co(const Dataset<T>& u, const Dataset<T>& v) {
  if (u.size() != v.size()) return Distance::infinite();
  return Distance::finite(d_sym(u, v) / 2);
}

// Number of positions holding different values; infinite when lengths
// differ. Walks both run lists in step, so cost is linear in runs.
template <class T>
Distance d_ham(const Dataset<T>& u, const Dataset<T>& v) {
  if (u.size() != v.size()) return Distance::infinite();
  uint64_t diff = 0;
  size_t i = 0, j = 0;
  uint64_t left_i = u.runs().empty() ? 0 : u.runs()[0].count;
  uint64_t left_j = v.runs().empty() ? 0 : v.runs()[0].count;
  while (i < u.runs().size() && j < v.runs().size()) {
    uint64_t step = std::min(left_i, left_j);
    if (u.runs()[i].value != v.runs()[j].value) diff += step;
    left_i -= step;
    left_j -= step;
    if (left_i == 0 && ++i < u.runs().size()) left_i = u.runs()[i].count;
    if (left_j == 0 && ++j < v.runs().size()) left_j = v.runs()[j].count;
  }
  return Distance::finite(diff);
}

// Longest common subsequence length by the two-row dynamic program. The
// cost is |a| * |b|, guarded by cell_guard.
template <class T>
uint64_t lcs_length(const std::vector<T>& a, const std::vector<T>& b,
                    uint64_t cell_guard) {
  if (a.empty() || b.empty()) return 0;
  if (static_cast<double>(a.size()) * static_cast<double>(b.size()) >
      static_cast<double>(cell_guard)) {
    throw GuardExceededError("insert-delete distance: LCS table of " +
                             std::to_string(a.size()) + " x " +
                             std::to_string(b.size()) + " exceeds the guard");
  }
  std::vector<uint64_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline constexpr uint64_t kDefaultLcsGuard = uint64_t{1} << 28;

namespace internal {

// Elements [from, to) of a run-length dataset, materialized.
template <class T>
std::vector<T> slice(const Dataset<T>& d, uint64_t from, uint64_t to) {
  std::vector<T> out;
  if (from >= to) return out;
  out.reserve(static_cast<size_t>(to - from));
  size_t r = d.run_index(from);
  uint64_t pos = from;
  while (pos < to) {
    uint64_t run_end = d.run_start(r) + d.runs()[r].count;
    uint64_t stop = std::min(run_end, to);
    for (; pos < stop; ++pos) out.push_back(d.runs()[r].value);
    ++r;
  }
  return out;
}

// Length of the longest common prefix, walking runs.
template <class T>
uint64_t common_prefix(const Dataset<T>& u, const Dataset<T>& v) {
  uint64_t n = 0;
  size_t i = 0;
  while (i < u.runs().size() && i < v.runs().size() &&
         u.runs()[i].value == v.runs()[i].value) {
    uint64_t a = u.runs()[i].count, b = v.runs()[i].count;
    n += std::min(a, b);
    if (a != b) break;
    ++i;
  }
  return n;
}

template <class T>
uint64_t common_suffix(const Dataset<T>& u, const Dataset<T>& v) {
  uint64_t n = 0;
  size_t i = u.runs().size(), j = v.runs().size();
  while (i > 0 && j > 0 && u.runs()[i - 1].value == v.runs()[j - 1].value) {
    uint64_t a = u.runs()[i - 1].count, b = v.runs()[j - 1].count;
    n += std::min(a, b);
    if (a != b) break;
    --i;
    --j;
  }
  return n;
}

}  // namespace internal

// Minimum number of insertions and deletions turning u into v, computed
// as |u| + |v| - 2 LCS(u, v). The common prefix and suffix are stripped
// first (in run form) so long attack datasets stay cheap.
template <class T>
uint64_t d_id(const Dataset<T>& u, const Dataset<T>& v,
              uint64_t cell_guard = kDefaultLcsGuard) {
  uint64_t p = internal::common_prefix(u, v);
  uint64_t s = internal::common_suffix(u, v);
  // Prefix and suffix may overlap when one dataset is a sub-run of the
  // other; keep them disjoint within the shorter dataset.
  uint64_t shortest = std::min(u.size(), v.size());
  if (p + s > shortest) s = shortest - p;
  std::vector<T> a = internal::slice(u, p, u.size() - s);
  std::vector<T> b = internal::slice(v, p, v.size() - s);
  uint64_t lcs = lcs_length(a, b, cell_guard);
  return static_cast<uint64_t>(a.size() + b.size()) - 2 * lcs;
}

template <class T>
Distance distance(Metric metric, const Dataset<T>& u, const Dataset<T>& v) {
  switch (metric) {
    case Metric::kSym:
      return Distance::finite(d_sym(u, v));
    case Metric::kCo:
      return d_co(u, v);
    case Metric::kHam:
      return d_ham(u, v);
    case Metric::kId:
      return Distance::finite(d_id(u, v));
  }
  throw PreconditionError("unknown metric");
}

// Cyclic distance min{(x - y) mod m, (y - x) mod m}.
u128 d_mod(i128 x, i128 y, u128 modulus);
// Modular distance between two integers of one wraparound format, m = 2^k.
u128 d_mod(const KInt& x, const KInt& y);

// ---------------------------------------------------------------------------
// Random-permutation couplings. Given adjacent inputs under an unordered
// metric, these draw a uniformly random permutation of each input such
// that the two permuted datasets are adjacent under the matching ordered
// metric. Each marginal is exactly a uniform shuffle.

template <class T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (size_t i = items.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

// For u, w with d_sym(u, w) = 1: returns (pi(u), pi'(w)) with
// d_id(pi(u), pi'(w)) <= 1. The shorter dataset is shuffled uniformly and
// the extra element of the longer one is inserted at a uniform position.
template <class T>
std::pair<Dataset<T>, Dataset<T>> couple_sym(const Dataset<T>& u,
                                             const Dataset<T>& w, Rng& rng) {
  if (d_sym(u, w) != 1) {
    throw PreconditionError("couple_sym: inputs must be at symmetric distance 1");
  }
  const bool u_shorter = u.size() < w.size();
  const Dataset<T>& shorter = u_shorter ? u : w;
  const Dataset<T>& longer = u_shorter ? w : u;
  Histogram<T> extra = histogram(longer);
  for (const auto& [value, count] : histogram(shorter)) extra[value] -= count;
  T z = shorter.lower();
  for (const auto& [value, count] : extra) {
    if (count == 1) z = value;
  }
  std::vector<T> small = shorter.expand();
  shuffle(small, rng);
  std::vector<T> big = small;
  big.insert(big.begin() + static_cast<std::ptrdiff_t>(rng.below(small.size() + 1)),
             z);
  Dataset<T> a = shorter.with_elements(small);
  Dataset<T> b = longer.with_elements(big);
  return u_shorter ? std::make_pair(a, b) : std::make_pair(b, a);
}

// For u, w with d_co(u, w) = 1: returns (pi(u), pi'(w)) with
// d_ham(pi(u), pi'(w)) <= 1. u is shuffled uniformly and a uniformly chosen
// occurrence of the removed value is overwritten with the added one.
template <class T>
std::pair<Dataset<T>, Dataset<T>> couple_co(const Dataset<T>& u,
                                            const Dataset<T>& w, Rng& rng) {
  Distance d = d_co(u, w);
  if (!(d == Distance::finite(1))) {
    throw PreconditionError("couple_co: inputs must be at change-one distance 1");
  }
  Histogram<T> hu = histogram(u);
  Histogram<T> hw = histogram(w);
  T removed = u.lower(), added = u.lower();
  for (const auto& [value, count] : hu) {
    auto it = hw.find(value);
    if (it == hw.end() || it->second < count) removed = value;
  }
  for (const auto& [value, count] : hw) {
    auto it = hu.find(value);
    if (it == hu.end() || it->second < count) added = value;
  }
  std::vector<T> a = u.expand();
  shuffle(a, rng);
  std::vector<size_t> slots;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] == removed) slots.push_back(i);
  }
  std::vector<T> b = a;
  b[slots[static_cast<size_t>(rng.below(slots.size()))]] = added;
  return {u.with_elements(a), w.with_elements(b)};
}

}  // namespace bsum

#endif  // BSUM_METRICS_H_
