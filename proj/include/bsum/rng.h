// Seeded, portable pseudo-random generation.
//
// Every stream is a std::mt19937_64 seeded through std::seed_seq with the
// words (seed lo, seed hi, stream lo, stream hi, tag). Both the engine and
// the seed_seq mixing are fully specified by the C++ standard, and bounded
// draws use rejection sampling rather than std::uniform_int_distribution,
// so a (seed, stream, tag) triple yields the same values on every
// conforming toolchain.

#ifndef BSUM_RNG_H_
#define BSUM_RNG_H_

#include <cstdint>
#include <random>

namespace bsum {

// Purpose tags keep the streams of different consumers independent even
// when they share a seed and stream index.
enum class RngTag : uint32_t {
  kPermutation = 1,
  kNoise = 2,
  kCoupling = 3,
  kTest = 4,
};

class Rng {
 public:
  static constexpr const char* kAlgorithm =
      "mt19937_64 seeded by seed_seq(seed_lo, seed_hi, stream_lo, stream_hi, "
      "tag); bounded draws by rejection";

  explicit Rng(uint64_t seed, uint64_t stream = 0,
               RngTag tag = RngTag::kTest);

  uint64_t next() { return engine_(); }
  // Uniform integer in [0, bound). bound must be positive.
  uint64_t below(uint64_t bound);
  // Uniform double in (0, 1], built from the top 53 bits of one draw.
  double uniform_open_closed();

 private:
  std::mt19937_64 engine_;
};

}  // namespace bsum

#endif  // BSUM_RNG_H_
