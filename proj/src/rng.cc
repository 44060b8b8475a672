#include "bsum/rng.h"

#include "bsum/errors.h"

namespace bsum {

namespace {

std::mt19937_64 seeded_engine(uint64_t seed, uint64_t stream, RngTag tag) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(stream),
                    static_cast<uint32_t>(stream >> 32),
                    static_cast<uint32_t>(tag)};
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(uint64_t seed, uint64_t stream, RngTag tag)
    : engine_(seeded_engine(seed, stream, tag)) {}

uint64_t Rng::below(uint64_t bound) {
  if (bound == 0) throw PreconditionError("Rng::below: bound must be positive");
  // Reject the top partial block so every residue is equally likely.
  const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  uint64_t draw;
  do {
    draw = engine_();
  } while (draw >= limit);
  return draw % bound;
}

double Rng::uniform_open_closed() {
  return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
}

}  // namespace bsum
