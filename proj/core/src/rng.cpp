// SPDX-License-Identifier: Apache-2.0
#include "failseq/rng.hpp"

#include <limits>
#include <stdexcept>

namespace failseq {

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
  // Largest multiple of n that fits; draws above it are rejected.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t counter) {
  Rng a(parent ^ 0x6A09E667F3BCC909ULL);
  const std::uint64_t base = a.next_u64();
  Rng b(base + counter * 0xD1B54A32D192ED03ULL);
  return b.next_u64();
}

}  // namespace failseq
