// SPDX-License-Identifier: Apache-2.0
/**
 * @file   rng.hpp
 * @brief  Portable, seedable pseudo random stream.
 *
 * The generator is SplitMix64: the state advances by the golden-ratio
 * increment 0x9E3779B97F4A7C15 and each output is the state passed through
 * the mixing function
 *
 *   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
 *   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
 *   z =  z ^ (z >> 31)
 *
 * Doubles are taken from the top 53 bits, so uniform() is in [0, 1). Bounded
 * integers use rejection on the top of the 64-bit range (no modulo bias).
 * Nothing here depends on the standard library's distributions, whose
 * outputs differ between implementations.
 */
#ifndef FAILSEQ_RNG_HPP
#define FAILSEQ_RNG_HPP

#include <cstdint>
#include <span>
#include <utility>

namespace failseq {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

/// Derives an independent stream seed from a parent seed and a counter.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t counter);

/// Fisher-Yates shuffle driven by `rng`; identical on every platform.
template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace failseq

#endif  // FAILSEQ_RNG_HPP
