// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ROMFORGE_COMMON_RNG_HPP
#define ROMFORGE_COMMON_RNG_HPP

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace romforge
{

/// Mixes a base seed with a stream tag (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

/// Seeded generator whose output is identical on every platform.
///
/// The engine is std::mt19937_64, which the standard fully specifies; the
/// distributions are implemented here because the standard library ones are
/// implementation-defined.
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n);

  template <typename T>
  void shuffle(std::span<T> items)
  {
    for (std::size_t i = items.size(); i > 1; --i)
    {
      std::swap(items[i - 1], items[index(i)]);
    }
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace romforge

#endif  // ROMFORGE_COMMON_RNG_HPP
