// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "romforge/common/rng.hpp"

#include <limits>

namespace romforge
{

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag)
{
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform()
{
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::index(std::uint64_t n)
{
  // Rejection keeps the draw unbiased for any n.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = engine_();
  while (x >= limit)
  {
    x = engine_();
  }
  return x % n;
}

}  // namespace romforge
