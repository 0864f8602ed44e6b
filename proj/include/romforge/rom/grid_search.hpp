// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ROMFORGE_ROM_GRID_SEARCH_HPP
#define ROMFORGE_ROM_GRID_SEARCH_HPP

#include <functional>
#include <string>
#include <vector>

#include "romforge/rom/rom.hpp"

namespace romforge::rom
{

struct GridMenus
{
  std::vector<int> hidden_layers{1, 2, 3, 4};
  std::vector<int> neurons{64, 128, 256, 512, 1024, 2048};
  std::vector<double> dropout{0.0, 0.025, 0.05, 0.1, 0.2};
  std::vector<double> max_lr{1e-5, 3.16e-5, 1e-4, 3.16e-4, 1e-3, 3.16e-3, 1e-2};
  std::vector<int> batch{8, 16, 32, 64, 128};
  int epochs = 1500;
};

/// Cartesian product in menu order (hidden layers outermost, batch
/// innermost). Every candidate shares `seed`, hence the same initial
/// weights for equal architectures.
std::vector<MlpConfig> enumerate_candidates(const GridMenus &menus, std::uint64_t seed = 0);

/// Sorted indices of a seeded uniform subsample without replacement; all
/// indices when budget is 0 or at least the space size.
std::vector<std::size_t> select_candidates(std::size_t space, std::size_t budget, std::uint64_t seed);

struct CandidateResult
{
  std::size_t index = 0;  ///< position in the full enumeration
  MlpConfig config;
  double best_validation_mse = 0.0;
  double baseline_validation_mse = 0.0;
  int best_epoch = 0;
  bool failed = false;
  std::string failure;
};

struct GridSearchOptions
{
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;
  /// A candidate whose best validation MSE exceeds this multiple of the
  /// mean-predictor baseline is flagged as diverged.
  double divergence_factor = 10.0;
  std::function<void(const CandidateResult &)> on_candidate;
};

struct GridSearchResult
{
  std::size_t space_size = 0;
  /// Successful candidates by validation MSE, then failures; ties by index.
  std::vector<CandidateResult> ranked;
};

GridSearchResult grid_search(const GridMenus &menus, const nn::Tensor<float> &features,
                             const nn::Tensor<float> &encodings, const GridSearchOptions &options = {});

}  // namespace romforge::rom

#endif  // ROMFORGE_ROM_GRID_SEARCH_HPP
