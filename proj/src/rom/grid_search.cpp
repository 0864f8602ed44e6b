// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "romforge/rom/grid_search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "romforge/common/error.hpp"
#include "romforge/common/rng.hpp"

namespace romforge::rom
{

std::vector<MlpConfig> enumerate_candidates(const GridMenus &menus, std::uint64_t seed)
{
  std::vector<MlpConfig> out;
  for (int layers : menus.hidden_layers)
  {
    for (int neurons : menus.neurons)
    {
      for (double dropout : menus.dropout)
      {
        for (double lr : menus.max_lr)
        {
          for (int batch : menus.batch)
          {
            MlpConfig c;
            c.hidden_layers = layers;
            c.neurons = neurons;
            c.dropout = dropout;
            c.max_lr = lr;
            c.batch = batch;
            c.epochs = menus.epochs;
            c.seed = seed;
            out.push_back(c);
          }
        }
      }
    }
  }
  return out;
}

std::vector<std::size_t> select_candidates(std::size_t space, std::size_t budget, std::uint64_t seed)
{
  std::vector<std::size_t> idx(space);
  std::iota(idx.begin(), idx.end(), 0);
  if (budget == 0 || budget >= space)
  {
    return idx;
  }
  Rng rng(derive_seed(seed, 0x67726964));
  // Partial Fisher-Yates: the first `budget` slots are a uniform subset.
  for (std::size_t i = 0; i < budget; ++i)
  {
    std::swap(idx[i], idx[i + rng.index(space - i)]);
  }
  idx.resize(budget);
  std::sort(idx.begin(), idx.end());
  return idx;
}

GridSearchResult grid_search(const GridMenus &menus, const nn::Tensor<float> &features,
                             const nn::Tensor<float> &encodings, const GridSearchOptions &options)
{
  const auto space = enumerate_candidates(menus, options.seed);
  if (space.empty())
  {
    throw ConfigError("grid search menus produce no candidates");
  }
  if (features.rank() != 2 || encodings.rank() != 2 || features.dim(0) != encodings.dim(0))
  {
    throw DimensionMismatch("grid search needs feature and encoding matrices with equal row counts");
  }
  const auto [tr, va] =
      autoenc::split_indices(features.dim(0), options.validation_fraction, derive_seed(options.seed, 3));
  if (va.empty())
  {
    throw ConfigError("grid search needs a non-empty validation split");
  }
  const auto xtr = nn::gather_rows(features, std::span<const std::size_t>(tr));
  const auto ytr = nn::gather_rows(encodings, std::span<const std::size_t>(tr));
  const auto xva = nn::gather_rows(features, std::span<const std::size_t>(va));
  const auto yva = nn::gather_rows(encodings, std::span<const std::size_t>(va));

  GridSearchResult result;
  result.space_size = space.size();
  for (std::size_t index : select_candidates(space.size(), options.budget, options.seed))
  {
    CandidateResult c;
    c.index = index;
    c.config = space[index];
    try
    {
      const auto trained = train_phi(xtr, ytr, c.config, &xva, &yva);
      c.best_validation_mse = trained.report.best_validation_mse;
      c.baseline_validation_mse = trained.report.baseline_validation_mse;
      c.best_epoch = trained.report.best_epoch;
      if (!std::isfinite(c.best_validation_mse) ||
          c.best_validation_mse > options.divergence_factor * c.baseline_validation_mse)
      {
        c.failed = true;
        c.failure = "diverged: best validation MSE exceeds the divergence threshold";
      }
    }
    catch (const NonFiniteLoss &e)
    {
      c.failed = true;
      c.failure = std::string("diverged: ") + e.what() + " at epoch " + std::to_string(e.epoch());
      c.best_validation_mse = INFINITY;
    }
    catch (const Error &e)
    {
      c.failed = true;
      c.failure = e.what();
      c.best_validation_mse = INFINITY;
    }
    if (options.on_candidate)
    {
      options.on_candidate(c);
    }
    result.ranked.push_back(c);
  }
  std::stable_sort(result.ranked.begin(), result.ranked.end(), [](const CandidateResult &a, const CandidateResult &b) {
    if (a.failed != b.failed)
    {
      return !a.failed;
    }
    if (!a.failed && a.best_validation_mse != b.best_validation_mse)
    {
      return a.best_validation_mse < b.best_validation_mse;
    }
    return a.index < b.index;
  });
  return result;
}

}  // namespace romforge::rom
