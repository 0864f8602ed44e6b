// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ROMFORGE_AUTOENC_STANDARDIZE_HPP
#define ROMFORGE_AUTOENC_STANDARDIZE_HPP

#include <span>
#include <vector>

#include "romforge/nn/tensor.hpp"

namespace romforge::autoenc
{

/// Scalar solution statistics and per-feature parameter statistics, all
/// population (biased) deviations over the training set.
struct StandardizationStats
{
  double solution_mean = 0.0;
  double solution_std = 1.0;
  std::vector<double> feature_mean;
  std::vector<double> feature_std;
  /// Columns whose deviation was zero and replaced by 1.
  std::vector<std::size_t> degenerate_features;
};

enum class DegeneratePolicy
{
  PassThrough,  ///< sigma := 1, recorded in degenerate_features
  Error         ///< throw DegenerateFeature
};

/// Throws DegenerateFeature when the values are constant or empty.
void compute_solution_stats(std::span<const float> values, StandardizationStats &stats);

/// `features` is (N, k).
void compute_feature_stats(const nn::Tensor<float> &features, StandardizationStats &stats,
                           DegeneratePolicy policy = DegeneratePolicy::PassThrough);

void standardize_solutions(std::span<float> values, const StandardizationStats &stats);
void destandardize_solutions(std::span<float> values, const StandardizationStats &stats);
double destandardize_solution(double value, const StandardizationStats &stats);

/// In place; the trailing dimension must equal the feature count.
void standardize_features(nn::Tensor<float> &features, const StandardizationStats &stats);
void destandardize_features(nn::Tensor<float> &features, const StandardizationStats &stats);

}  // namespace romforge::autoenc

#endif  // ROMFORGE_AUTOENC_STANDARDIZE_HPP
