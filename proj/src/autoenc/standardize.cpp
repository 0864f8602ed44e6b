// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "romforge/autoenc/standardize.hpp"

#include <cmath>
#include <string>

#include "romforge/common/error.hpp"

namespace romforge::autoenc
{

void compute_solution_stats(std::span<const float> values, StandardizationStats &stats)
{
  if (values.empty())
  {
    throw DegenerateFeature("cannot compute statistics of an empty solution set");
  }
  double mean = 0.0;
  for (float v : values)
  {
    mean += v;
  }
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (float v : values)
  {
    var += (v - mean) * (v - mean);
  }
  var /= static_cast<double>(values.size());
  if (!(var > 0.0))
  {
    throw DegenerateFeature("solution values are constant; standard deviation is zero");
  }
  stats.solution_mean = mean;
  stats.solution_std = std::sqrt(var);
}

void compute_feature_stats(const nn::Tensor<float> &features, StandardizationStats &stats,
                           DegeneratePolicy policy)
{
  if (features.rank() != 2 || features.dim(0) == 0)
  {
    throw DegenerateFeature("feature statistics need a non-empty (N, k) matrix, got " +
                            nn::shape_string(features.shape()));
  }
  const std::size_t n = features.dim(0);
  const std::size_t k = features.dim(1);
  stats.feature_mean.assign(k, 0.0);
  stats.feature_std.assign(k, 0.0);
  stats.degenerate_features.clear();
  for (std::size_t j = 0; j < k; ++j)
  {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
      mean += features[i * k + j];
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
      const double d = features[i * k + j] - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    stats.feature_mean[j] = mean;
    if (var > 0.0)
    {
      stats.feature_std[j] = std::sqrt(var);
      continue;
    }
    if (policy == DegeneratePolicy::Error)
    {
      throw DegenerateFeature("feature column " + std::to_string(j) + " is constant");
    }
    stats.feature_std[j] = 1.0;
    stats.degenerate_features.push_back(j);
  }
}

void standardize_solutions(std::span<float> values, const StandardizationStats &stats)
{
  for (float &v : values)
  {
    v = static_cast<float>((v - stats.solution_mean) / stats.solution_std);
  }
}

double destandardize_solution(double value, const StandardizationStats &stats)
{
  return stats.solution_std * value + stats.solution_mean;
}

void destandardize_solutions(std::span<float> values, const StandardizationStats &stats)
{
  for (float &v : values)
  {
    v = static_cast<float>(destandardize_solution(v, stats));
  }
}

namespace
{

std::size_t feature_count(const nn::Tensor<float> &features, const StandardizationStats &stats)
{
  const std::size_t k = stats.feature_mean.size();
  if (features.rank() == 0 || features.dim(features.rank() - 1) != k)
  {
    throw DimensionMismatch("feature width " +
                            std::to_string(features.rank() ? features.dim(features.rank() - 1) : 0) +
                            " does not match the " + std::to_string(k) + " standardization columns");
  }
  return k;
}

}  // namespace

void standardize_features(nn::Tensor<float> &features, const StandardizationStats &stats)
{
  const std::size_t k = feature_count(features, stats);
  for (std::size_t i = 0; i < features.size(); ++i)
  {
    const std::size_t j = i % k;
    features[i] = static_cast<float>((features[i] - stats.feature_mean[j]) / stats.feature_std[j]);
  }
}

void destandardize_features(nn::Tensor<float> &features, const StandardizationStats &stats)
{
  const std::size_t k = feature_count(features, stats);
  for (std::size_t i = 0; i < features.size(); ++i)
  {
    const std::size_t j = i % k;
    features[i] = static_cast<float>(features[i] * stats.feature_std[j] + stats.feature_mean[j]);
  }
}

}  // namespace romforge::autoenc
