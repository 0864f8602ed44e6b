// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "romforge/fom/dataset.hpp"

#include <string>

#include "romforge/common/error.hpp"
#include "romforge/common/rng.hpp"

namespace romforge::fom
{

bool SnapshotDataset::has_geometry_params() const
{
  for (const auto &p : schema)
  {
    if (p.role == ParamRole::Geometry)
    {
      return true;
    }
  }
  return false;
}

geometry::CharacteristicBitmap SnapshotDataset::bitmap(std::size_t i) const
{
  const auto m = mask(i);
  return {grid, grid, std::vector<std::uint8_t>(m.begin(), m.end())};
}

Field SnapshotDataset::field(std::size_t i) const
{
  Field f(grid, grid);
  const auto s = solution(i);
  for (std::size_t k = 0; k < s.size(); ++k)
  {
    f.values[k] = s[k];
  }
  return f;
}

std::vector<ParamInfo> parameter_schema(geometry::Problem problem, bool with_mu)
{
  std::vector<ParamInfo> schema;
  if (problem == geometry::Problem::Ellipse)
  {
    schema = {{"phi", ParamRole::Equation}, {"x0", ParamRole::Geometry},
              {"y0", ParamRole::Geometry},  {"alpha", ParamRole::Geometry},
              {"a", ParamRole::Geometry},   {"b", ParamRole::Geometry},
              {"beta", ParamRole::Equation}};
  }
  else
  {
    schema = {{"phi", ParamRole::Equation}, {"beta", ParamRole::Equation}};
  }
  if (with_mu)
  {
    schema.push_back({"mu", ParamRole::Equation});
  }
  return schema;
}

SnapshotDataset generate_dataset(const GenerateOptions &options)
{
  if (options.n < 1)
  {
    throw ConfigError("dataset size must be at least 1");
  }
  SnapshotDataset ds;
  ds.problem = options.problem;
  ds.grid = options.grid;
  ds.seed = options.seed;
  ds.hole_value = options.problem == geometry::Problem::Ellipse ? 1.0 : 2.0;
  ds.schema = parameter_schema(options.problem, options.mu_range.has_value());
  const std::size_t k = ds.schema.size();
  const std::size_t px = ds.pixels();
  ds.params.reserve(options.n * k);
  ds.solutions.reserve(options.n * px);
  ds.masks.reserve(options.n * px);

  FomConfig config;
  config.grid_n = options.grid;
  config.linear_solver_tol = options.linear_solver_tol;

  for (std::size_t i = 0; i < options.n; ++i)
  {
    const std::uint64_t sample_seed = options.seed + i;
    geometry::SampledProblem sample =
        geometry::sample_problem(options.problem, sample_seed, options.limits);
    if (options.mu_range)
    {
      Rng mu_rng(derive_seed(sample_seed, 0x6d75));
      sample.params.mu = mu_rng.uniform(options.mu_range->first, options.mu_range->second);
    }

    std::vector<double> lambda = options.problem == geometry::Problem::Ellipse
                                     ? geometry::ellipse_parameter_vector(sample)
                                     : std::vector<double>{sample.params.phi, sample.params.beta};
    if (options.mu_range)
    {
      lambda.push_back(sample.params.mu);
    }

    Field u;
    try
    {
      u = solve_benchmark(sample.domain, sample.params, config);
    }
    catch (const SolverDiverged &e)
    {
      throw SolverDiverged("sample " + std::to_string(i) + ": " + e.what(), e.residual(),
                           static_cast<long>(i));
    }
    const auto bitmap = geometry::rasterize(sample.domain, options.grid, options.grid);

    for (double v : lambda)
    {
      ds.params.push_back(static_cast<float>(v));
    }
    for (double v : u.values)
    {
      ds.solutions.push_back(static_cast<float>(v));
    }
    ds.masks.insert(ds.masks.end(), bitmap.pixels.begin(), bitmap.pixels.end());
    ds.domains.push_back(std::move(sample.domain));
  }
  return ds;
}

std::vector<geometry::CharacteristicBitmap> sample_bitmaps(geometry::Problem problem,
                                                           std::size_t count, int grid,
                                                           std::uint64_t seed,
                                                           const geometry::SamplingLimits &limits)
{
  std::vector<geometry::CharacteristicBitmap> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
  {
    const auto sample = geometry::sample_problem(problem, seed + i, limits);
    out.push_back(geometry::rasterize(sample.domain, grid, grid));
  }
  return out;
}

}  // namespace romforge::fom
