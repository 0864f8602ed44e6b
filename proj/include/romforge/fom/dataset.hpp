// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ROMFORGE_FOM_DATASET_HPP
#define ROMFORGE_FOM_DATASET_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "romforge/fom/fom.hpp"
#include "romforge/geometry/geometry.hpp"

namespace romforge::fom
{

/// Equation coefficients versus exact geometric descriptors.
enum class ParamRole
{
  Equation,
  Geometry
};

struct ParamInfo
{
  std::string name;
  ParamRole role = ParamRole::Equation;

  bool operator==(const ParamInfo &) const = default;
};

/// N (parameters, solution, characteristic bitmap) triplets on a grid x grid
/// mesh. Values are stored in 32-bit to match the on-disk format exactly.
struct SnapshotDataset
{
  geometry::Problem problem = geometry::Problem::Ellipse;
  int grid = 0;
  std::uint64_t seed = 0;
  double hole_value = 1.0;
  std::vector<ParamInfo> schema;
  std::vector<geometry::DomainSpec> domains;
  std::vector<float> params;            ///< N x k
  std::vector<float> solutions;         ///< N x grid x grid, raw FOM values
  std::vector<std::uint8_t> masks;      ///< N x grid x grid, {0, 1}

  std::size_t size() const { return domains.size(); }
  std::size_t param_dim() const { return schema.size(); }
  std::size_t pixels() const { return static_cast<std::size_t>(grid) * grid; }

  std::span<const float> param_row(std::size_t i) const
  {
    return {params.data() + i * param_dim(), param_dim()};
  }
  std::span<const float> solution(std::size_t i) const
  {
    return {solutions.data() + i * pixels(), pixels()};
  }
  std::span<const std::uint8_t> mask(std::size_t i) const
  {
    return {masks.data() + i * pixels(), pixels()};
  }

  bool has_geometry_params() const;
  geometry::CharacteristicBitmap bitmap(std::size_t i) const;
  Field field(std::size_t i) const;
};

struct GenerateOptions
{
  geometry::Problem problem = geometry::Problem::Ellipse;
  std::size_t n = 1;
  int grid = 64;
  std::uint64_t seed = 0;
  double linear_solver_tol = 1e-8;
  /// When set, mu is drawn uniformly from this range and appended to the
  /// parameter vector; otherwise mu = 1 and is not recorded.
  std::optional<std::pair<double, double>> mu_range;
  geometry::SamplingLimits limits;
};

/// Parameter schema for a problem (optionally with mu).
std::vector<ParamInfo> parameter_schema(geometry::Problem problem, bool with_mu);

/// Sample i uses seed + i, so output is independent of evaluation order.
/// Solver failures are rethrown with the sample index attached.
SnapshotDataset generate_dataset(const GenerateOptions &options);

/// Characteristic bitmaps only (no solves), for domain-autoencoder training.
std::vector<geometry::CharacteristicBitmap> sample_bitmaps(geometry::Problem problem,
                                                           std::size_t count, int grid,
                                                           std::uint64_t seed,
                                                           const geometry::SamplingLimits &limits = {});

}  // namespace romforge::fom

#endif  // ROMFORGE_FOM_DATASET_HPP
