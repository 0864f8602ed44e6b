// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "romforge/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "romforge/common/error.hpp"

namespace romforge::metrics
{

namespace
{

double masked_norm(const fom::Field &u, const fom::Field &u_hat, const geometry::CharacteristicBitmap &d)
{
  if (u.height != u_hat.height || u.width != u_hat.width || u.height != d.height || u.width != d.width ||
      u.values.size() != u_hat.values.size())
  {
    throw ShapeMismatch(describe_shapes("relative error", std::to_string(u.height) + "x" + std::to_string(u.width),
                                        std::to_string(u_hat.height) + "x" + std::to_string(u_hat.width) +
                                            " prediction, " + std::to_string(d.height) + "x" +
                                            std::to_string(d.width) + " mask"));
  }
  double den = 0.0;
  for (std::size_t k = 0; k < u.values.size(); ++k)
  {
    den += d.pixels[k] ? u.values[k] * u.values[k] : 0.0;
  }
  if (!(den > 0.0))
  {
    throw ZeroDenominator("masked reference solution is identically zero");
  }
  return std::sqrt(den);
}

}  // namespace

double relative_error(const fom::Field &u, const fom::Field &u_hat, const geometry::CharacteristicBitmap &d)
{
  const double den = masked_norm(u, u_hat, d);
  double num = 0.0;
  for (std::size_t k = 0; k < u.values.size(); ++k)
  {
    if (d.pixels[k])
    {
      const double diff = u.values[k] - u_hat.values[k];
      num += diff * diff;
    }
  }
  return std::sqrt(num) / den;
}

fom::Field relative_error_field(const fom::Field &u, const fom::Field &u_hat, const geometry::CharacteristicBitmap &d)
{
  const double den = masked_norm(u, u_hat, d);
  fom::Field e;
  e.height = u.height;
  e.width = u.width;
  e.values.resize(u.values.size());
  for (std::size_t k = 0; k < u.values.size(); ++k)
  {
    e.values[k] = d.pixels[k] ? (u.values[k] - u_hat.values[k]) / den : 0.0;
  }
  return e;
}

ErrorSummary summarize(const std::vector<double> &errors)
{
  ErrorSummary s;
  if (errors.empty())
  {
    return s;
  }
  std::vector<double> sorted(errors);
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  s.mean = std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(n);
  s.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  s.min = sorted.front();
  s.max = sorted.back();
  return s;
}

EvalReport evaluate_predictions(const fom::SnapshotDataset &ds, const std::vector<fom::Field> &predictions,
                                const EvalOptions &options)
{
  if (predictions.size() != ds.size())
  {
    throw DimensionMismatch(std::to_string(predictions.size()) + " predictions for " + std::to_string(ds.size()) +
                            " samples");
  }
  EvalReport r;
  r.errors.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i)
  {
    try
    {
      r.errors.push_back(relative_error(ds.field(i), predictions[i], ds.bitmap(i)));
    }
    catch (const Error &e)
    {
      throw Error(e.category(), "sample " + std::to_string(i) + ": " + e.what());
    }
  }
  r.summary = summarize(r.errors);
  if (options.include_pixel_errors && !r.errors.empty())
  {
    std::vector<std::size_t> order(r.errors.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return r.errors[a] < r.errors[b]; });
    const std::pair<const char *, std::size_t> picks[] = {
        {"best", order.front()}, {"median", order[order.size() / 2]}, {"worst", order.back()}};
    for (const auto &[label, i] : picks)
    {
      r.pixel_errors.push_back({label, i, r.errors[i], relative_error_field(ds.field(i), predictions[i], ds.bitmap(i))});
    }
  }
  return r;
}

EvalReport evaluate(rom::RomBundle &bundle, const fom::SnapshotDataset &ds, const EvalOptions &options)
{
  if (ds.grid != bundle.grid)
  {
    throw DimensionMismatch("dataset grid " + std::to_string(ds.grid) + " differs from the bundle grid " +
                            std::to_string(bundle.grid));
  }
  if (ds.schema != bundle.param_schema)
  {
    throw ModeMismatch("dataset parameter schema differs from the bundle schema");
  }
  const auto predictions = rom::online_batch(bundle, ds.params, ds.masks, ds.size());
  EvalReport r = evaluate_predictions(ds, predictions, options);
  r.mode = rom::mode_name(bundle.mode);
  return r;
}

double sensitivity_reference(double ratio)
{
  const std::pair<double, double> table[] = {{1.0, 0.0101}, {0.95, 0.0120}, {0.9, 0.0142}, {0.8, 0.0166}};
  for (const auto &[r, e] : table)
  {
    if (std::abs(r - ratio) < 1e-12)
    {
      return e;
    }
  }
  return -1.0;
}

geometry::SampledProblem sensitivity_base_domain()
{
  using geometry::HoleShape;
  geometry::SampledProblem p;
  p.domain.holes = {HoleShape::circle(0.66555, 0.35233, 0.11191), HoleShape::circle(0.56892, 0.71108, 0.12318),
                    HoleShape::circle(0.25424, 0.21219, 0.10707), HoleShape::circle(0.22812, 0.58991, 0.10653)};
  p.params.phi = 1.71657;
  p.params.beta = 1.19617;
  p.params.dirichlet_hole_value = 2.0;
  return p;
}

std::vector<SensitivityRow> sensitivity_sweep(rom::RomBundle &bundle, const geometry::DomainSpec &base,
                                              const fom::EquationParams &params, const std::vector<double> &ratios,
                                              const fom::FomConfig &fom_config)
{
  if (fom_config.grid_n != bundle.grid)
  {
    throw DimensionMismatch("full-model grid differs from the bundle grid");
  }
  std::vector<SensitivityRow> rows;
  for (double ratio : ratios)
  {
    // Validates the ratio and the all-circles precondition; ratio 1 then
    // falls back to the undeformed circles exactly.
    geometry::DomainSpec deformed = geometry::perturb_circles_to_ellipses(base, ratio);
    if (ratio == 1.0)
    {
      deformed = base;
    }
    const fom::Field u = fom::solve_benchmark(deformed, params, fom_config);
    const auto bitmap = geometry::rasterize(deformed, bundle.grid, bundle.grid);
    const auto lambda = rom::parameter_row(bundle.param_schema, deformed, params);
    const fom::Field u_hat = rom::online(bundle, lambda, bitmap);
    rows.push_back({ratio, relative_error(u, u_hat, bitmap), sensitivity_reference(ratio)});
  }
  return rows;
}

}  // namespace romforge::metrics
