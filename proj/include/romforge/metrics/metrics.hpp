// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ROMFORGE_METRICS_METRICS_HPP
#define ROMFORGE_METRICS_METRICS_HPP

#include <string>
#include <vector>

#include "romforge/fom/dataset.hpp"
#include "romforge/fom/fom.hpp"
#include "romforge/geometry/geometry.hpp"
#include "romforge/rom/rom.hpp"

namespace romforge::metrics
{

/// ||(u - u_hat) d|| / ||u d|| over the grid. Throws ShapeMismatch for
/// differing shapes and ZeroDenominator when u d vanishes.
double relative_error(const fom::Field &u, const fom::Field &u_hat, const geometry::CharacteristicBitmap &d);

/// Signed per-pixel contributions (u - u_hat) d / ||u d||; their 2-norm is
/// relative_error.
fom::Field relative_error_field(const fom::Field &u, const fom::Field &u_hat,
                                const geometry::CharacteristicBitmap &d);

struct ErrorSummary
{
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

ErrorSummary summarize(const std::vector<double> &errors);

struct PixelErrorSample
{
  std::string label;  ///< "best", "median" or "worst"
  std::size_t index = 0;
  double error = 0.0;
  fom::Field field;
};

struct EvalReport
{
  std::string mode;
  std::string bundle_fingerprint;
  std::string dataset_fingerprint;
  std::vector<double> errors;
  ErrorSummary summary;
  std::vector<PixelErrorSample> pixel_errors;
};

struct EvalOptions
{
  bool include_pixel_errors = true;
};

/// Scores given predictions against a dataset (index-aligned).
EvalReport evaluate_predictions(const fom::SnapshotDataset &dataset, const std::vector<fom::Field> &predictions,
                                const EvalOptions &options = {});

/// Runs the online phase on every sample of a dataset and scores it.
EvalReport evaluate(rom::RomBundle &bundle, const fom::SnapshotDataset &dataset, const EvalOptions &options = {});

struct SensitivityRow
{
  double ratio = 1.0;
  double error = 0.0;
  double reference = -1.0;  ///< published value at this ratio, or -1
};

/// Published relative errors for the deformation ratios 1, 0.95, 0.9, 0.8.
double sensitivity_reference(double ratio);

/// The four-hole circular domain and equation parameters used by the
/// deformation study.
geometry::SampledProblem sensitivity_base_domain();

/// For each ratio: deform the circles, solve the full model, predict with
/// the bundle and score the prediction.
std::vector<SensitivityRow> sensitivity_sweep(rom::RomBundle &bundle, const geometry::DomainSpec &base,
                                              const fom::EquationParams &params, const std::vector<double> &ratios,
                                              const fom::FomConfig &fom_config);

}  // namespace romforge::metrics

#endif  // ROMFORGE_METRICS_METRICS_HPP
