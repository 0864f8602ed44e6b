// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ROMFORGE_NN_GRAD_CHECK_HPP
#define ROMFORGE_NN_GRAD_CHECK_HPP

#include <cstdint>
#include <functional>
#include <string>

#include "romforge/nn/loss.hpp"
#include "romforge/nn/sequential.hpp"

namespace romforge::nn
{

using ScalarLoss = std::function<LossResult<double>(const Tensor<double> &)>;

struct GradCheckOptions
{
  double h = 1e-5;
  bool training = true;  ///< batch norm uses batch statistics when true
  /// Entries probed per tensor; 0 probes all of them.
  std::size_t max_entries_per_tensor = 0;
  std::uint64_t seed = 0;
  /// Denominator floor of the relative error. Gradients below it are
  /// compared absolutely, which keeps round-off on exact zeros (a bias feeding
  /// batch norm) from registering as a large relative error.
  double floor = 1e-5;
};

struct GradCheckResult
{
  double max_relative_error = 0.0;
  std::string worst;  ///< "input[17]" or "3.weight[5]"
  std::size_t checked = 0;
};

/// Compares analytic input and parameter gradients of loss(net(input))
/// against central differences. Dropout masks are frozen for the duration.
/// Smallest |input| seen by any LeakyReLU in a training-mode forward pass.
/// Central differences are only meaningful when this exceeds the
/// perturbation that reaches those inputs.
double leaky_relu_margin(Sequential<double> &net, const Tensor<double> &input, bool training = true);

GradCheckResult grad_check(Sequential<double> &net, const Tensor<double> &input,
                           const ScalarLoss &loss, const GradCheckOptions &options = {});

}  // namespace romforge::nn

#endif  // ROMFORGE_NN_GRAD_CHECK_HPP
