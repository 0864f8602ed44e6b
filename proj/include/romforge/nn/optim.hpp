// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ROMFORGE_NN_OPTIM_HPP
#define ROMFORGE_NN_OPTIM_HPP

#include <span>
#include <vector>

#include "romforge/nn/tensor.hpp"

namespace romforge::nn
{

/// Bias-corrected Adam state. Moments are lazily sized on the first step.
struct AdamState
{
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

template <typename T>
void adam_step(std::span<Parameter<T> *const> params, AdamState &state, double lr);

/// Cosine one-cycle schedule: max_lr / div_factor -> max_lr over the warmup
/// fraction, then down to max_lr / final_div_factor at total_steps.
struct OneCycleSchedule
{
  double max_lr = 1e-3;
  long total_steps = 1;
  double warmup_fraction = 0.3;
  double div_factor = 25.0;
  double final_div_factor = 1e4;

  double initial_lr() const { return max_lr / div_factor; }
  double final_lr() const { return max_lr / final_div_factor; }
  long peak_step() const;
};

/// Throws StepOutOfRange outside [0, total_steps].
double one_cycle_lr(const OneCycleSchedule &schedule, long step);

}  // namespace romforge::nn

#endif  // ROMFORGE_NN_OPTIM_HPP
