// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "romforge/nn/optim.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "romforge/common/error.hpp"

namespace romforge::nn
{

template <typename T>
void adam_step(std::span<Parameter<T> *const> params, AdamState &state, double lr)
{
  if (state.first_moment.empty())
  {
    for (const auto *p : params)
    {
      state.first_moment.emplace_back(p->value.size(), 0.0);
      state.second_moment.emplace_back(p->value.size(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size())
  {
    throw ShapeMismatch(describe_shapes("adam parameter count",
                                        std::to_string(state.first_moment.size()),
                                        std::to_string(params.size())));
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k)
  {
    Parameter<T> &p = *params[k];
    auto &m = state.first_moment[k];
    auto &v = state.second_moment[k];
    if (m.size() != p.value.size() || p.grad.size() != p.value.size())
    {
      throw ShapeMismatch("adam moment size differs from parameter " + p.name);
    }
    for (std::size_t i = 0; i < m.size(); ++i)
    {
      const double g = p.grad[i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p.value[i] = static_cast<T>(p.value[i] - lr * mhat / (std::sqrt(vhat) + state.eps));
    }
  }
}

template void adam_step<float>(std::span<Parameter<float> *const>, AdamState &, double);
template void adam_step<double>(std::span<Parameter<double> *const>, AdamState &, double);

long OneCycleSchedule::peak_step() const
{
  return std::lround(warmup_fraction * static_cast<double>(total_steps));
}

double one_cycle_lr(const OneCycleSchedule &schedule, long step)
{
  if (step < 0 || step > schedule.total_steps)
  {
    throw StepOutOfRange("step " + std::to_string(step) + " outside [0, " +
                         std::to_string(schedule.total_steps) + "]");
  }
  const long peak = schedule.peak_step();
  const auto cosine = [](double from, double to, double frac) {
    return to + (from - to) * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
  };
  if (step == peak)
  {
    return schedule.max_lr;
  }
  if (step < peak)
  {
    return cosine(schedule.initial_lr(), schedule.max_lr,
                  static_cast<double>(step) / static_cast<double>(peak));
  }
  return cosine(schedule.max_lr, schedule.final_lr(),
                static_cast<double>(step - peak) / static_cast<double>(schedule.total_steps - peak));
}

}  // namespace romforge::nn
