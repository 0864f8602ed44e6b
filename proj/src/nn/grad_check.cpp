// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "romforge/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "romforge/common/rng.hpp"

namespace romforge::nn
{

namespace
{

std::vector<std::size_t> probe_indices(std::size_t size, std::size_t limit, Rng &rng)
{
  std::vector<std::size_t> idx;
  if (limit == 0 || size <= limit)
  {
    idx.resize(size);
    for (std::size_t i = 0; i < size; ++i)
    {
      idx[i] = i;
    }
    return idx;
  }
  for (std::size_t k = 0; k < limit; ++k)
  {
    idx.push_back(rng.index(size));
  }
  return idx;
}

}  // namespace

GradCheckResult grad_check(Sequential<double> &net, const Tensor<double> &input,
                           const ScalarLoss &loss, const GradCheckOptions &options)
{
  net.set_dropout_frozen(true);
  const auto evaluate = [&](const Tensor<double> &x) { return loss(net.forward(x, options.training)).loss; };

  const LossResult<double> base = loss(net.forward(input, options.training));
  const Tensor<double> input_grad = net.backward(base.grad, true);
  std::vector<Tensor<double>> param_grads;
  for (auto *p : net.parameters())
  {
    param_grads.push_back(p->grad);
  }

  GradCheckResult result;
  const auto record = [&](double analytic, double numeric, const std::string &where) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), options.floor});
    const double rel = std::abs(analytic - numeric) / denom;
    ++result.checked;
    if (rel > result.max_relative_error || !std::isfinite(rel))
    {
      result.max_relative_error = std::isfinite(rel) ? rel : INFINITY;
      result.worst = where;
    }
  };

  Rng rng(options.seed);
  Tensor<double> x = input;
  for (std::size_t i : probe_indices(x.size(), options.max_entries_per_tensor, rng))
  {
    const double keep = x[i];
    x[i] = keep + options.h;
    const double up = evaluate(x);
    x[i] = keep - options.h;
    const double down = evaluate(x);
    x[i] = keep;
    record(input_grad[i], (up - down) / (2.0 * options.h), "input[" + std::to_string(i) + "]");
  }

  auto state = net.state();
  auto params = net.parameters();
  for (std::size_t k = 0; k < params.size(); ++k)
  {
    Tensor<double> &value = params[k]->value;
    std::string name = params[k]->name;
    for (const auto &named : state)
    {
      if (named.value == &value)
      {
        name = named.name;
      }
    }
    for (std::size_t i : probe_indices(value.size(), options.max_entries_per_tensor, rng))
    {
      const double keep = value[i];
      value[i] = keep + options.h;
      const double up = evaluate(input);
      value[i] = keep - options.h;
      const double down = evaluate(input);
      value[i] = keep;
      record(param_grads[k][i], (up - down) / (2.0 * options.h), name + "[" + std::to_string(i) + "]");
    }
  }
  net.set_dropout_frozen(false);
  return result;
}

double leaky_relu_margin(Sequential<double> &net, const Tensor<double> &input, bool training)
{
  double margin = INFINITY;
  Tensor<double> x = input;
  for (std::size_t i = 0; i < net.size(); ++i)
  {
    if (std::holds_alternative<LeakyReluSpec>(net.layer(i).spec()))
    {
      for (double v : x.values())
      {
        margin = std::min(margin, std::abs(v));
      }
    }
    x = net.forward_range(x, training, i, i + 1);
  }
  return margin;
}

}  // namespace romforge::nn
