// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "romforge/nn/loss.hpp"

#include <algorithm>
#include <cmath>

#include "romforge/common/error.hpp"

namespace romforge::nn
{

namespace
{

template <typename T>
void check_shapes(const char *what, const Tensor<T> &a, const Tensor<T> &b)
{
  if (a.shape() != b.shape())
  {
    throw ShapeMismatch(describe_shapes(what, shape_string(b.shape()), shape_string(a.shape())));
  }
  if (a.empty())
  {
    throw ShapeMismatch(std::string(what) + ": empty input");
  }
}

}  // namespace

template <typename T>
LossResult<T> mse_loss(const Tensor<T> &prediction, const Tensor<T> &target)
{
  check_shapes("mse_loss", prediction, target);
  LossResult<T> r{0.0, Tensor<T>(prediction.shape())};
  const double count = static_cast<double>(prediction.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < prediction.size(); ++i)
  {
    const double d = static_cast<double>(prediction[i]) - target[i];
    sum += d * d;
    r.grad[i] = static_cast<T>(2.0 * d / count);
  }
  r.loss = sum / count;
  return r;
}

template <typename T>
LossResult<T> bce_loss(const Tensor<T> &probabilities, const Tensor<T> &target)
{
  check_shapes("bce_loss", probabilities, target);
  constexpr double clamp = 1e-12;
  LossResult<T> r{0.0, Tensor<T>(probabilities.shape())};
  const double count = static_cast<double>(probabilities.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i)
  {
    const double x = std::clamp(static_cast<double>(probabilities[i]), clamp, 1.0 - clamp);
    const double y = target[i];
    sum += -y * std::log(x) - (1.0 - y) * std::log(1.0 - x);
    r.grad[i] = static_cast<T>((x - y) / (x * (1.0 - x)) / count);
  }
  r.loss = sum / count;
  return r;
}

template <typename T>
LossResult<T> bce_with_logits_loss(const Tensor<T> &logits, const Tensor<T> &target)
{
  check_shapes("bce_with_logits_loss", logits, target);
  LossResult<T> r{0.0, Tensor<T>(logits.shape())};
  const double count = static_cast<double>(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i)
  {
    const double z = logits[i];
    const double y = target[i];
    const double e = std::exp(-std::abs(z));
    sum += std::max(z, 0.0) - z * y + std::log1p(e);
    const double sigma = z >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
    r.grad[i] = static_cast<T>((sigma - y) / count);
  }
  r.loss = sum / count;
  return r;
}

template LossResult<float> mse_loss(const Tensor<float> &, const Tensor<float> &);
template LossResult<double> mse_loss(const Tensor<double> &, const Tensor<double> &);
template LossResult<float> bce_loss(const Tensor<float> &, const Tensor<float> &);
template LossResult<double> bce_loss(const Tensor<double> &, const Tensor<double> &);
template LossResult<float> bce_with_logits_loss(const Tensor<float> &, const Tensor<float> &);
template LossResult<double> bce_with_logits_loss(const Tensor<double> &, const Tensor<double> &);

}  // namespace romforge::nn
