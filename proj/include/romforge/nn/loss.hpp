// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ROMFORGE_NN_LOSS_HPP
#define ROMFORGE_NN_LOSS_HPP

#include "romforge/nn/tensor.hpp"

namespace romforge::nn
{

template <typename T>
struct LossResult
{
  double loss = 0.0;
  Tensor<T> grad;  ///< d loss / d prediction
};

/// Mean of squared differences; grad = 2 (prediction - target) / count.
template <typename T>
LossResult<T> mse_loss(const Tensor<T> &prediction, const Tensor<T> &target);

/// Binary cross-entropy on probabilities, averaged over all pixels.
/// Probabilities are clamped to [1e-12, 1 - 1e-12] before the logarithm.
template <typename T>
LossResult<T> bce_loss(const Tensor<T> &probabilities, const Tensor<T> &target);

/// The same loss evaluated from logits, z -> sigmoid(z), in the stable form
/// max(z, 0) - z y + log(1 + exp(-|z|)). grad is with respect to the logits.
template <typename T>
LossResult<T> bce_with_logits_loss(const Tensor<T> &logits, const Tensor<T> &target);

}  // namespace romforge::nn

#endif  // ROMFORGE_NN_LOSS_HPP
