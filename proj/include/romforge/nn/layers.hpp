// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ROMFORGE_NN_LAYERS_HPP
#define ROMFORGE_NN_LAYERS_HPP

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "romforge/common/rng.hpp"
#include "romforge/nn/tensor.hpp"

namespace romforge::nn
{

struct Conv2dSpec
{
  int in_channels = 1;
  int out_channels = 1;
  int kernel = 5;
  int stride = 1;
  int padding = 2;
  bool operator==(const Conv2dSpec &) const = default;
};

struct LinearSpec
{
  int in_features = 1;
  int out_features = 1;
  bool operator==(const LinearSpec &) const = default;
};

/// Normalizes dimension 1 of (N, C) or (N, C, H, W) input.
struct BatchNormSpec
{
  int channels = 1;
  double eps = 1e-5;
  double momentum = 0.1;
  bool operator==(const BatchNormSpec &) const = default;
};

struct LeakyReluSpec
{
  double slope = 0.01;
  bool operator==(const LeakyReluSpec &) const = default;
};

struct DropoutSpec
{
  double rate = 0.0;
  bool operator==(const DropoutSpec &) const = default;
};

struct Upsample2xSpec
{
  bool operator==(const Upsample2xSpec &) const = default;
};

struct SigmoidSpec
{
  bool operator==(const SigmoidSpec &) const = default;
};

struct FlattenSpec
{
  bool operator==(const FlattenSpec &) const = default;
};

/// Per-sample target shape; the batch dimension is kept.
struct ReshapeSpec
{
  std::vector<std::size_t> shape;
  bool operator==(const ReshapeSpec &) const = default;
};

using LayerSpec = std::variant<Conv2dSpec, LinearSpec, BatchNormSpec, LeakyReluSpec, DropoutSpec,
                               Upsample2xSpec, SigmoidSpec, FlattenSpec, ReshapeSpec>;

std::string layer_name(const LayerSpec &spec);

/// Non-trainable persistent state (batch-norm running statistics).
template <typename T>
struct Buffer
{
  std::string name;
  Tensor<T> value;
};

/// A differentiable map with optional parameters.
///
/// backward() consumes the context saved by the last forward() and writes
/// (not accumulates) the parameter gradients.
template <typename T>
class Layer
{
public:
  virtual ~Layer() = default;

  virtual LayerSpec spec() const = 0;
  virtual Shape output_shape(const Shape &input) const = 0;
  virtual Tensor<T> forward(const Tensor<T> &input, bool training) = 0;
  virtual Tensor<T> backward(const Tensor<T> &upstream, bool need_input_grad = true) = 0;

  virtual std::vector<Parameter<T> *> parameters() { return {}; }
  virtual std::vector<Buffer<T> *> buffers() { return {}; }
};

/// Builds a layer with weights initialised uniformly in +-sqrt(1 / fan_in).
template <typename T>
std::unique_ptr<Layer<T>> make_layer(const LayerSpec &spec, Rng &rng);

/// Dropout exposes mask freezing so finite-difference checks see a fixed map.
template <typename T>
class DropoutLayer;

template <typename T>
void freeze_dropout_mask(Layer<T> &layer, bool frozen);

}  // namespace romforge::nn

#endif  // ROMFORGE_NN_LAYERS_HPP
