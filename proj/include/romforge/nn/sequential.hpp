// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ROMFORGE_NN_SEQUENTIAL_HPP
#define ROMFORGE_NN_SEQUENTIAL_HPP

#include <cstdint>
#include <memory>
#include <vector>

#include "romforge/nn/layers.hpp"

namespace romforge::nn
{

/// A chain of layers. Copying is explicit through clone().
template <typename T>
class Sequential
{
public:
  Sequential() = default;
  Sequential(const std::vector<LayerSpec> &specs, std::uint64_t seed);

  Sequential(Sequential &&) noexcept = default;
  Sequential &operator=(Sequential &&) noexcept = default;

  Sequential clone() const;

  /// Same architecture and state in another precision.
  template <typename U>
  Sequential<U> converted() const;

  std::size_t size() const { return layers_.size(); }
  bool empty() const { return layers_.empty(); }
  Layer<T> &layer(std::size_t i) { return *layers_[i]; }
  const Layer<T> &layer(std::size_t i) const { return *layers_[i]; }
  std::vector<LayerSpec> specs() const;

  Tensor<T> forward(const Tensor<T> &input, bool training);
  Tensor<T> backward(const Tensor<T> &upstream, bool need_input_grad = true);

  /// Runs layers [begin, end) only; backward_range must mirror the same range.
  Tensor<T> forward_range(const Tensor<T> &input, bool training, std::size_t begin, std::size_t end);
  Tensor<T> backward_range(const Tensor<T> &upstream, bool need_input_grad, std::size_t begin,
                           std::size_t end);

  /// Output shape of every layer for the given input shape.
  std::vector<Shape> trace(const Shape &input) const;
  Shape output_shape(const Shape &input) const;

  std::vector<Parameter<T> *> parameters();
  std::size_t parameter_count() const;

  /// Every persistent array (parameters and buffers) with a stable name
  /// such as "3.weight".
  struct NamedArray
  {
    std::string name;
    Tensor<T> *value;
  };
  std::vector<NamedArray> state();
  std::vector<Tensor<T>> state_snapshot() const;
  void load_state_snapshot(const std::vector<Tensor<T>> &snapshot);

  void set_dropout_frozen(bool frozen);

private:
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

extern template class Sequential<float>;
extern template class Sequential<double>;

}  // namespace romforge::nn

#endif  // ROMFORGE_NN_SEQUENTIAL_HPP
