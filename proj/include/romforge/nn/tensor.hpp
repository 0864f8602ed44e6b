// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ROMFORGE_NN_TENSOR_HPP
#define ROMFORGE_NN_TENSOR_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace romforge::nn
{

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape &shape);
std::string shape_string(const Shape &shape);

/// Dense row-major array. Batched image data uses (N, C, H, W).
template <typename T>
class Tensor
{
public:
  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0));
  Tensor(Shape shape, std::vector<T> data);

  const Shape &shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_[i]; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T *data() { return data_.data(); }
  const T *data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::vector<T> &storage() { return data_; }
  const std::vector<T> &storage() const { return data_; }

  T &operator[](std::size_t i) { return data_[i]; }
  T operator[](std::size_t i) const { return data_[i]; }

  /// Same data, new shape of equal size. Throws ShapeMismatch otherwise.
  Tensor reshaped(Shape shape) const &;
  Tensor reshaped(Shape shape) &&;

  void fill(T value);

  /// Rows [begin, end) along the leading dimension.
  Tensor slice_rows(std::size_t begin, std::size_t end) const;

  template <typename U>
  Tensor<U> cast() const
  {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor<U>(shape_, std::move(out));
  }

private:
  Shape shape_;
  std::vector<T> data_;
};

/// Stacks the rows listed in `indices` along the leading dimension.
template <typename T>
Tensor<T> gather_rows(const Tensor<T> &source, std::span<const std::size_t> indices);

/// Trainable array with its gradient (same shape).
template <typename T>
struct Parameter
{
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace romforge::nn

#endif  // ROMFORGE_NN_TENSOR_HPP
