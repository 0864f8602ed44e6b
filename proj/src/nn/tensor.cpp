// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "romforge/nn/tensor.hpp"

#include <algorithm>
#include <numeric>

#include "romforge/common/error.hpp"

namespace romforge::nn
{

std::size_t shape_size(const Shape &shape)
{
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape &shape)
{
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i)
  {
    s += (i ? ", " : "") + std::to_string(shape[i]);
  }
  return s + "]";
}

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill)
{
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data))
{
  if (data_.size() != shape_size(shape_))
  {
    throw ShapeMismatch(describe_shapes("tensor data length", std::to_string(shape_size(shape_)),
                                        std::to_string(data_.size())));
  }
}

template <typename T>
Tensor<T> Tensor<T>::reshaped(Shape shape) const &
{
  Tensor copy = *this;
  return std::move(copy).reshaped(std::move(shape));
}

template <typename T>
Tensor<T> Tensor<T>::reshaped(Shape shape) &&
{
  if (shape_size(shape) != data_.size())
  {
    throw ShapeMismatch(describe_shapes("reshape", shape_string(shape), shape_string(shape_)));
  }
  shape_ = std::move(shape);
  return std::move(*this);
}

template <typename T>
void Tensor<T>::fill(T value)
{
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
Tensor<T> Tensor<T>::slice_rows(std::size_t begin, std::size_t end) const
{
  if (shape_.empty() || begin > end || end > shape_[0])
  {
    throw ShapeMismatch("row slice out of range for " + shape_string(shape_));
  }
  const std::size_t row = shape_[0] ? data_.size() / shape_[0] : 0;
  Shape s = shape_;
  s[0] = end - begin;
  return Tensor(std::move(s), std::vector<T>(data_.begin() + static_cast<std::ptrdiff_t>(begin * row),
                                             data_.begin() + static_cast<std::ptrdiff_t>(end * row)));
}

template <typename T>
Tensor<T> gather_rows(const Tensor<T> &source, std::span<const std::size_t> indices)
{
  const std::size_t row = source.dim(0) ? source.size() / source.dim(0) : 0;
  Shape s = source.shape();
  s[0] = indices.size();
  Tensor<T> out(s);
  for (std::size_t k = 0; k < indices.size(); ++k)
  {
    if (indices[k] >= source.dim(0))
    {
      throw ShapeMismatch("gather index out of range");
    }
    std::copy_n(source.data() + indices[k] * row, row, out.data() + k * row);
  }
  return out;
}

template class Tensor<float>;
template class Tensor<double>;
template Tensor<float> gather_rows(const Tensor<float> &, std::span<const std::size_t>);
template Tensor<double> gather_rows(const Tensor<double> &, std::span<const std::size_t>);

}  // namespace romforge::nn
