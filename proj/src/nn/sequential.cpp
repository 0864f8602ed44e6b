// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "romforge/nn/sequential.hpp"

#include "romforge/common/error.hpp"

namespace romforge::nn
{

template <typename T>
Sequential<T>::Sequential(const std::vector<LayerSpec> &specs, std::uint64_t seed)
{
  Rng rng(seed);
  layers_.reserve(specs.size());
  for (const auto &spec : specs)
  {
    layers_.push_back(make_layer<T>(spec, rng));
  }
}

template <typename T>
std::vector<LayerSpec> Sequential<T>::specs() const
{
  std::vector<LayerSpec> out;
  out.reserve(layers_.size());
  for (const auto &l : layers_)
  {
    out.push_back(l->spec());
  }
  return out;
}

template <typename T>
Sequential<T> Sequential<T>::clone() const
{
  Sequential copy(specs(), 0);
  copy.load_state_snapshot(state_snapshot());
  return copy;
}

template <typename T>
template <typename U>
Sequential<U> Sequential<T>::converted() const
{
  Sequential<U> copy(specs(), 0);
  std::vector<Tensor<U>> snapshot;
  for (const auto &t : state_snapshot())
  {
    snapshot.push_back(t.template cast<U>());
  }
  copy.load_state_snapshot(snapshot);
  return copy;
}

template <typename T>
Tensor<T> Sequential<T>::forward(const Tensor<T> &input, bool training)
{
  return forward_range(input, training, 0, layers_.size());
}

template <typename T>
Tensor<T> Sequential<T>::backward(const Tensor<T> &upstream, bool need_input_grad)
{
  return backward_range(upstream, need_input_grad, 0, layers_.size());
}

template <typename T>
Tensor<T> Sequential<T>::forward_range(const Tensor<T> &input, bool training, std::size_t begin,
                                       std::size_t end)
{
  if (begin >= end)
  {
    return input;
  }
  Tensor<T> x = layers_[begin]->forward(input, training);
  for (std::size_t i = begin + 1; i < end; ++i)
  {
    x = layers_[i]->forward(x, training);
  }
  return x;
}

template <typename T>
Tensor<T> Sequential<T>::backward_range(const Tensor<T> &upstream, bool need_input_grad,
                                        std::size_t begin, std::size_t end)
{
  if (begin >= end)
  {
    return upstream;
  }
  Tensor<T> g = upstream;
  for (std::size_t i = end; i-- > begin;)
  {
    g = layers_[i]->backward(g, need_input_grad || i > begin);
  }
  return g;
}

template <typename T>
std::vector<Shape> Sequential<T>::trace(const Shape &input) const
{
  std::vector<Shape> out;
  Shape s = input;
  for (const auto &l : layers_)
  {
    s = l->output_shape(s);
    out.push_back(s);
  }
  return out;
}

template <typename T>
Shape Sequential<T>::output_shape(const Shape &input) const
{
  const auto t = trace(input);
  return t.empty() ? input : t.back();
}

template <typename T>
std::vector<Parameter<T> *> Sequential<T>::parameters()
{
  std::vector<Parameter<T> *> out;
  for (auto &l : layers_)
  {
    for (auto *p : l->parameters())
    {
      out.push_back(p);
    }
  }
  return out;
}

template <typename T>
std::size_t Sequential<T>::parameter_count() const
{
  std::size_t n = 0;
  for (auto &l : layers_)
  {
    for (auto *p : l->parameters())
    {
      n += p->value.size();
    }
  }
  return n;
}

template <typename T>
std::vector<typename Sequential<T>::NamedArray> Sequential<T>::state()
{
  std::vector<NamedArray> out;
  for (std::size_t i = 0; i < layers_.size(); ++i)
  {
    for (auto *p : layers_[i]->parameters())
    {
      out.push_back({std::to_string(i) + "." + p->name, &p->value});
    }
    for (auto *b : layers_[i]->buffers())
    {
      out.push_back({std::to_string(i) + "." + b->name, &b->value});
    }
  }
  return out;
}

template <typename T>
std::vector<Tensor<T>> Sequential<T>::state_snapshot() const
{
  std::vector<Tensor<T>> out;
  for (auto &named : const_cast<Sequential *>(this)->state())
  {
    out.push_back(*named.value);
  }
  return out;
}

template <typename T>
void Sequential<T>::load_state_snapshot(const std::vector<Tensor<T>> &snapshot)
{
  auto arrays = state();
  if (arrays.size() != snapshot.size())
  {
    throw ShapeMismatch(describe_shapes("state snapshot array count", std::to_string(arrays.size()),
                                        std::to_string(snapshot.size())));
  }
  for (std::size_t i = 0; i < arrays.size(); ++i)
  {
    if (arrays[i].value->shape() != snapshot[i].shape())
    {
      throw ShapeMismatch(describe_shapes("state array " + arrays[i].name,
                                          shape_string(arrays[i].value->shape()),
                                          shape_string(snapshot[i].shape())));
    }
    *arrays[i].value = snapshot[i];
  }
}

template <typename T>
void Sequential<T>::set_dropout_frozen(bool frozen)
{
  for (auto &l : layers_)
  {
    freeze_dropout_mask(*l, frozen);
  }
}

template class Sequential<float>;
template class Sequential<double>;
template Sequential<double> Sequential<float>::converted<double>() const;
template Sequential<float> Sequential<double>::converted<float>() const;
template Sequential<float> Sequential<float>::converted<float>() const;
template Sequential<double> Sequential<double>::converted<double>() const;

}  // namespace romforge::nn
