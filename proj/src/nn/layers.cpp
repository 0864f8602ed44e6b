// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "romforge/nn/layers.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "romforge/common/error.hpp"

namespace romforge::nn
{

namespace
{

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using ColMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;

[[noreturn]] void missing_context(const char *layer)
{
  throw MissingContext(std::string(layer) + ": backward called without a preceding forward");
}

void require(bool ok, const char *layer, const Shape &expected, const Shape &actual)
{
  if (!ok)
  {
    throw ShapeMismatch(describe_shapes(layer, shape_string(expected), shape_string(actual)));
  }
}

template <typename T>
void init_uniform(Tensor<T> &t, double bound, Rng &rng)
{
  for (auto &v : t.values())
  {
    v = static_cast<T>(rng.uniform(-bound, bound));
  }
}

/// Valid output range [lo, hi] along one axis for kernel offset k.
struct Span1d
{
  int lo;
  int hi;
};

Span1d valid_range(int in, int out, int stride, int pad, int k)
{
  const int shift = pad - k;
  int lo = shift > 0 ? (shift + stride - 1) / stride : 0;
  const int num = in - 1 + shift;
  int hi = num < 0 ? -1 : std::min(out - 1, num / stride);
  lo = std::min(lo, out);
  return {lo, hi};
}

/// Output rows per im2col tile, keeping the column buffer near 512 KiB.
inline int tile_rows(long kdim, int wo, int ho)
{
  const long budget = 131072;
  return static_cast<int>(std::clamp<long>(budget / std::max<long>(1, kdim * wo), 1, ho));
}

/// Column buffer for output rows [oy0, oy1): (C k k, rows * wo) row-major.
template <typename T>
void im2col(const T *x, int channels, int h, int w, int k, int stride, int pad, int oy0, int oy1, int wo,
            T *col)
{
  const std::size_t plane = static_cast<std::size_t>(oy1 - oy0) * wo;
  for (int c = 0; c < channels; ++c)
  {
    for (int ky = 0; ky < k; ++ky)
    {
      for (int kx = 0; kx < k; ++kx)
      {
        T *row = col + static_cast<std::size_t>((c * k + ky) * k + kx) * plane;
        const Span1d xs = valid_range(w, wo, stride, pad, kx);
        for (int oy = oy0; oy < oy1; ++oy)
        {
          T *out = row + static_cast<std::size_t>(oy - oy0) * wo;
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h || xs.hi < xs.lo)
          {
            std::fill(out, out + wo, T(0));
            continue;
          }
          const T *in = x + (static_cast<std::size_t>(c) * h + iy) * w;
          std::fill(out, out + xs.lo, T(0));
          if (stride == 1)
          {
            std::copy(in + xs.lo - pad + kx, in + xs.hi + 1 - pad + kx, out + xs.lo);
          }
          else
          {
            for (int ox = xs.lo; ox <= xs.hi; ++ox)
            {
              out[ox] = in[ox * stride - pad + kx];
            }
          }
          std::fill(out + xs.hi + 1, out + wo, T(0));
        }
      }
    }
  }
}

/// Accumulates a column buffer for output rows [oy0, oy1) back into x.
template <typename T>
void col2im(const T *col, int channels, int h, int w, int k, int stride, int pad, int oy0, int oy1, int wo,
            T *x)
{
  const std::size_t plane = static_cast<std::size_t>(oy1 - oy0) * wo;
  for (int c = 0; c < channels; ++c)
  {
    for (int ky = 0; ky < k; ++ky)
    {
      for (int kx = 0; kx < k; ++kx)
      {
        const T *row = col + static_cast<std::size_t>((c * k + ky) * k + kx) * plane;
        const Span1d xs = valid_range(w, wo, stride, pad, kx);
        for (int oy = oy0; oy < oy1; ++oy)
        {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h)
          {
            continue;
          }
          const T *src = row + static_cast<std::size_t>(oy - oy0) * wo;
          T *in = x + (static_cast<std::size_t>(c) * h + iy) * w;
          if (stride == 1)
          {
            T *dst = in - pad + kx;
            for (int ox = xs.lo; ox <= xs.hi; ++ox)
            {
              dst[ox] += src[ox];
            }
          }
          else
          {
            for (int ox = xs.lo; ox <= xs.hi; ++ox)
            {
              in[ox * stride - pad + kx] += src[ox];
            }
          }
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------

template <typename T>
class Conv2dLayer final : public Layer<T>
{
public:
  Conv2dLayer(const Conv2dSpec &spec, Rng &rng) : spec_(spec)
  {
    if (spec.in_channels < 1 || spec.out_channels < 1 || spec.kernel < 1 || spec.stride < 1 ||
        spec.padding < 0)
    {
      throw ConfigError("invalid Conv2d configuration");
    }
    const auto k = static_cast<std::size_t>(spec.kernel);
    weight_ = {"weight",
               Tensor<T>({static_cast<std::size_t>(spec.out_channels),
                          static_cast<std::size_t>(spec.in_channels), k, k}),
               {}};
    bias_ = {"bias", Tensor<T>({static_cast<std::size_t>(spec.out_channels)}), {}};
    const double bound = std::sqrt(1.0 / (spec.in_channels * spec.kernel * spec.kernel));
    init_uniform(weight_.value, bound, rng);
    init_uniform(bias_.value, bound, rng);
    weight_.grad = Tensor<T>(weight_.value.shape());
    bias_.grad = Tensor<T>(bias_.value.shape());
  }

  LayerSpec spec() const override { return spec_; }

  Shape output_shape(const Shape &in) const override
  {
    const Shape expected{0, static_cast<std::size_t>(spec_.in_channels), 0, 0};
    require(in.size() == 4 && in[1] == static_cast<std::size_t>(spec_.in_channels), "Conv2d",
            expected, in);
    const auto out = [&](std::size_t n) {
      return (static_cast<long>(n) + 2 * spec_.padding - spec_.kernel) / spec_.stride + 1;
    };
    require(out(in[2]) > 0 && out(in[3]) > 0, "Conv2d spatial size", expected, in);
    return {in[0], static_cast<std::size_t>(spec_.out_channels), static_cast<std::size_t>(out(in[2])),
            static_cast<std::size_t>(out(in[3]))};
  }

  Tensor<T> forward(const Tensor<T> &input, bool) override
  {
    const Shape os = output_shape(input.shape());
    input_ = input;
    has_context_ = true;
    Tensor<T> output(os);
    const int h = static_cast<int>(input.dim(2)), w = static_cast<int>(input.dim(3));
    const int ho = static_cast<int>(os[2]), wo = static_cast<int>(os[3]);
    const Eigen::Index kdim = static_cast<Eigen::Index>(spec_.in_channels) * spec_.kernel * spec_.kernel;
    const Eigen::Index plane = static_cast<Eigen::Index>(ho) * wo;
    // The (K, pixels) row-major column buffer is a (pixels, K) column-major
    // matrix, and an NCHW sample is (plane, Cout) column-major. Multiplying
    // in that orientation keeps the long pixel axis on GEMM's row side.
    // Output rows are processed in tiles so the buffer stays cache-sized.
    const int rows = tile_rows(kdim, wo, ho);
    col_.resize(kdim, static_cast<Eigen::Index>(rows) * wo);
    Eigen::Map<const ColMat<T>> wt(weight_.value.data(), kdim, spec_.out_channels);
    Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> bv(bias_.value.data(), spec_.out_channels);
    const std::size_t in_stride = static_cast<std::size_t>(spec_.in_channels) * h * w;
    for (std::size_t n = 0; n < input.dim(0); ++n)
    {
      T *y = output.data() + n * spec_.out_channels * plane;
      for (int oy0 = 0; oy0 < ho; oy0 += rows)
      {
        const int oy1 = std::min(ho, oy0 + rows);
        const Eigen::Index tile = static_cast<Eigen::Index>(oy1 - oy0) * wo;
        im2col(input.data() + n * in_stride, spec_.in_channels, h, w, spec_.kernel, spec_.stride,
               spec_.padding, oy0, oy1, wo, col_.data());
        Eigen::Map<const ColMat<T>> colt(col_.data(), tile, kdim);
        Eigen::Map<ColMat<T>, 0, Eigen::OuterStride<>> yt(y + static_cast<std::size_t>(oy0) * wo, tile,
                                                          spec_.out_channels, Eigen::OuterStride<>(plane));
        yt.noalias() = colt * wt;
        yt.rowwise() += bv;
      }
    }
    return output;
  }

  Tensor<T> backward(const Tensor<T> &upstream, bool need_input_grad) override
  {
    if (!has_context_)
    {
      missing_context("Conv2d");
    }
    const Shape os = output_shape(input_.shape());
    require(upstream.shape() == os, "Conv2d upstream", os, upstream.shape());
    const int h = static_cast<int>(input_.dim(2)), w = static_cast<int>(input_.dim(3));
    const int ho = static_cast<int>(os[2]), wo = static_cast<int>(os[3]);
    const Eigen::Index kdim = static_cast<Eigen::Index>(spec_.in_channels) * spec_.kernel * spec_.kernel;
    const Eigen::Index plane = static_cast<Eigen::Index>(ho) * wo;
    Eigen::Map<const RowMat<T>> wm(weight_.value.data(), spec_.out_channels, kdim);
    Eigen::Map<ColMat<T>> dwt(weight_.grad.data(), kdim, spec_.out_channels);
    std::fill(weight_.grad.data(), weight_.grad.data() + weight_.grad.size(), T(0));
    std::fill(bias_.grad.data(), bias_.grad.data() + bias_.grad.size(), T(0));
    const int rows = tile_rows(kdim, wo, ho);
    const Eigen::Index max_tile = static_cast<Eigen::Index>(rows) * wo;
    Tensor<T> dx;
    if (need_input_grad)
    {
      dx = Tensor<T>(input_.shape());
      dcol_.resize(kdim, max_tile);
    }
    col_.resize(kdim, max_tile);
    const std::size_t in_stride = static_cast<std::size_t>(spec_.in_channels) * h * w;
    for (std::size_t n = 0; n < input_.dim(0); ++n)
    {
      const T *dy = upstream.data() + n * spec_.out_channels * plane;
      // Plain loops: Eigen reductions over maps peel by alignment, which would
      // make the summation order depend on where the allocator put the data.
      for (int o = 0; o < spec_.out_channels; ++o)
      {
        T acc = 0;
        for (Eigen::Index q = 0; q < plane; ++q)
        {
          acc += dy[o * plane + q];
        }
        bias_.grad[o] += acc;
      }
      for (int oy0 = 0; oy0 < ho; oy0 += rows)
      {
        const int oy1 = std::min(ho, oy0 + rows);
        const Eigen::Index tile = static_cast<Eigen::Index>(oy1 - oy0) * wo;
        im2col(input_.data() + n * in_stride, spec_.in_channels, h, w, spec_.kernel, spec_.stride,
               spec_.padding, oy0, oy1, wo, col_.data());
        Eigen::Map<const ColMat<T>, 0, Eigen::OuterStride<>> dyt(dy + static_cast<std::size_t>(oy0) * wo, tile,
                                                                 spec_.out_channels, Eigen::OuterStride<>(plane));
        Eigen::Map<const ColMat<T>> colt(col_.data(), tile, kdim);
        dwt.noalias() += colt.transpose() * dyt;
        if (need_input_grad)
        {
          Eigen::Map<ColMat<T>> dcolt(dcol_.data(), tile, kdim);
          dcolt.noalias() = dyt * wm;
          col2im(dcol_.data(), spec_.in_channels, h, w, spec_.kernel, spec_.stride, spec_.padding, oy0, oy1,
                 wo, dx.data() + n * in_stride);
        }
      }
    }
    return dx;
  }

  std::vector<Parameter<T> *> parameters() override { return {&weight_, &bias_}; }

private:
  Conv2dSpec spec_;
  Parameter<T> weight_;
  Parameter<T> bias_;
  Tensor<T> input_;
  bool has_context_ = false;
  RowMat<T> col_;
  RowMat<T> dcol_;
};

// ---------------------------------------------------------------------------

template <typename T>
class LinearLayer final : public Layer<T>
{
public:
  LinearLayer(const LinearSpec &spec, Rng &rng) : spec_(spec)
  {
    if (spec.in_features < 1 || spec.out_features < 1)
    {
      throw ConfigError("invalid Linear configuration");
    }
    weight_ = {"weight",
               Tensor<T>({static_cast<std::size_t>(spec.out_features),
                          static_cast<std::size_t>(spec.in_features)}),
               {}};
    bias_ = {"bias", Tensor<T>({static_cast<std::size_t>(spec.out_features)}), {}};
    const double bound = std::sqrt(1.0 / spec.in_features);
    init_uniform(weight_.value, bound, rng);
    init_uniform(bias_.value, bound, rng);
    weight_.grad = Tensor<T>(weight_.value.shape());
    bias_.grad = Tensor<T>(bias_.value.shape());
  }

  LayerSpec spec() const override { return spec_; }

  Shape output_shape(const Shape &in) const override
  {
    const Shape expected{0, static_cast<std::size_t>(spec_.in_features)};
    require(in.size() == 2 && in[1] == static_cast<std::size_t>(spec_.in_features), "Linear",
            expected, in);
    return {in[0], static_cast<std::size_t>(spec_.out_features)};
  }

  Tensor<T> forward(const Tensor<T> &input, bool) override
  {
    const Shape os = output_shape(input.shape());
    input_ = input;
    has_context_ = true;
    Tensor<T> output(os);
    const auto n = static_cast<Eigen::Index>(input.dim(0));
    Eigen::Map<const RowMat<T>> x(input.data(), n, spec_.in_features);
    Eigen::Map<const RowMat<T>> wm(weight_.value.data(), spec_.out_features, spec_.in_features);
    Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> b(bias_.value.data(), spec_.out_features);
    Eigen::Map<RowMat<T>> y(output.data(), n, spec_.out_features);
    y.noalias() = x * wm.transpose();
    y.rowwise() += b;
    return output;
  }

  Tensor<T> backward(const Tensor<T> &upstream, bool need_input_grad) override
  {
    if (!has_context_)
    {
      missing_context("Linear");
    }
    const Shape os = output_shape(input_.shape());
    require(upstream.shape() == os, "Linear upstream", os, upstream.shape());
    const auto n = static_cast<Eigen::Index>(input_.dim(0));
    Eigen::Map<const RowMat<T>> x(input_.data(), n, spec_.in_features);
    Eigen::Map<const RowMat<T>> dy(upstream.data(), n, spec_.out_features);
    Eigen::Map<const RowMat<T>> wm(weight_.value.data(), spec_.out_features, spec_.in_features);
    Eigen::Map<RowMat<T>> dw(weight_.grad.data(), spec_.out_features, spec_.in_features);
    Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> db(bias_.grad.data(), spec_.out_features);
    dw.noalias() = dy.transpose() * x;
    for (Eigen::Index o = 0; o < dy.cols(); ++o)
    {
      T acc = 0;
      for (Eigen::Index r = 0; r < n; ++r)
      {
        acc += dy(r, o);
      }
      db[o] = acc;
    }
    Tensor<T> dx;
    if (need_input_grad)
    {
      dx = Tensor<T>(input_.shape());
      Eigen::Map<RowMat<T>> dxm(dx.data(), n, spec_.in_features);
      dxm.noalias() = dy * wm;
    }
    return dx;
  }

  std::vector<Parameter<T> *> parameters() override { return {&weight_, &bias_}; }

private:
  LinearSpec spec_;
  Parameter<T> weight_;
  Parameter<T> bias_;
  Tensor<T> input_;
  bool has_context_ = false;
};

// ---------------------------------------------------------------------------

template <typename T>
class BatchNormLayer final : public Layer<T>
{
public:
  explicit BatchNormLayer(const BatchNormSpec &spec) : spec_(spec)
  {
    if (spec.channels < 1 || !(spec.eps > 0.0))
    {
      throw ConfigError("invalid BatchNorm configuration");
    }
    const Shape c{static_cast<std::size_t>(spec.channels)};
    gamma_ = {"weight", Tensor<T>(c, T(1)), Tensor<T>(c)};
    beta_ = {"bias", Tensor<T>(c), Tensor<T>(c)};
    running_mean_ = {"running_mean", Tensor<T>(c)};
    running_var_ = {"running_var", Tensor<T>(c, T(1))};
  }

  LayerSpec spec() const override { return spec_; }

  Shape output_shape(const Shape &in) const override
  {
    const Shape expected{0, static_cast<std::size_t>(spec_.channels)};
    require((in.size() == 2 || in.size() == 4) && in[1] == static_cast<std::size_t>(spec_.channels),
            "BatchNorm", expected, in);
    return in;
  }

  Tensor<T> forward(const Tensor<T> &input, bool training) override
  {
    output_shape(input.shape());
    const std::size_t n = input.dim(0);
    const std::size_t c = input.dim(1);
    const std::size_t plane = input.rank() == 4 ? input.dim(2) * input.dim(3) : 1;
    const std::size_t count = n * plane;
    Tensor<T> output(input.shape());
    xhat_ = Tensor<T>(input.shape());
    inv_std_.assign(c, 0.0);
    trained_ = training;
    for (std::size_t ch = 0; ch < c; ++ch)
    {
      double mean = 0.0;
      double var = 0.0;
      if (training)
      {
        for (std::size_t s = 0; s < n; ++s)
        {
          const T *p = input.data() + (s * c + ch) * plane;
          for (std::size_t q = 0; q < plane; ++q)
          {
            mean += p[q];
          }
        }
        mean /= static_cast<double>(count);
        for (std::size_t s = 0; s < n; ++s)
        {
          const T *p = input.data() + (s * c + ch) * plane;
          for (std::size_t q = 0; q < plane; ++q)
          {
            const double d = p[q] - mean;
            var += d * d;
          }
        }
        var /= static_cast<double>(count);
        const double unbiased = count > 1 ? var * count / (count - 1.0) : var;
        const double m = spec_.momentum;
        running_mean_.value[ch] = static_cast<T>((1.0 - m) * running_mean_.value[ch] + m * mean);
        running_var_.value[ch] = static_cast<T>((1.0 - m) * running_var_.value[ch] + m * unbiased);
      }
      else
      {
        mean = running_mean_.value[ch];
        var = running_var_.value[ch];
      }
      const double inv = 1.0 / std::sqrt(var + spec_.eps);
      inv_std_[ch] = inv;
      const double g = gamma_.value[ch];
      const double b = beta_.value[ch];
      for (std::size_t s = 0; s < n; ++s)
      {
        const std::size_t off = (s * c + ch) * plane;
        for (std::size_t q = 0; q < plane; ++q)
        {
          const double xh = (input[off + q] - mean) * inv;
          xhat_[off + q] = static_cast<T>(xh);
          output[off + q] = static_cast<T>(g * xh + b);
        }
      }
    }
    has_context_ = true;
    return output;
  }

  Tensor<T> backward(const Tensor<T> &upstream, bool need_input_grad) override
  {
    if (!has_context_)
    {
      missing_context("BatchNorm");
    }
    require(upstream.shape() == xhat_.shape(), "BatchNorm upstream", xhat_.shape(),
            upstream.shape());
    const std::size_t n = upstream.dim(0);
    const std::size_t c = upstream.dim(1);
    const std::size_t plane = upstream.rank() == 4 ? upstream.dim(2) * upstream.dim(3) : 1;
    const double count = static_cast<double>(n * plane);
    Tensor<T> dx;
    if (need_input_grad)
    {
      dx = Tensor<T>(upstream.shape());
    }
    for (std::size_t ch = 0; ch < c; ++ch)
    {
      double sum_dy = 0.0;
      double sum_dy_xhat = 0.0;
      for (std::size_t s = 0; s < n; ++s)
      {
        const std::size_t off = (s * c + ch) * plane;
        for (std::size_t q = 0; q < plane; ++q)
        {
          sum_dy += upstream[off + q];
          sum_dy_xhat += static_cast<double>(upstream[off + q]) * xhat_[off + q];
        }
      }
      gamma_.grad[ch] = static_cast<T>(sum_dy_xhat);
      beta_.grad[ch] = static_cast<T>(sum_dy);
      if (!need_input_grad)
      {
        continue;
      }
      const double scale = gamma_.value[ch] * inv_std_[ch];
      for (std::size_t s = 0; s < n; ++s)
      {
        const std::size_t off = (s * c + ch) * plane;
        for (std::size_t q = 0; q < plane; ++q)
        {
          if (trained_)
          {
            dx[off + q] = static_cast<T>(
                scale * (upstream[off + q] - sum_dy / count - xhat_[off + q] * sum_dy_xhat / count));
          }
          else
          {
            dx[off + q] = static_cast<T>(scale * upstream[off + q]);
          }
        }
      }
    }
    return dx;
  }

  std::vector<Parameter<T> *> parameters() override { return {&gamma_, &beta_}; }
  std::vector<Buffer<T> *> buffers() override { return {&running_mean_, &running_var_}; }

private:
  BatchNormSpec spec_;
  Parameter<T> gamma_;
  Parameter<T> beta_;
  Buffer<T> running_mean_;
  Buffer<T> running_var_;
  Tensor<T> xhat_;
  std::vector<double> inv_std_;
  bool trained_ = false;
  bool has_context_ = false;
};

// ---------------------------------------------------------------------------

template <typename T>
class LeakyReluLayer final : public Layer<T>
{
public:
  explicit LeakyReluLayer(const LeakyReluSpec &spec) : spec_(spec) {}

  LayerSpec spec() const override { return spec_; }
  Shape output_shape(const Shape &in) const override { return in; }

  Tensor<T> forward(const Tensor<T> &input, bool) override
  {
    input_ = input;
    has_context_ = true;
    Tensor<T> out(input.shape());
    const T slope = static_cast<T>(spec_.slope);
    for (std::size_t i = 0; i < input.size(); ++i)
    {
      out[i] = input[i] > T(0) ? input[i] : slope * input[i];
    }
    return out;
  }

  Tensor<T> backward(const Tensor<T> &upstream, bool) override
  {
    if (!has_context_)
    {
      missing_context("LeakyReLU");
    }
    require(upstream.shape() == input_.shape(), "LeakyReLU upstream", input_.shape(),
            upstream.shape());
    Tensor<T> dx(upstream.shape());
    const T slope = static_cast<T>(spec_.slope);
    for (std::size_t i = 0; i < upstream.size(); ++i)
    {
      dx[i] = input_[i] > T(0) ? upstream[i] : slope * upstream[i];
    }
    return dx;
  }

private:
  LeakyReluSpec spec_;
  Tensor<T> input_;
  bool has_context_ = false;
};

}  // namespace

// Declared in the header so freeze_dropout_mask can reach it.
template <typename T>
class DropoutLayer final : public Layer<T>
{
public:
  DropoutLayer(const DropoutSpec &spec, std::uint64_t seed) : spec_(spec), rng_(seed)
  {
    if (!(spec.rate >= 0.0 && spec.rate < 1.0))
    {
      throw ConfigError("dropout rate must lie in [0, 1)");
    }
  }

  LayerSpec spec() const override { return spec_; }
  Shape output_shape(const Shape &in) const override { return in; }

  Tensor<T> forward(const Tensor<T> &input, bool training) override
  {
    active_ = training && spec_.rate > 0.0;
    has_context_ = true;
    if (!active_)
    {
      return input;
    }
    const T keep_scale = static_cast<T>(1.0 / (1.0 - spec_.rate));
    if (!frozen_ || mask_.size() != input.size())
    {
      mask_.resize(input.size());
      for (auto &m : mask_)
      {
        m = rng_.uniform() >= spec_.rate ? keep_scale : T(0);
      }
    }
    Tensor<T> out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i)
    {
      out[i] = input[i] * mask_[i];
    }
    return out;
  }

  Tensor<T> backward(const Tensor<T> &upstream, bool) override
  {
    if (!has_context_)
    {
      throw MissingContext("Dropout: backward called without a preceding forward");
    }
    if (!active_)
    {
      return upstream;
    }
    Tensor<T> dx(upstream.shape());
    for (std::size_t i = 0; i < upstream.size(); ++i)
    {
      dx[i] = upstream[i] * mask_[i];
    }
    return dx;
  }

  void set_frozen(bool frozen) { frozen_ = frozen; }

private:
  DropoutSpec spec_;
  Rng rng_;
  std::vector<T> mask_;
  bool active_ = false;
  bool frozen_ = false;
  bool has_context_ = false;
};

namespace
{

template <typename T>
class Upsample2xLayer final : public Layer<T>
{
public:
  LayerSpec spec() const override { return Upsample2xSpec{}; }

  Shape output_shape(const Shape &in) const override
  {
    require(in.size() == 4, "Upsample2x", {0, 0, 0, 0}, in);
    return {in[0], in[1], 2 * in[2], 2 * in[3]};
  }

  Tensor<T> forward(const Tensor<T> &input, bool) override
  {
    const Shape os = output_shape(input.shape());
    in_shape_ = input.shape();
    has_context_ = true;
    Tensor<T> out(os);
    const std::size_t planes = input.dim(0) * input.dim(1);
    const std::size_t h = input.dim(2), w = input.dim(3);
    for (std::size_t p = 0; p < planes; ++p)
    {
      const T *src = input.data() + p * h * w;
      T *dst = out.data() + p * 4 * h * w;
      for (std::size_t i = 0; i < h; ++i)
      {
        T *row = dst + (2 * i) * (2 * w);
        for (std::size_t j = 0; j < w; ++j)
        {
          row[2 * j] = row[2 * j + 1] = src[i * w + j];
        }
        std::copy(row, row + 2 * w, row + 2 * w);
      }
    }
    return out;
  }

  Tensor<T> backward(const Tensor<T> &upstream, bool) override
  {
    if (!has_context_)
    {
      missing_context("Upsample2x");
    }
    require(upstream.shape() == output_shape(in_shape_), "Upsample2x upstream",
            output_shape(in_shape_), upstream.shape());
    Tensor<T> dx(in_shape_);
    const std::size_t planes = in_shape_[0] * in_shape_[1];
    const std::size_t h = in_shape_[2], w = in_shape_[3];
    for (std::size_t p = 0; p < planes; ++p)
    {
      const T *src = upstream.data() + p * 4 * h * w;
      T *dst = dx.data() + p * h * w;
      for (std::size_t i = 0; i < h; ++i)
      {
        const T *r0 = src + (2 * i) * (2 * w);
        const T *r1 = r0 + 2 * w;
        for (std::size_t j = 0; j < w; ++j)
        {
          dst[i * w + j] = r0[2 * j] + r0[2 * j + 1] + r1[2 * j] + r1[2 * j + 1];
        }
      }
    }
    return dx;
  }

private:
  Shape in_shape_;
  bool has_context_ = false;
};

template <typename T>
class SigmoidLayer final : public Layer<T>
{
public:
  LayerSpec spec() const override { return SigmoidSpec{}; }
  Shape output_shape(const Shape &in) const override { return in; }

  Tensor<T> forward(const Tensor<T> &input, bool) override
  {
    output_ = Tensor<T>(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i)
    {
      const T z = input[i];
      // Branches keep exp() from overflowing for large |z|.
      output_[i] = z >= T(0) ? T(1) / (T(1) + std::exp(-z)) : std::exp(z) / (T(1) + std::exp(z));
    }
    has_context_ = true;
    return output_;
  }

  Tensor<T> backward(const Tensor<T> &upstream, bool) override
  {
    if (!has_context_)
    {
      missing_context("Sigmoid");
    }
    require(upstream.shape() == output_.shape(), "Sigmoid upstream", output_.shape(),
            upstream.shape());
    Tensor<T> dx(upstream.shape());
    for (std::size_t i = 0; i < upstream.size(); ++i)
    {
      dx[i] = upstream[i] * output_[i] * (T(1) - output_[i]);
    }
    return dx;
  }

private:
  Tensor<T> output_;
  bool has_context_ = false;
};

template <typename T>
class FlattenLayer final : public Layer<T>
{
public:
  LayerSpec spec() const override { return FlattenSpec{}; }

  Shape output_shape(const Shape &in) const override
  {
    require(!in.empty(), "Flatten", {0}, in);
    return {in[0], in[0] ? shape_size(in) / in[0] : 0};
  }

  Tensor<T> forward(const Tensor<T> &input, bool) override
  {
    in_shape_ = input.shape();
    has_context_ = true;
    return input.reshaped(output_shape(input.shape()));
  }

  Tensor<T> backward(const Tensor<T> &upstream, bool) override
  {
    if (!has_context_)
    {
      missing_context("Flatten");
    }
    return upstream.reshaped(in_shape_);
  }

private:
  Shape in_shape_;
  bool has_context_ = false;
};

template <typename T>
class ReshapeLayer final : public Layer<T>
{
public:
  explicit ReshapeLayer(const ReshapeSpec &spec) : spec_(spec) {}

  LayerSpec spec() const override { return spec_; }

  Shape output_shape(const Shape &in) const override
  {
    Shape out{in.empty() ? 0 : in[0]};
    out.insert(out.end(), spec_.shape.begin(), spec_.shape.end());
    require(!in.empty() && shape_size(in) == shape_size(out), "Reshape", out, in);
    return out;
  }

  Tensor<T> forward(const Tensor<T> &input, bool) override
  {
    in_shape_ = input.shape();
    has_context_ = true;
    return input.reshaped(output_shape(input.shape()));
  }

  Tensor<T> backward(const Tensor<T> &upstream, bool) override
  {
    if (!has_context_)
    {
      missing_context("Reshape");
    }
    return upstream.reshaped(in_shape_);
  }

private:
  ReshapeSpec spec_;
  Shape in_shape_;
  bool has_context_ = false;
};

template <class... Ts>
struct Overloaded : Ts...
{
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string layer_name(const LayerSpec &spec)
{
  return std::visit(Overloaded{[](const Conv2dSpec &) { return "Conv2d"; },
                               [](const LinearSpec &) { return "Linear"; },
                               [](const BatchNormSpec &) { return "BatchNorm"; },
                               [](const LeakyReluSpec &) { return "LeakyReLU"; },
                               [](const DropoutSpec &) { return "Dropout"; },
                               [](const Upsample2xSpec &) { return "Upsample2x"; },
                               [](const SigmoidSpec &) { return "Sigmoid"; },
                               [](const FlattenSpec &) { return "Flatten"; },
                               [](const ReshapeSpec &) { return "Reshape"; }},
                    spec);
}

template <typename T>
std::unique_ptr<Layer<T>> make_layer(const LayerSpec &spec, Rng &rng)
{
  return std::visit(
      Overloaded{
          [&](const Conv2dSpec &s) -> std::unique_ptr<Layer<T>> {
            return std::make_unique<Conv2dLayer<T>>(s, rng);
          },
          [&](const LinearSpec &s) -> std::unique_ptr<Layer<T>> {
            return std::make_unique<LinearLayer<T>>(s, rng);
          },
          [&](const BatchNormSpec &s) -> std::unique_ptr<Layer<T>> {
            return std::make_unique<BatchNormLayer<T>>(s);
          },
          [&](const LeakyReluSpec &s) -> std::unique_ptr<Layer<T>> {
            return std::make_unique<LeakyReluLayer<T>>(s);
          },
          [&](const DropoutSpec &s) -> std::unique_ptr<Layer<T>> {
            return std::make_unique<DropoutLayer<T>>(s, rng.next());
          },
          [&](const Upsample2xSpec &) -> std::unique_ptr<Layer<T>> {
            return std::make_unique<Upsample2xLayer<T>>();
          },
          [&](const SigmoidSpec &) -> std::unique_ptr<Layer<T>> {
            return std::make_unique<SigmoidLayer<T>>();
          },
          [&](const FlattenSpec &) -> std::unique_ptr<Layer<T>> {
            return std::make_unique<FlattenLayer<T>>();
          },
          [&](const ReshapeSpec &s) -> std::unique_ptr<Layer<T>> {
            return std::make_unique<ReshapeLayer<T>>(s);
          }},
      spec);
}

template <typename T>
void freeze_dropout_mask(Layer<T> &layer, bool frozen)
{
  if (auto *d = dynamic_cast<DropoutLayer<T> *>(&layer))
  {
    d->set_frozen(frozen);
  }
}

template std::unique_ptr<Layer<float>> make_layer<float>(const LayerSpec &, Rng &);
template std::unique_ptr<Layer<double>> make_layer<double>(const LayerSpec &, Rng &);
template void freeze_dropout_mask<float>(Layer<float> &, bool);
template void freeze_dropout_mask<double>(Layer<double> &, bool);

}  // namespace romforge::nn
