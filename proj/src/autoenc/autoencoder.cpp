// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "romforge/autoenc/autoencoder.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "romforge/common/error.hpp"
#include "romforge/common/rng.hpp"
#include "romforge/nn/loss.hpp"
#include "romforge/nn/optim.hpp"

namespace romforge::autoenc
{

using nn::LayerSpec;
using nn::Sequential;
using nn::Tensor;

AutoencoderConfig default_solution_ae_config()
{
  AutoencoderConfig c;
  c.encoder_channels = {8, 16, 16, 32, 64, 64, 64};
  c.encoder_strides = {1, 2, 1, 2, 1, 2, 1};
  c.latent_dim = 20;
  return c;
}

AutoencoderConfig default_domain_ae_config()
{
  AutoencoderConfig c;
  c.encoder_channels = {32, 32, 64, 64, 64, 64, 64, 64};
  c.encoder_strides = {1, 1, 2, 2, 2, 1, 1, 1};
  c.latent_dim = 20;
  return c;
}

namespace
{

void validate(const AutoencoderConfig &c, int input_hw)
{
  if (c.encoder_channels.empty() || c.encoder_channels.size() != c.encoder_strides.size())
  {
    throw ConfigError("encoder channel and stride lists must be non-empty and of equal length");
  }
  for (int ch : c.encoder_channels)
  {
    if (ch < 1)
    {
      throw ConfigError("encoder channel counts must be positive");
    }
  }
  int factor = 1;
  for (int s : c.encoder_strides)
  {
    if (s != 1 && s != 2)
    {
      throw ConfigError("encoder strides must be 1 or 2, got " + std::to_string(s));
    }
    factor *= s;
  }
  if (c.latent_dim < 1)
  {
    throw ConfigError("latent dimension must be positive");
  }
  if (c.kernel < 1 || c.kernel % 2 == 0)
  {
    throw ConfigError("kernel size must be odd and positive");
  }
  if (input_hw < 1 || input_hw % factor != 0)
  {
    throw ConfigError("input resolution " + std::to_string(input_hw) +
                      " is not divisible by the cumulative stride " + std::to_string(factor));
  }
}

Autoencoder build(const AutoencoderConfig &c, int input_hw, bool sigmoid_head)
{
  validate(c, input_hw);
  const std::size_t layers = c.encoder_channels.size();
  const int pad = c.kernel / 2;

  std::vector<LayerSpec> enc;
  int in_ch = 1;
  int res = input_hw;
  for (std::size_t l = 0; l < layers; ++l)
  {
    const int out_ch = c.encoder_channels[l];
    enc.push_back(nn::Conv2dSpec{in_ch, out_ch, c.kernel, c.encoder_strides[l], pad});
    enc.push_back(nn::BatchNormSpec{out_ch});
    enc.push_back(nn::LeakyReluSpec{});
    in_ch = out_ch;
    res /= c.encoder_strides[l];
  }
  const int flat = in_ch * res * res;
  enc.push_back(nn::FlattenSpec{});
  enc.push_back(nn::LinearSpec{flat, c.latent_dim});

  std::vector<LayerSpec> dec;
  dec.push_back(nn::LinearSpec{c.latent_dim, flat});
  dec.push_back(nn::BatchNormSpec{flat});
  dec.push_back(nn::LeakyReluSpec{});
  dec.push_back(nn::ReshapeSpec{{static_cast<std::size_t>(in_ch), static_cast<std::size_t>(res),
                                 static_cast<std::size_t>(res)}});
  for (std::size_t k = 0; k < layers; ++k)
  {
    const std::size_t j = layers - 1 - k;
    const int out_ch = j == 0 ? 1 : c.encoder_channels[j - 1];
    if (c.encoder_strides[j] == 2)
    {
      dec.push_back(nn::Upsample2xSpec{});
    }
    dec.push_back(nn::Conv2dSpec{c.encoder_channels[j], out_ch, c.kernel, 1, pad});
    if (j != 0)
    {
      dec.push_back(nn::BatchNormSpec{out_ch});
      dec.push_back(nn::LeakyReluSpec{});
    }
  }
  if (sigmoid_head)
  {
    dec.push_back(nn::SigmoidSpec{});
  }

  Autoencoder ae;
  ae.encoder = Sequential<float>(enc, derive_seed(c.seed, 1));
  ae.decoder = Sequential<float>(dec, derive_seed(c.seed, 2));
  ae.input_hw = input_hw;
  ae.latent_dim = c.latent_dim;
  ae.sigmoid_head = sigmoid_head;
  return ae;
}

double loss_value(const Tensor<float> &out, const Tensor<float> &target, ReconstructionLoss loss)
{
  return loss == ReconstructionLoss::Mse ? nn::mse_loss(out, target).loss
                                         : nn::bce_with_logits_loss(out, target).loss;
}

/// Evaluation-mode loss over a whole set, chunked; logits for BCE.
double evaluate_loss(Autoencoder &ae, const Tensor<float> &data, ReconstructionLoss loss)
{
  const std::size_t n = data.dim(0);
  const std::size_t dec_end = ae.decoder.size() - (ae.sigmoid_head ? 1 : 0);
  double total = 0.0;
  for (std::size_t begin = 0; begin < n; begin += 64)
  {
    const std::size_t end = std::min(n, begin + 64);
    const Tensor<float> x = data.slice_rows(begin, end);
    const Tensor<float> code = ae.encoder.forward(x, false);
    const Tensor<float> out = ae.decoder.forward_range(code, false, 0, dec_end);
    total += loss_value(out, x, loss) * static_cast<double>(end - begin);
  }
  return total / static_cast<double>(n);
}

}  // namespace

Autoencoder build_solution_ae(const AutoencoderConfig &config, int input_hw)
{
  return build(config, input_hw, false);
}

Autoencoder build_domain_ae(const AutoencoderConfig &config, int input_hw)
{
  return build(config, input_hw, true);
}

std::vector<std::size_t> encoder_block_resolutions(const Autoencoder &ae)
{
  const auto shapes = ae.encoder.trace({1, 1, static_cast<std::size_t>(ae.input_hw),
                                        static_cast<std::size_t>(ae.input_hw)});
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ae.encoder.size(); ++i)
  {
    if (std::holds_alternative<nn::Conv2dSpec>(ae.encoder.layer(i).spec()))
    {
      out.push_back(shapes[i][2]);
    }
  }
  return out;
}

std::vector<std::size_t> decoder_block_resolutions(const Autoencoder &ae)
{
  const auto shapes = ae.decoder.trace({1, static_cast<std::size_t>(ae.latent_dim)});
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i < ae.decoder.size(); ++i)
  {
    const auto spec = ae.decoder.layer(i).spec();
    const bool starts_block = std::holds_alternative<nn::Upsample2xSpec>(spec) ||
                              (std::holds_alternative<nn::Conv2dSpec>(spec) &&
                               !std::holds_alternative<nn::Upsample2xSpec>(ae.decoder.layer(i - 1).spec()));
    if (starts_block)
    {
      out.push_back(shapes[i - 1][2]);
    }
  }
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double fraction,
                                                                            std::uint64_t seed)
{
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t held = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  if (fraction > 0.0 && held == 0 && n >= 4)
  {
    held = 1;
  }
  if (held == 0)
  {
    return {order, {}};
  }
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::size_t> val(order.end() - static_cast<long>(held), order.end());
  order.resize(n - held);
  std::sort(order.begin(), order.end());
  std::sort(val.begin(), val.end());
  return {order, val};
}

std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t n, std::size_t batch)
{
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t begin = 0; begin < n; begin += batch)
  {
    out.emplace_back(begin, std::min(n, begin + batch));
  }
  if (out.size() > 1 && out.back().second - out.back().first == 1)
  {
    out.pop_back();
    out.back().second = n;
  }
  return out;
}

TrainReport train_autoencoder(Autoencoder &ae, const Tensor<float> &data, ReconstructionLoss loss,
                              const AutoencoderConfig &config, const Tensor<float> *validation,
                              const EpochCallback &on_epoch)
{
  const nn::Shape expected{1, static_cast<std::size_t>(ae.input_hw), static_cast<std::size_t>(ae.input_hw)};
  auto check_shape = [&](const Tensor<float> &t, const char *what) {
    if (t.rank() != 4 || nn::Shape(t.shape().begin() + 1, t.shape().end()) != expected)
    {
      throw ShapeMismatch(describe_shapes(what, "(N, " + nn::shape_string(expected).substr(1),
                                          nn::shape_string(t.shape())));
    }
  };
  check_shape(data, "autoencoder training data");
  if (config.epochs < 1 || config.batch < 1 || !(config.max_lr > 0.0))
  {
    throw ConfigError("autoencoder training needs epochs >= 1, batch >= 1 and max_lr > 0");
  }
  if (loss == ReconstructionLoss::Bce && !ae.sigmoid_head)
  {
    throw ConfigError("binary cross-entropy training requires a sigmoid head");
  }

  Tensor<float> train_set;
  Tensor<float> val_set;
  if (validation != nullptr)
  {
    check_shape(*validation, "autoencoder validation data");
    train_set = data;
    val_set = *validation;
  }
  else
  {
    const auto [tr, va] = split_indices(data.dim(0), config.validation_fraction, derive_seed(config.seed, 3));
    train_set = nn::gather_rows(data, std::span<const std::size_t>(tr));
    if (!va.empty())
    {
      val_set = nn::gather_rows(data, std::span<const std::size_t>(va));
    }
  }
  const std::size_t n = train_set.dim(0);
  if (n < 2)
  {
    throw ConfigError("autoencoder training needs at least two training samples");
  }

  const auto ranges = batch_ranges(n, static_cast<std::size_t>(config.batch));
  nn::OneCycleSchedule schedule;
  schedule.max_lr = config.max_lr;
  schedule.total_steps = static_cast<long>(ranges.size()) * config.epochs;

  std::vector<nn::Parameter<float> *> params = ae.encoder.parameters();
  for (auto *p : ae.decoder.parameters())
  {
    params.push_back(p);
  }
  nn::AdamState adam;
  Rng shuffle_rng(derive_seed(config.seed, 4));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t dec_end = ae.decoder.size() - (ae.sigmoid_head ? 1 : 0);

  TrainReport report;
  report.train_count = n;
  report.validation_count = val_set.empty() ? 0 : val_set.dim(0);
  long step = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch)
  {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double total = 0.0;
    for (const auto &[begin, end] : ranges)
    {
      const Tensor<float> x =
          nn::gather_rows(train_set, std::span<const std::size_t>(order.data() + begin, end - begin));
      const Tensor<float> code = ae.encoder.forward(x, true);
      const Tensor<float> out = ae.decoder.forward_range(code, true, 0, dec_end);
      const auto r = loss == ReconstructionLoss::Mse ? nn::mse_loss(out, x) : nn::bce_with_logits_loss(out, x);
      if (!std::isfinite(r.loss))
      {
        throw NonFiniteLoss("autoencoder training loss became non-finite", epoch);
      }
      total += r.loss * static_cast<double>(end - begin);
      const Tensor<float> dcode = ae.decoder.backward_range(r.grad, true, 0, dec_end);
      ae.encoder.backward(dcode, false);
      nn::adam_step<float>(params, adam, nn::one_cycle_lr(schedule, step));
      ++step;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = total / static_cast<double>(n);
    rec.validation_loss = val_set.empty() ? std::nan("") : evaluate_loss(ae, val_set, loss);
    if (!val_set.empty() && !std::isfinite(rec.validation_loss))
    {
      throw NonFiniteLoss("autoencoder validation loss became non-finite", epoch);
    }
    report.epochs.push_back(rec);
    if (on_epoch)
    {
      on_epoch(rec);
    }
  }
  report.steps = step;
  return report;
}

Tensor<float> forward_batched(Sequential<float> &net, const Tensor<float> &input, std::size_t chunk)
{
  const std::size_t n = input.dim(0);
  Tensor<float> out;
  std::vector<float> values;
  nn::Shape shape;
  for (std::size_t begin = 0; begin < n; begin += chunk)
  {
    const Tensor<float> part = net.forward(input.slice_rows(begin, std::min(n, begin + chunk)), false);
    if (shape.empty())
    {
      shape = part.shape();
    }
    values.insert(values.end(), part.values().begin(), part.values().end());
  }
  if (shape.empty())
  {
    return out;
  }
  shape[0] = n;
  return Tensor<float>(shape, std::move(values));
}

Tensor<float> encode_dataset(Sequential<float> &encoder, const Tensor<float> &items)
{
  Tensor<float> codes = forward_batched(encoder, items);
  if (codes.rank() != 2)
  {
    throw ShapeMismatch(describe_shapes("encoder output", "(N, latent)", nn::shape_string(codes.shape())));
  }
  return codes;
}

double pixel_accuracy(const Tensor<float> &probabilities, const Tensor<float> &targets, double threshold)
{
  if (probabilities.shape() != targets.shape())
  {
    throw ShapeMismatch(describe_shapes("pixel accuracy", nn::shape_string(targets.shape()),
                                        nn::shape_string(probabilities.shape())));
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < targets.size(); ++i)
  {
    const float predicted = probabilities[i] >= threshold ? 1.0f : 0.0f;
    hits += predicted == targets[i];
  }
  return targets.size() == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(targets.size());
}

}  // namespace romforge::autoenc
