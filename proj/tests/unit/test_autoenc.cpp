// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "romforge/autoenc/autoencoder.hpp"
#include "romforge/autoenc/standardize.hpp"
#include "romforge/common/error.hpp"
#include "romforge/common/rng.hpp"
#include "romforge/fom/dataset.hpp"
#include "romforge/nn/grad_check.hpp"

using namespace romforge;
using namespace romforge::autoenc;
using nn::Tensor;

namespace
{

Tensor<float> random_images(std::size_t n, std::size_t hw, std::uint64_t seed)
{
  Tensor<float> t({n, 1, hw, hw});
  Rng rng(seed);
  for (auto &v : t.values())
  {
    v = static_cast<float>(rng.uniform(-1.0, 1.0));
  }
  return t;
}

AutoencoderConfig tiny_config(std::uint64_t seed)
{
  AutoencoderConfig c;
  c.encoder_channels = {4, 8};
  c.encoder_strides = {1, 2};
  c.latent_dim = 15;
  c.batch = 5;
  c.max_lr = 3e-3;
  c.epochs = 30;
  c.seed = seed;
  return c;
}

bool is_batch_norm(const nn::LayerSpec &s) { return std::holds_alternative<nn::BatchNormSpec>(s); }

}  // namespace

TEST_CASE("solution autoencoder shapes and mirrored resolutions")
{
  auto ae = build_solution_ae(default_solution_ae_config(), 64);
  const auto code = ae.encoder.forward(random_images(1, 64, 1), false);
  CHECK(code.shape() == nn::Shape{1, 20});
  CHECK(ae.decoder.forward(code, false).shape() == nn::Shape{1, 1, 64, 64});

  auto enc = encoder_block_resolutions(ae);
  CHECK(enc == std::vector<std::size_t>{64, 32, 32, 16, 16, 8, 8});
  std::reverse(enc.begin(), enc.end());
  CHECK(decoder_block_resolutions(ae) == enc);

  // Batch norm is absent exactly at the terminal layer of each half.
  const auto es = ae.encoder.specs();
  const auto ds = ae.decoder.specs();
  CHECK(std::holds_alternative<nn::LinearSpec>(es.back()));
  CHECK_FALSE(is_batch_norm(es[es.size() - 2]));
  CHECK(std::holds_alternative<nn::Conv2dSpec>(ds.back()));
  const auto count_bn = [](const std::vector<nn::LayerSpec> &v) {
    return std::count_if(v.begin(), v.end(), is_batch_norm);
  };
  CHECK(count_bn(es) == 7);
  CHECK(count_bn(ds) == 7);
}

TEST_CASE("domain autoencoder outputs probabilities and downsamples by eight")
{
  AutoencoderConfig c = default_domain_ae_config();
  c.encoder_channels = {4, 4, 8, 8, 8, 8, 8, 8};
  auto ae = build_domain_ae(c, 64);
  const auto enc = encoder_block_resolutions(ae);
  CHECK(enc.front() == 64);
  CHECK(enc.back() == 8);
  auto rev = enc;
  std::reverse(rev.begin(), rev.end());
  CHECK(decoder_block_resolutions(ae) == rev);
  const auto y = ae.decoder.forward(ae.encoder.forward(random_images(2, 64, 2), false), false);
  CHECK(std::holds_alternative<nn::SigmoidSpec>(ae.decoder.specs().back()));
  for (float v : y.values())
  {
    REQUIRE(v > 0.0f);
    REQUIRE(v < 1.0f);
  }
  CHECK(ae.encoder.forward(random_images(1, 64, 3), false).dim(1) == 20);
}

TEST_CASE("invalid autoencoder configurations")
{
  CHECK_THROWS_AS(build_solution_ae(default_solution_ae_config(), 60), ConfigError);
  auto c = default_solution_ae_config();
  c.encoder_strides[0] = 3;
  CHECK_THROWS_AS(build_solution_ae(c, 64), ConfigError);
  c = default_solution_ae_config();
  c.encoder_strides.pop_back();
  CHECK_THROWS_AS(build_solution_ae(c, 64), ConfigError);
}

TEST_CASE("composed autoencoders pass the gradient check")
{
  auto c = tiny_config(4);
  c.encoder_channels = {2, 3};
  c.latent_dim = 3;
  for (bool domain : {false, true})
  {
    auto ae = domain ? build_domain_ae(c, 8) : build_solution_ae(c, 8);
    std::vector<nn::LayerSpec> specs = ae.encoder.specs();
    for (const auto &s : ae.decoder.specs())
    {
      specs.push_back(s);
    }
    nn::Sequential<double> net(specs, 9);
    // Pick an input whose LeakyReLU pre-activations stay clear of the kink.
    Tensor<double> x;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
    {
      x = random_images(3, 8, seed).cast<double>();
      if (nn::leaky_relu_margin(net, x) >= 1e-3)
      {
        break;
      }
    }
    REQUIRE(nn::leaky_relu_margin(net, x) >= 1e-3);
    nn::GradCheckOptions opt;
    opt.max_entries_per_tensor = 40;
    const auto r = nn::grad_check(net, x, [&](const Tensor<double> &y) {
      return domain ? nn::bce_loss(y, Tensor<double>(y.shape(), 1.0)) : nn::mse_loss(y, x);
    }, opt);
    CHECK(r.max_relative_error <= 1e-4);
  }
}

TEST_CASE("standardization statistics")
{
  std::vector<float> u(500);
  Rng rng(3);
  for (auto &v : u)
  {
    v = static_cast<float>(rng.uniform(-2.0, 7.0));
  }
  const auto original = u;
  StandardizationStats s;
  compute_solution_stats(u, s);
  standardize_solutions(u, s);
  double mean = 0.0, sq = 0.0;
  for (float v : u)
  {
    mean += v;
    sq += static_cast<double>(v) * v;
  }
  mean /= u.size();
  CHECK(std::abs(mean) <= 1e-6);
  CHECK(std::abs(std::sqrt(sq / u.size() - mean * mean) - 1.0) <= 1e-6);
  destandardize_solutions(u, s);
  for (std::size_t i = 0; i < u.size(); ++i)
  {
    CHECK(std::abs(u[i] - original[i]) <= 1e-6 * std::max(1.0f, std::abs(original[i])));
  }

  std::vector<float> flat(10, 3.0f);
  CHECK_THROWS_AS(compute_solution_stats(flat, s), DegenerateFeature);

  Tensor<float> f({4, 3}, {1, 5, 0, 2, 5, 0, 3, 5, 1, 4, 5, 1});
  compute_feature_stats(f, s);
  CHECK(s.degenerate_features == std::vector<std::size_t>{1});
  CHECK(s.feature_std[1] == 1.0);
  CHECK(s.feature_mean[0] == doctest::Approx(2.5));
  CHECK(s.feature_std[0] == doctest::Approx(std::sqrt(1.25)));
  auto g = f;
  standardize_features(g, s);
  CHECK(g[1] == 0.0f);
  destandardize_features(g, s);
  for (std::size_t i = 0; i < f.size(); ++i)
  {
    CHECK(g[i] == doctest::Approx(f[i]).epsilon(1e-6));
  }
  CHECK_THROWS_AS(compute_feature_stats(f, s, DegeneratePolicy::Error), DegenerateFeature);
  Tensor<float> wrong({2, 4});
  CHECK_THROWS_AS(standardize_features(wrong, s), DimensionMismatch);
}

TEST_CASE("tiny training runs reduce the loss and are reproducible")
{
  fom::GenerateOptions opt;
  opt.n = 20;
  opt.grid = 16;
  opt.seed = 30;
  const auto ds = fom::generate_dataset(opt);

  Tensor<float> u({20, 1, 16, 16}, ds.solutions);
  for (std::size_t i = 0; i < u.size(); ++i)
  {
    u[i] *= ds.masks[i];
  }
  StandardizationStats s;
  compute_solution_stats(u.values(), s);
  standardize_solutions(u.values(), s);

  auto run = [&](std::uint64_t seed) {
    auto c = tiny_config(seed);
    auto ae = build_solution_ae(c, 16);
    return train_autoencoder(ae, u, ReconstructionLoss::Mse, c);
  };
  const auto r1 = run(11);
  CHECK(r1.train_count == 18);
  CHECK(r1.validation_count == 2);
  CHECK(r1.epochs.size() == 30);
  CHECK(r1.final_train_loss() < r1.epochs.front().train_loss);
  const auto r2 = run(11);
  CHECK(r2.final_train_loss() == r1.final_train_loss());
  CHECK(r2.final_validation_loss() == r1.final_validation_loss());

  Tensor<float> masks({20, 1, 16, 16});
  std::copy(ds.masks.begin(), ds.masks.end(), masks.data());
  auto dc = tiny_config(12);
  auto dom = build_domain_ae(dc, 16);
  train_autoencoder(dom, masks, ReconstructionLoss::Bce, dc, &masks);
  const auto p = forward_batched(dom.decoder, encode_dataset(dom.encoder, masks));
  double area = 0.0;
  for (float v : masks.values())
  {
    area += v;
  }
  area /= static_cast<double>(masks.size());
  CHECK(pixel_accuracy(p, masks) > area);

  auto plain = build_solution_ae(tiny_config(1), 16);
  CHECK_THROWS_AS(train_autoencoder(plain, masks, ReconstructionLoss::Bce, tiny_config(1)), ConfigError);
  CHECK_THROWS_AS(train_autoencoder(plain, random_images(4, 8, 1), ReconstructionLoss::Mse, tiny_config(1)),
                  ShapeMismatch);
}

TEST_CASE("training divergence is reported with its epoch")
{
  auto c = tiny_config(2);
  c.max_lr = 1e30;
  c.epochs = 5;
  auto ae = build_solution_ae(c, 8);
  try
  {
    train_autoencoder(ae, random_images(10, 8, 1), ReconstructionLoss::Mse, c);
    FAIL("expected NonFiniteLoss");
  }
  catch (const NonFiniteLoss &e)
  {
    CHECK(e.epoch() >= 1);
    CHECK(e.epoch() <= 5);
  }
}

TEST_CASE("encode_dataset is a row-wise pure function")
{
  auto ae = build_solution_ae(tiny_config(5), 16);
  auto x = random_images(7, 16, 8);
  std::copy(x.data(), x.data() + 256, x.data() + 3 * 256);  // row 3 duplicates row 0
  const auto codes = encode_dataset(ae.encoder, x);
  CHECK(codes.shape() == nn::Shape{7, 15});
  for (std::size_t j = 0; j < 15; ++j)
  {
    CHECK(codes[3 * 15 + j] == codes[j]);
  }
  for (std::size_t i = 0; i < 7; ++i)
  {
    const auto one = encode_dataset(ae.encoder, x.slice_rows(i, i + 1));
    for (std::size_t j = 0; j < 15; ++j)
    {
      CHECK(one[j] == doctest::Approx(codes[i * 15 + j]).epsilon(1e-5));
    }
  }
  CHECK_THROWS_AS(encode_dataset(ae.encoder, random_images(2, 8, 1)), ShapeMismatch);
}

TEST_CASE("split and batching helpers")
{
  const auto [tr, va] = split_indices(50, 0.1, 7);
  CHECK(tr.size() == 45);
  CHECK(va.size() == 5);
  std::vector<std::size_t> all(tr);
  all.insert(all.end(), va.begin(), va.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 50; ++i)
  {
    CHECK(all[i] == i);
  }
  CHECK(batch_ranges(101, 50).size() == 2);
  CHECK(batch_ranges(101, 50).back().second == 101);
  CHECK(batch_ranges(102, 50).size() == 3);
}
