// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "romforge/common/error.hpp"
#include "romforge/common/rng.hpp"
#include "romforge/nn/grad_check.hpp"
#include "romforge/nn/loss.hpp"
#include "romforge/nn/optim.hpp"
#include "romforge/nn/sequential.hpp"

using namespace romforge;
using namespace romforge::nn;

namespace
{

Tensor<double> random_tensor(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0)
{
  Tensor<double> t(std::move(shape));
  Rng rng(seed);
  for (auto &v : t.values())
  {
    v = rng.uniform(lo, hi);
  }
  return t;
}

ScalarLoss mse_to(Tensor<double> target)
{
  return [target](const Tensor<double> &y) { return mse_loss(y, target); };
}

}  // namespace

TEST_CASE("mse examples")
{
  const Tensor<double> p({2}, {1.0, 3.0});
  const Tensor<double> t({2}, {0.0, 1.0});
  const auto r = mse_loss(p, t);
  CHECK(r.loss == 2.5);
  CHECK(r.grad[0] == 1.0);
  CHECK(r.grad[1] == 2.0);
  CHECK(mse_loss(p, p).loss == 0.0);

  const double sigma = 3.5;
  const Tensor<double> ps({2}, {sigma, 3 * sigma});
  const Tensor<double> ts({2}, {0.0, sigma});
  CHECK(mse_loss(ps, ts).loss == doctest::Approx(2.5 * sigma * sigma).epsilon(1e-15));
  CHECK_THROWS_AS(mse_loss(p, Tensor<double>({3})), ShapeMismatch);
}

TEST_CASE("bce examples")
{
  const Tensor<double> half({2, 3}, 0.5);
  const Tensor<double> y({2, 3}, {1, 0, 0, 1, 1, 0});
  CHECK(std::abs(bce_loss(half, y).loss - std::numbers::ln2) <= 1e-9);
  const auto r = bce_loss(Tensor<double>({2}, {0.9, 0.1}), Tensor<double>({2}, {1.0, 0.0}));
  CHECK(r.loss == doctest::Approx(-std::log(0.9)).epsilon(1e-12));
  CHECK(r.loss == doctest::Approx(0.105361).epsilon(1e-5));
  CHECK(bce_loss(y, y).loss < 1e-10);
  CHECK(std::isfinite(bce_loss(Tensor<double>({2}, {0.0, 1.0}), Tensor<double>({2}, {1.0, 0.0})).loss));
  CHECK_THROWS_AS(bce_loss(half, Tensor<double>({6})), ShapeMismatch);
}

TEST_CASE("fused logits form agrees with probabilities form")
{
  const auto z = random_tensor({3, 5}, 4, -6.0, 6.0);
  Tensor<double> y({3, 5});
  Rng rng(8);
  for (auto &v : y.values())
  {
    v = rng.uniform() < 0.5 ? 0.0 : 1.0;
  }
  Tensor<double> p(z.shape());
  for (std::size_t i = 0; i < z.size(); ++i)
  {
    p[i] = 1.0 / (1.0 + std::exp(-z[i]));
  }
  const auto fused = bce_with_logits_loss(z, y);
  const auto plain = bce_loss(p, y);
  CHECK(fused.loss == doctest::Approx(plain.loss).epsilon(1e-12));
  for (std::size_t i = 0; i < z.size(); ++i)
  {
    // Chain rule through the sigmoid: dL/dz = dL/dp * p (1 - p).
    CHECK(fused.grad[i] == doctest::Approx(plain.grad[i] * p[i] * (1 - p[i])).epsilon(1e-9));
  }
  // Extreme logits stay finite.
  const auto extreme = bce_with_logits_loss(Tensor<double>({2}, {800.0, -800.0}), Tensor<double>({2}, {0.0, 1.0}));
  CHECK(extreme.loss == doctest::Approx(800.0));
}

TEST_CASE("adam first step moves by lr against the gradient sign")
{
  Parameter<double> p{"w", Tensor<double>({4}, {1.0, -2.0, 0.5, 3.0}), Tensor<double>({4}, {0.3, -5.0, 1e-3, -0.02})};
  const auto before = p.value;
  AdamState state;
  std::vector<Parameter<double> *> ps{&p};
  const double lr = 1e-2;
  adam_step<double>(ps, state, lr);
  CHECK(state.step == 1);
  for (std::size_t i = 0; i < 4; ++i)
  {
    const double delta = p.value[i] - before[i];
    const double sign = p.grad[i] > 0 ? 1.0 : -1.0;
    CHECK(-sign * delta >= 0.999 * lr);
    CHECK(-sign * delta <= lr);
  }

  Parameter<double> z{"z", Tensor<double>({3}, {1.0, 2.0, 3.0}), Tensor<double>({3})};
  AdamState fresh;
  std::vector<Parameter<double> *> zs{&z};
  adam_step<double>(zs, fresh, 0.1);
  CHECK(z.value.storage() == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("adam trajectories are reproducible")
{
  auto run = [] {
    Sequential<float> net({LinearSpec{3, 8}, LeakyReluSpec{}, LinearSpec{8, 2}}, 42);
    AdamState state;
    const Tensor<float> x = random_tensor({5, 3}, 1).cast<float>();
    const Tensor<float> t = random_tensor({5, 2}, 2).cast<float>();
    std::vector<double> losses;
    for (int step = 0; step < 30; ++step)
    {
      const auto r = mse_loss(net.forward(x, true), t);
      losses.push_back(r.loss);
      net.backward(r.grad, false);
      auto ps = net.parameters();
      adam_step<float>(ps, state, 1e-2);
    }
    return losses;
  };
  const auto a = run();
  const auto b = run();
  CHECK(a == b);
  CHECK(a.back() < a.front());
}

TEST_CASE("one-cycle schedule shape")
{
  OneCycleSchedule s;
  s.max_lr = 1e-3;
  s.total_steps = 100;
  CHECK(s.peak_step() == 30);
  CHECK(one_cycle_lr(s, 0) == doctest::Approx(1e-3 / 25).epsilon(1e-15));
  CHECK(one_cycle_lr(s, 30) == 1e-3);
  CHECK(one_cycle_lr(s, 100) == doctest::Approx(1e-3 / 1e4).epsilon(1e-12));
  for (long k = 1; k <= 30; ++k)
  {
    CHECK(one_cycle_lr(s, k) > one_cycle_lr(s, k - 1));
  }
  for (long k = 31; k <= 100; ++k)
  {
    CHECK(one_cycle_lr(s, k) < one_cycle_lr(s, k - 1));
  }
  CHECK_THROWS_AS(one_cycle_lr(s, -1), StepOutOfRange);
  CHECK_THROWS_AS(one_cycle_lr(s, 101), StepOutOfRange);
}

TEST_CASE("gradient check on composed networks")
{
  SUBCASE("single linear layer with mse")
  {
    Sequential<double> net({LinearSpec{6, 4}}, 5);
    const auto r = grad_check(net, random_tensor({3, 6}, 1), mse_to(random_tensor({3, 4}, 2)));
    CHECK(r.max_relative_error <= 1e-7);
    CHECK(r.checked == 3 * 6 + 6 * 4 + 4);
  }
  SUBCASE("two-layer conv net with LeakyReLU")
  {
    Sequential<double> net({Conv2dSpec{1, 3, 5, 1, 2}, LeakyReluSpec{0.01}, Conv2dSpec{3, 2, 5, 2, 2}}, 6);
    const auto x = random_tensor({2, 1, 6, 6}, 3);
    const auto r = grad_check(net, x, mse_to(random_tensor({2, 2, 3, 3}, 4)));
    CHECK(r.max_relative_error <= 1e-4);
  }
  SUBCASE("sigmoid followed by bce")
  {
    Sequential<double> net({LinearSpec{4, 6}, SigmoidSpec{}}, 7);
    Tensor<double> y({3, 6});
    Rng rng(1);
    for (auto &v : y.values())
    {
      v = rng.uniform() < 0.5 ? 0.0 : 1.0;
    }
    const auto r = grad_check(net, random_tensor({3, 4}, 2),
                              [y](const Tensor<double> &p) { return bce_loss(p, y); });
    CHECK(r.max_relative_error <= 1e-5);
  }
}
