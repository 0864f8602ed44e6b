// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "romforge/common/error.hpp"
#include "romforge/common/rng.hpp"
#include "romforge/fom/dataset.hpp"
#include "romforge/metrics/metrics.hpp"

using namespace romforge;
using namespace romforge::metrics;

namespace
{

fom::Field field2x2(double a, double b, double c, double d)
{
  fom::Field f(2, 2);
  f.values = {a, b, c, d};
  return f;
}

geometry::CharacteristicBitmap full_mask(int h, int w)
{
  return {h, w, std::vector<std::uint8_t>(static_cast<std::size_t>(h) * w, 1)};
}

fom::Field random_field(int h, int w, Rng &rng)
{
  fom::Field f(h, w);
  for (auto &v : f.values)
  {
    v = rng.uniform(-2.0, 2.0);
  }
  return f;
}

geometry::CharacteristicBitmap random_mask(int h, int w, Rng &rng)
{
  auto m = full_mask(h, w);
  for (auto &p : m.pixels)
  {
    p = rng.uniform(0.0, 1.0) < 0.7 ? 1 : 0;
  }
  m.pixels[0] = 1;  // keep the denominator away from zero
  return m;
}

/// Direct transcription of the masked relative-error quotient.
double oracle_error(const fom::Field &u, const fom::Field &uh, const geometry::CharacteristicBitmap &d)
{
  long double num = 0, den = 0;
  for (std::size_t k = 0; k < u.size(); ++k)
  {
    const long double diff = u.values[k] * d.pixels[k] - uh.values[k] * d.pixels[k];
    num += diff * diff;
    den += static_cast<long double>(u.values[k]) * u.values[k] * d.pixels[k];
  }
  return static_cast<double>(std::sqrt(num) / std::sqrt(den));
}

}  // namespace

TEST_CASE("relative error identities")
{
  const auto u = field2x2(1, 2, 3, 4);
  const auto d = full_mask(2, 2);
  CHECK(relative_error(u, u, d) == 0.0);
  CHECK(relative_error(u, fom::Field(2, 2), d) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(relative_error(u, field2x2(1, 2, 3, 0), d) - 4.0 / std::sqrt(30.0)) <= 1e-9);
}

TEST_CASE("relative error matches an independent transcription")
{
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial)
  {
    const auto u = random_field(7, 5, rng);
    const auto uh = random_field(7, 5, rng);
    const auto d = random_mask(7, 5, rng);
    CHECK(relative_error(u, uh, d) == doctest::Approx(oracle_error(u, uh, d)).epsilon(1e-12));
  }
}

TEST_CASE("error field norm equals the relative error on 100 masked pairs")
{
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial)
  {
    const auto u = random_field(8, 8, rng);
    const auto uh = random_field(8, 8, rng);
    const auto d = random_mask(8, 8, rng);
    const auto e = relative_error_field(u, uh, d);
    double sq = 0.0;
    for (double v : e.values)
    {
      sq += v * v;
    }
    const double eps = relative_error(u, uh, d);
    CHECK(std::abs(std::sqrt(sq) - eps) <= 1e-6 * eps);
  }
}

TEST_CASE("error field is signed, and zero where masked out")
{
  const auto u = field2x2(1, 2, 3, 4);
  auto d = full_mask(2, 2);
  d.pixels[3] = 0;
  const auto e = relative_error_field(u, field2x2(2, 2, 3, 100), d);
  CHECK(e.values[0] == doctest::Approx(-1.0 / std::sqrt(14.0)));
  CHECK(e.values[3] == 0.0);
  for (double v : relative_error_field(u, u, full_mask(2, 2)).values)
  {
    CHECK(v == 0.0);
  }
}

TEST_CASE("masked-out prediction values do not matter")
{
  Rng rng(3);
  const auto u = random_field(6, 6, rng);
  auto uh = random_field(6, 6, rng);
  const auto d = random_mask(6, 6, rng);
  const double before = relative_error(u, uh, d);
  for (std::size_t k = 0; k < uh.size(); ++k)
  {
    if (!d.pixels[k])
    {
      uh.values[k] = 1e6;
    }
  }
  CHECK(relative_error(u, uh, d) == before);
}

TEST_CASE("relative error is homogeneous of degree zero")
{
  Rng rng(9);
  const auto u = random_field(6, 6, rng);
  const auto uh = random_field(6, 6, rng);
  const auto d = random_mask(6, 6, rng);
  const double base = relative_error(u, uh, d);
  for (double c : {-3.0, 0.5, 1e3})
  {
    auto cu = u, cuh = uh;
    for (auto &v : cu.values)
    {
      v *= c;
    }
    for (auto &v : cuh.values)
    {
      v *= c;
    }
    CHECK(relative_error(cu, cuh, d) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("relative error failure modes")
{
  const auto u = field2x2(1, 2, 3, 4);
  CHECK_THROWS_AS(relative_error(u, fom::Field(2, 3), full_mask(2, 2)), ShapeMismatch);
  CHECK_THROWS_AS(relative_error(u, u, full_mask(3, 3)), ShapeMismatch);
  geometry::CharacteristicBitmap empty{2, 2, {0, 0, 0, 0}};
  CHECK_THROWS_AS(relative_error(u, u, empty), ZeroDenominator);
  CHECK_THROWS_AS(relative_error_field(fom::Field(2, 2), u, full_mask(2, 2)), ZeroDenominator);
}

TEST_CASE("summary statistics")
{
  const auto s = summarize({0.4, 0.1, 0.3, 0.2});
  CHECK(s.mean == doctest::Approx(0.25));
  CHECK(s.median == doctest::Approx(0.25));
  CHECK(s.min == 0.1);
  CHECK(s.max == 0.4);
  CHECK(summarize({0.3, 0.1, 0.2}).median == 0.2);
}

TEST_CASE("oracle predictions score zero and the report is a pure aggregation")
{
  fom::GenerateOptions opt;
  opt.n = 4;
  opt.grid = 16;
  opt.seed = 21;
  const auto ds = fom::generate_dataset(opt);
  std::vector<fom::Field> oracle;
  for (std::size_t i = 0; i < ds.size(); ++i)
  {
    oracle.push_back(ds.field(i));
  }
  const auto report = evaluate_predictions(ds, oracle);
  CHECK(report.summary.mean == 0.0);
  CHECK(report.summary.max == 0.0);
  REQUIRE(report.pixel_errors.size() == 3);

  std::vector<fom::Field> zeros(ds.size(), fom::Field(16, 16));
  const auto a = evaluate_predictions(ds, zeros);
  const auto b = evaluate_predictions(ds, zeros);
  CHECK(a.errors == b.errors);
  CHECK(a.summary.mean == doctest::Approx(1.0));
  CHECK(a.pixel_errors[0].label == "best");
  CHECK(a.pixel_errors[2].label == "worst");

  zeros.pop_back();
  CHECK_THROWS_AS(evaluate_predictions(ds, zeros), DimensionMismatch);
}

TEST_CASE("sensitivity references and base domain")
{
  CHECK(sensitivity_reference(1.0) == 0.0101);
  CHECK(sensitivity_reference(0.95) == 0.0120);
  CHECK(sensitivity_reference(0.9) == 0.0142);
  CHECK(sensitivity_reference(0.8) == 0.0166);
  CHECK(sensitivity_reference(0.5) < 0.0);
  const auto base = sensitivity_base_domain();
  CHECK(base.domain.holes.size() == 4);
  for (const auto &h : base.domain.holes)
  {
    CHECK(h.kind == geometry::HoleKind::Circle);
  }
  CHECK(base.params.dirichlet_hole_value == 2.0);
}
