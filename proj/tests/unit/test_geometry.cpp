// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "romforge/common/error.hpp"
#include "romforge/geometry/geometry.hpp"

using namespace romforge;
using namespace romforge::geometry;

namespace
{

constexpr double pi = std::numbers::pi;

// Brute-force minimum distance from a hole boundary to the square boundary.
double boundary_margin(const HoleShape &h, int angles)
{
  double best = 1e9;
  for (int k = 0; k < angles; ++k)
  {
    double x, y;
    h.boundary_point(2.0 * pi * k / angles, x, y);
    best = std::min({best, x, 1.0 - x, y, 1.0 - y});
  }
  return best;
}

}  // namespace

TEST_CASE("ellipse sampler stays inside the parameter box")
{
  for (std::uint64_t seed = 0; seed < 200; ++seed)
  {
    const auto s = sample_ellipse_domain(seed);
    REQUIRE(s.domain.holes.size() == 1);
    const auto &h = s.domain.holes[0];
    CHECK(h.x0 >= 0.1);
    CHECK(h.x0 <= 0.9);
    CHECK(h.y0 >= 0.1);
    CHECK(h.y0 <= 0.9);
    CHECK(h.angle >= 0.0);
    CHECK(h.angle <= pi);
    CHECK(h.a >= h.b);
    CHECK(h.b >= 0.05);
    CHECK(s.params.beta >= 1.0);
    CHECK(s.params.beta <= 10.0);
    CHECK(s.params.phi >= 0.0);
    CHECK(s.params.phi <= 2.0 * pi);
    CHECK(s.params.dirichlet_hole_value == 1.0);
    CHECK(ellipse_parameter_vector(s).size() == 7);
  }
}

TEST_CASE("ellipse sampler is reproducible")
{
  const auto a = sample_ellipse_domain(1234);
  const auto b = sample_ellipse_domain(1234);
  CHECK(a.domain == b.domain);
  CHECK(a.params.phi == b.params.phi);
  CHECK(a.params.beta == b.params.beta);
  CHECK_FALSE(sample_ellipse_domain(1235).domain == a.domain);
}

TEST_CASE("ellipse boundary keeps the margin over 10000 draws")
{
  double worst = 1.0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed)
  {
    worst = std::min(worst, boundary_margin(sample_ellipse_domain(seed).domain.holes[0], 720));
  }
  CHECK(worst >= 0.1 - 1e-12);
}

TEST_CASE("holes sampler respects counts, radii and margins")
{
  int counts[5] = {0, 0, 0, 0, 0};
  double worst_gap = 1.0;
  double worst_margin = 1.0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed)
  {
    const auto s = sample_holes_domain(seed);
    const auto &holes = s.domain.holes;
    REQUIRE(holes.size() >= 1);
    REQUIRE(holes.size() <= 4);
    ++counts[holes.size()];
    CHECK(s.params.dirichlet_hole_value == 2.0);
    for (std::size_t i = 0; i < holes.size(); ++i)
    {
      CHECK(holes[i].kind == HoleKind::Circle);
      CHECK(holes[i].a >= 0.05);
      CHECK(holes[i].a <= 0.2);
      const double cdist = std::min({holes[i].x0, 1 - holes[i].x0, holes[i].y0, 1 - holes[i].y0});
      CHECK(cdist >= 0.1);
      worst_margin = std::min(worst_margin, boundary_margin(holes[i], 360));
      for (std::size_t j = i + 1; j < holes.size(); ++j)
      {
        const double gap = std::hypot(holes[i].x0 - holes[j].x0, holes[i].y0 - holes[j].y0) -
                           holes[i].a - holes[j].a;
        worst_gap = std::min(worst_gap, gap);
      }
    }
  }
  CHECK(worst_gap >= 0.1 - 1e-12);
  CHECK(worst_margin >= 0.1 - 1e-12);
  for (int m = 1; m <= 4; ++m)
  {
    CHECK(counts[m] > 2000);
  }
}

TEST_CASE("holes sampler reports an exhausted budget")
{
  SamplingLimits impossible;
  impossible.min_half_axis = 0.3;
  impossible.retry_budget = 50;
  CHECK_THROWS_AS(sample_holes_domain(3, impossible), SamplingBudgetExceeded);
}

TEST_CASE("point membership")
{
  DomainSpec circle{{HoleShape::circle(0.5, 0.5, 0.2)}};
  CHECK_FALSE(point_in_domain(circle, 0.5, 0.5));
  CHECK(point_in_domain(circle, 0.05, 0.5));
  CHECK_FALSE(point_in_domain(circle, 1.2, 0.5));

  // A rotation by pi/2 swaps the axes.
  DomainSpec ellipse{{HoleShape::ellipse(0.5, 0.5, 0.3, 0.1, pi / 2)}};
  CHECK(point_in_domain(ellipse, 0.65, 0.5));
  CHECK_FALSE(point_in_domain(ellipse, 0.5, 0.65));
}

TEST_CASE("circle membership does not depend on the angle")
{
  for (double angle : {0.0, 0.3, 1.1, 2.9})
  {
    DomainSpec rotated{{HoleShape::ellipse(0.4, 0.55, 0.17, 0.17, angle)}};
    DomainSpec plain{{HoleShape::circle(0.4, 0.55, 0.17)}};
    CHECK(rasterize(rotated, 48, 48).pixels == rasterize(plain, 48, 48).pixels);
  }
}

TEST_CASE("rasterization")
{
  const auto full = rasterize(DomainSpec{}, 4, 4);
  CHECK(std::count(full.pixels.begin(), full.pixels.end(), 1) == 16);

  DomainSpec circle{{HoleShape::circle(0.5, 0.5, 0.2)}};
  const auto bm = rasterize(circle, 64, 64);
  const double zero_fraction = 1.0 - bm.domain_fraction();
  CHECK(std::abs(zero_fraction - pi * 0.04) <= 2.0 / 64.0);

  const auto one = rasterize(circle, 1, 1);
  CHECK(one.pixels[0] == (point_in_domain(circle, 0.5, 0.5) ? 1 : 0));

  CHECK_THROWS_AS(rasterize(circle, 0, 3), ConfigError);
}

TEST_CASE("rasterization agrees with point membership at every pixel center")
{
  for (std::uint64_t seed = 0; seed < 20; ++seed)
  {
    const auto spec = sample_holes_domain(seed).domain;
    for (int h = 1; h <= 9; ++h)
    {
      for (int w = 1; w <= 9; ++w)
      {
        const auto bm = rasterize(spec, h, w);
        for (int i = 0; i < h; ++i)
        {
          for (int j = 0; j < w; ++j)
          {
            REQUIRE(bm.at(i, j) == (point_in_domain(spec, (j + 0.5) / w, (i + 0.5) / h) ? 1 : 0));
          }
        }
      }
    }
  }
}

TEST_CASE("circle-to-ellipse perturbation")
{
  DomainSpec base{{HoleShape::circle(0.3, 0.3, 0.1), HoleShape::circle(0.7, 0.6, 0.10707)}};

  const auto same = perturb_circles_to_ellipses(base, 1.0);
  CHECK(rasterize(same, 64, 64).pixels == rasterize(base, 64, 64).pixels);

  const auto p8 = perturb_circles_to_ellipses(base, 0.8);
  CHECK(p8.holes[0].a == doctest::Approx(0.1));
  CHECK(p8.holes[0].b == doctest::Approx(0.08));
  CHECK(p8.holes[0].x0 == 0.3);
  CHECK(p8.holes[0].y0 == 0.3);

  const auto p95 = perturb_circles_to_ellipses(base, 0.95);
  CHECK(p95.holes[1].b == doctest::Approx(0.1017165).epsilon(1e-12));

  // Angles come from the domain content, so repeated calls agree.
  CHECK(perturb_circles_to_ellipses(base, 0.9) == perturb_circles_to_ellipses(base, 0.9));

  CHECK_THROWS_AS(perturb_circles_to_ellipses(base, 0.0), InvalidRatio);
  CHECK_THROWS_AS(perturb_circles_to_ellipses(base, 1.01), InvalidRatio);
}
