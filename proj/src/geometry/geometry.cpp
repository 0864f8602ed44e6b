// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "romforge/geometry/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <string>

#include "romforge/common/error.hpp"
#include "romforge/common/fingerprint.hpp"
#include "romforge/common/rng.hpp"

namespace romforge::geometry
{

namespace
{

constexpr double pi = std::numbers::pi;

double distance_to_square(double x, double y)
{
  return std::min({x, 1.0 - x, y, 1.0 - y});
}

}  // namespace

HoleShape HoleShape::circle(double x0, double y0, double r)
{
  return HoleShape{HoleKind::Circle, x0, y0, r, r, 0.0};
}

HoleShape HoleShape::ellipse(double x0, double y0, double a, double b, double angle)
{
  return HoleShape{HoleKind::Ellipse, x0, y0, a, b, angle};
}

bool HoleShape::contains(double x, double y) const
{
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double dx = x - x0;
  const double dy = y - y0;
  const double u = (c * dx + s * dy) / a;
  const double v = (-s * dx + c * dy) / b;
  return u * u + v * v <= 1.0;
}

void HoleShape::boundary_point(double t, double &x, double &y) const
{
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double u = a * std::cos(t);
  const double v = b * std::sin(t);
  x = x0 + c * u - s * v;
  y = y0 + s * u + c * v;
}

double CharacteristicBitmap::domain_fraction() const
{
  if (pixels.empty())
  {
    return 0.0;
  }
  std::size_t ones = 0;
  for (auto p : pixels)
  {
    ones += p;
  }
  return static_cast<double>(ones) / static_cast<double>(pixels.size());
}

const char *problem_name(Problem p)
{
  return p == Problem::Ellipse ? "ellipse" : "holes";
}

Problem parse_problem(const char *name)
{
  const std::string s(name);
  if (s == "ellipse")
  {
    return Problem::Ellipse;
  }
  if (s == "holes")
  {
    return Problem::Holes;
  }
  throw ConfigError("unknown problem '" + s + "' (expected ellipse or holes)");
}

SampledProblem sample_ellipse_domain(std::uint64_t seed, const SamplingLimits &limits)
{
  Rng rng(seed);
  SampledProblem out;
  out.params.phi = rng.uniform(0.0, 2.0 * pi);
  out.params.dirichlet_hole_value = 1.0;

  // Centers too close to the margin leave no room for the smallest
  // admissible half-axis; those are redrawn.
  for (int attempt = 0; attempt < limits.retry_budget; ++attempt)
  {
    const double x0 = rng.uniform(limits.center_lo, limits.center_hi);
    const double y0 = rng.uniform(limits.center_lo, limits.center_hi);
    const double a_max = distance_to_square(x0, y0) - limits.margin;
    if (a_max < limits.min_half_axis)
    {
      continue;
    }
    const double alpha = rng.uniform(0.0, pi);
    const double a = rng.uniform(limits.min_half_axis, a_max);
    const double b = rng.uniform(limits.min_half_axis, a);
    out.domain.holes.push_back(HoleShape::ellipse(x0, y0, a, b, alpha));
    out.params.beta = rng.uniform(1.0, 10.0);
    return out;
  }
  throw SamplingBudgetExceeded("ellipse center rejection exhausted " +
                               std::to_string(limits.retry_budget) + " attempts");
}

SampledProblem sample_holes_domain(std::uint64_t seed, const SamplingLimits &limits)
{
  Rng rng(seed);
  SampledProblem out;
  out.params.phi = rng.uniform(0.0, 2.0 * pi);
  out.params.beta = rng.uniform(1.0, 10.0);
  out.params.dirichlet_hole_value = 2.0;

  const int m = 1 + static_cast<int>(rng.index(4));
  std::vector<double> cx(m), cy(m), r(m);
  for (int attempt = 0; attempt < limits.retry_budget; ++attempt)
  {
    for (int k = 0; k < m; ++k)
    {
      cx[k] = rng.uniform(limits.center_lo, limits.center_hi);
      cy[k] = rng.uniform(limits.center_lo, limits.center_hi);
    }
    bool feasible = true;
    for (int k = 0; k < m && feasible; ++k)
    {
      double r_max = std::min(limits.max_radius, distance_to_square(cx[k], cy[k]) - limits.margin);
      for (int j = 0; j < m; ++j)
      {
        if (j == k)
        {
          continue;
        }
        const double d = std::hypot(cx[k] - cx[j], cy[k] - cy[j]);
        // Earlier circles are fixed; later ones still need room for the
        // smallest admissible radius.
        const double other = j < k ? r[j] : limits.min_half_axis;
        r_max = std::min(r_max, d - other - limits.separation);
      }
      if (r_max < limits.min_half_axis)
      {
        feasible = false;
        break;
      }
      r[k] = rng.uniform(limits.min_half_axis, r_max);
    }
    if (!feasible)
    {
      continue;
    }
    for (int k = 0; k < m; ++k)
    {
      out.domain.holes.push_back(HoleShape::circle(cx[k], cy[k], r[k]));
    }
    return out;
  }
  throw SamplingBudgetExceeded("no feasible layout for " + std::to_string(m) + " holes after " +
                               std::to_string(limits.retry_budget) + " attempts");
}

SampledProblem sample_problem(Problem problem, std::uint64_t seed, const SamplingLimits &limits)
{
  return problem == Problem::Ellipse ? sample_ellipse_domain(seed, limits)
                                     : sample_holes_domain(seed, limits);
}

std::vector<double> ellipse_parameter_vector(const SampledProblem &sample)
{
  if (sample.domain.holes.size() != 1)
  {
    throw ConfigError("ellipse parameter vector needs exactly one hole");
  }
  const HoleShape &h = sample.domain.holes.front();
  return {sample.params.phi, h.x0, h.y0, h.angle, h.a, h.b, sample.params.beta};
}

bool point_in_domain(const DomainSpec &spec, double x, double y)
{
  if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0)
  {
    return false;
  }
  return std::none_of(spec.holes.begin(), spec.holes.end(),
                      [&](const HoleShape &h) { return h.contains(x, y); });
}

CharacteristicBitmap rasterize(const DomainSpec &spec, int height, int width)
{
  if (height < 1 || width < 1)
  {
    throw ConfigError("rasterize needs positive dimensions");
  }
  CharacteristicBitmap bitmap{height, width, {}};
  bitmap.pixels.resize(static_cast<std::size_t>(height) * width);
  for (int i = 0; i < height; ++i)
  {
    const double y = (i + 0.5) / height;
    for (int j = 0; j < width; ++j)
    {
      const double x = (j + 0.5) / width;
      bitmap.pixels[static_cast<std::size_t>(i) * width + j] = point_in_domain(spec, x, y) ? 1 : 0;
    }
  }
  return bitmap;
}

std::uint64_t domain_hash(const DomainSpec &spec)
{
  Fingerprint fp;
  for (const HoleShape &h : spec.holes)
  {
    const double fields[] = {static_cast<double>(h.kind == HoleKind::Circle), h.x0, h.y0,
                             h.a, h.b, h.angle};
    fp.update_values(std::span<const double>(fields));
  }
  return fp.seed();
}

DomainSpec perturb_circles_to_ellipses(const DomainSpec &spec, double ratio)
{
  if (!(ratio > 0.0 && ratio <= 1.0))
  {
    throw InvalidRatio("deformation ratio must lie in (0, 1], got " + std::to_string(ratio));
  }
  Rng rng(domain_hash(spec));
  DomainSpec out;
  for (const HoleShape &h : spec.holes)
  {
    if (h.kind != HoleKind::Circle)
    {
      throw ConfigError("perturbation expects circular holes only");
    }
    const double angle = rng.uniform(0.0, pi);
    out.holes.push_back(HoleShape::ellipse(h.x0, h.y0, h.a, ratio * h.a, angle));
  }
  return out;
}

}  // namespace romforge::geometry
