// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ROMFORGE_GEOMETRY_GEOMETRY_HPP
#define ROMFORGE_GEOMETRY_GEOMETRY_HPP

#include <cstdint>
#include <vector>

#include "romforge/fom/equation.hpp"

namespace romforge::geometry
{

enum class HoleKind
{
  Ellipse,
  Circle
};

/// An elliptic hole. `a` is the major half-axis, `angle` the angle of the
/// major axis to the x-axis. Circles have a == b and angle 0.
struct HoleShape
{
  HoleKind kind = HoleKind::Circle;
  double x0 = 0.5;
  double y0 = 0.5;
  double a = 0.1;
  double b = 0.1;
  double angle = 0.0;

  static HoleShape circle(double x0, double y0, double r);
  static HoleShape ellipse(double x0, double y0, double a, double b, double angle);

  /// Closed hole: true inside or on the boundary.
  bool contains(double x, double y) const;

  /// Boundary point at ellipse parameter t.
  void boundary_point(double t, double &x, double &y) const;

  bool operator==(const HoleShape &) const = default;
};

/// Unit square minus a list of holes.
struct DomainSpec
{
  std::vector<HoleShape> holes;

  bool operator==(const DomainSpec &) const = default;
};

/// Binary H x W mask, row-major, row 0 at y = 0.
struct CharacteristicBitmap
{
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(int i, int j) const { return pixels[static_cast<std::size_t>(i) * width + j]; }
  double domain_fraction() const;
};

/// Sampling bounds shared by both benchmark generators.
struct SamplingLimits
{
  double margin = 0.1;      ///< hole boundary to square boundary
  double separation = 0.1;  ///< hole boundary to hole boundary
  double min_half_axis = 0.05;
  double max_radius = 0.2;
  double center_lo = 0.1;
  double center_hi = 0.9;
  int retry_budget = 10000;
};

enum class Problem
{
  Ellipse,
  Holes
};

const char *problem_name(Problem p);
Problem parse_problem(const char *name);

/// One draw of geometry and equation coefficients.
struct SampledProblem
{
  DomainSpec domain;
  fom::EquationParams params;
};

/// Single elliptic hole plus (phi, beta); hole Dirichlet value 1.
SampledProblem sample_ellipse_domain(std::uint64_t seed, const SamplingLimits &limits = {});

/// One to four circular holes plus (phi, beta); hole Dirichlet value 2.
/// Throws SamplingBudgetExceeded when no feasible layout is found.
SampledProblem sample_holes_domain(std::uint64_t seed, const SamplingLimits &limits = {});

SampledProblem sample_problem(Problem problem, std::uint64_t seed,
                              const SamplingLimits &limits = {});

/// The 7-vector (phi, x0, y0, alpha, a, b, beta) of the ellipse benchmark.
std::vector<double> ellipse_parameter_vector(const SampledProblem &sample);

bool point_in_domain(const DomainSpec &spec, double x, double y);

/// Pixel (i, j) is point_in_domain at ((j + 0.5) / W, (i + 0.5) / H).
CharacteristicBitmap rasterize(const DomainSpec &spec, int height, int width);

/// Turns every circle of radius r into an ellipse with half-axes (r, ratio*r)
/// at a pseudo-random angle seeded from the domain's content hash.
DomainSpec perturb_circles_to_ellipses(const DomainSpec &spec, double ratio);

/// Content hash of a domain (stable across runs and platforms).
std::uint64_t domain_hash(const DomainSpec &spec);

}  // namespace romforge::geometry

#endif  // ROMFORGE_GEOMETRY_GEOMETRY_HPP
