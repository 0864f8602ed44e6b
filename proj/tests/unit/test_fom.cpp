// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "romforge/common/error.hpp"
#include "romforge/fom/dataset.hpp"
#include "romforge/fom/fom.hpp"

using namespace romforge;
using namespace romforge::fom;
using geometry::DomainSpec;
using geometry::HoleShape;

namespace
{

constexpr double pi = std::numbers::pi;

FomConfig config(int n, double tol = 1e-8)
{
  FomConfig c;
  c.grid_n = n;
  c.linear_solver_tol = tol;
  return c;
}

double node_coord(int k, int n) { return static_cast<double>(k) / (n - 1); }

double manufactured_error(int n)
{
  const double vx = 0.1 * std::cos(0.3);
  const double vy = 0.1 * std::sin(0.3);
  BoundaryProblem p;
  p.dirichlet_on_x_sides = true;
  p.dirichlet = [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };
  p.rhs = [=](double x, double y) {
    return 2.0 * pi * pi * std::sin(pi * x) * std::sin(pi * y) +
           vx * pi * std::cos(pi * x) * std::sin(pi * y) +
           vy * pi * std::sin(pi * x) * std::cos(pi * y);
  };
  p.velocity_x = vx;
  p.velocity_y = vy;
  const Field u = solve(assemble(DomainSpec{}, p, config(n, 1e-12)));
  double err = 0.0;
  for (int i = 0; i < n; ++i)
  {
    for (int j = 0; j < n; ++j)
    {
      err = std::max(err, std::abs(u.at(i, j) - p.dirichlet(node_coord(j, n), node_coord(i, n))));
    }
  }
  return err;
}

}  // namespace

TEST_CASE("unknown count on a hole-free grid")
{
  EquationParams params;
  const auto sys = assemble(DomainSpec{}, params, config(8));
  CHECK(sys.unknown_count() == 48);
}

TEST_CASE("a hole covering one interior node removes exactly one unknown")
{
  const int n = 16;
  EquationParams params;
  const auto base = assemble(DomainSpec{}, params, config(n));
  DomainSpec tiny{{HoleShape::circle(node_coord(8, n), node_coord(7, n), 0.01)}};
  const auto holed = assemble(tiny, params, config(n));
  CHECK(holed.unknown_count() + 1 == base.unknown_count());
  const Field u = solve(holed);
  CHECK(u.at(7, 8) == params.dirichlet_hole_value);
}

TEST_CASE("reversing the advection direction transposes the interior stencil")
{
  const int n = 12;
  BoundaryProblem forward;
  forward.velocity_x = 0.1 * std::cos(0.7);
  forward.velocity_y = 0.1 * std::sin(0.7);
  BoundaryProblem reverse = forward;
  reverse.velocity_x = -forward.velocity_x;
  reverse.velocity_y = -forward.velocity_y;
  const auto a = assemble(DomainSpec{}, forward, config(n));
  const auto b = assemble(DomainSpec{}, reverse, config(n));
  const Eigen::MatrixXd da(a.matrix);
  const Eigen::MatrixXd db(b.matrix);
  int compared = 0;
  for (std::size_t p = 0; p < a.unknown_count(); ++p)
  {
    const int jp = a.node_of_unknown[p] % n;
    if (jp == 0 || jp == n - 1)
    {
      continue;
    }
    for (std::size_t q = 0; q < a.unknown_count(); ++q)
    {
      const int jq = a.node_of_unknown[q] % n;
      if (jq == 0 || jq == n - 1)
      {
        continue;
      }
      REQUIRE(da(p, q) == doctest::Approx(db(q, p)).epsilon(1e-14));
      ++compared;
    }
  }
  CHECK(compared > 0);
}

TEST_CASE("linear Dirichlet data is reproduced exactly")
{
  for (int n : {16, 33})
  {
    BoundaryProblem p;
    p.dirichlet_on_x_sides = true;
    p.dirichlet = [](double, double y) { return y; };
    const Field u = solve(assemble(DomainSpec{}, p, config(n, 1e-14)));
    double err = 0.0;
    for (int i = 0; i < n; ++i)
    {
      for (int j = 0; j < n; ++j)
      {
        err = std::max(err, std::abs(u.at(i, j) - node_coord(i, n)));
      }
    }
    CHECK(err <= 1e-10);
  }
}

TEST_CASE("ghost-node Neumann reproduces u = x exactly")
{
  for (int n : {16, 33})
  {
    BoundaryProblem p;
    p.dirichlet = [](double x, double) { return x; };
    p.neumann_left = -1.0;  // du/dnu = -du/dx at x = 0
    p.neumann_right = 1.0;
    const Field u = solve(assemble(DomainSpec{}, p, config(n, 1e-14)));
    double err = 0.0;
    for (int i = 0; i < n; ++i)
    {
      for (int j = 0; j < n; ++j)
      {
        err = std::max(err, std::abs(u.at(i, j) - node_coord(j, n)));
      }
    }
    CHECK(err <= 1e-10);
  }
}

TEST_CASE("manufactured solution converges at second order")
{
  const double e16 = manufactured_error(16);
  const double e32 = manufactured_error(32);
  const double e64 = manufactured_error(64);
  CHECK(e16 / e32 >= 3.0);
  CHECK(e16 / e32 <= 5.0);
  CHECK(e32 / e64 >= 3.0);
  CHECK(e32 / e64 <= 5.0);
}

TEST_CASE("discrete maximum principle with nonnegative source")
{
  for (std::uint64_t seed = 0; seed < 10; ++seed)
  {
    auto sample = geometry::sample_holes_domain(seed);
    sample.params.beta = 0.0;
    const int n = 32;
    const auto sys = assemble(sample.domain, sample.params, config(n));
    const Field u = solve(sys);
    const double boundary_min = std::min(0.0, sample.params.dirichlet_hole_value);
    double interior_min = 1e9;
    for (std::size_t k = 0; k < sys.unknown_count(); ++k)
    {
      interior_min = std::min(interior_min, u.values[sys.node_of_unknown[k]]);
    }
    CHECK(interior_min >= boundary_min - 10.0 / (n * n));
  }
}

TEST_CASE("benchmark fields are finite and pinned to the hole value")
{
  const auto sample = geometry::sample_ellipse_domain(11);
  const int n = 32;
  const auto sys = assemble(sample.domain, sample.params, config(n));
  const Field u = solve(sys);
  for (std::size_t k = 0; k < u.size(); ++k)
  {
    REQUIRE(std::isfinite(u.values[k]));
    if (sys.hole_node[k])
    {
      REQUIRE(u.values[k] == sample.params.dirichlet_hole_value);
    }
  }
}

TEST_CASE("assembly and solve error paths")
{
  EquationParams params;
  DomainSpec swallowed{{HoleShape::circle(0.5, 0.5, 0.8)}};
  CHECK_THROWS_AS(assemble(swallowed, params, config(16)), DegenerateDomain);
  CHECK_THROWS_AS(assemble(DomainSpec{}, params, config(4)), ConfigError);

  FomConfig starved = config(32, 1e-14);
  starved.linear_solver_max_iter = 1;
  params.beta = 5.0;
  const auto sys = assemble(DomainSpec{}, params, starved);
  CHECK_THROWS_AS(solve(sys), SolverDiverged);
}

TEST_CASE("diffusion coefficient scales the Laplacian")
{
  EquationParams slow;
  slow.mu = 0.5;
  slow.advection_scale = 0.0;
  slow.beta = 0.0;
  EquationParams fast = slow;
  fast.mu = 1.0;
  slow.dirichlet_hole_value = fast.dirichlet_hole_value = 0.0;
  const Field a = solve_benchmark(DomainSpec{}, slow, config(16));
  const Field b = solve_benchmark(DomainSpec{}, fast, config(16));
  // With zero boundary data the solution is linear in 1 / mu.
  for (std::size_t k = 0; k < a.size(); ++k)
  {
    CHECK(a.values[k] == doctest::Approx(2.0 * b.values[k]).epsilon(1e-6));
  }
}

TEST_CASE("dataset generation")
{
  GenerateOptions opt;
  opt.problem = geometry::Problem::Ellipse;
  opt.n = 3;
  opt.grid = 16;
  opt.seed = 5;
  const auto ds = generate_dataset(opt);
  CHECK(ds.size() == 3);
  CHECK(ds.param_dim() == 7);
  CHECK(ds.solutions.size() == 3 * 256);
  CHECK(ds.masks.size() == 3 * 256);
  CHECK(ds.has_geometry_params());

  const auto again = generate_dataset(opt);
  CHECK(again.params == ds.params);
  CHECK(again.solutions == ds.solutions);
  CHECK(again.masks == ds.masks);

  // Sample i depends only on seed + i.
  GenerateOptions shifted = opt;
  shifted.seed = 6;
  shifted.n = 2;
  const auto tail = generate_dataset(shifted);
  CHECK(std::equal(tail.solutions.begin(), tail.solutions.end(), ds.solutions.begin() + 256));

  GenerateOptions with_mu = opt;
  with_mu.mu_range = std::make_pair(0.2, 1.0);
  const auto mu_ds = generate_dataset(with_mu);
  CHECK(mu_ds.param_dim() == 8);
  CHECK(mu_ds.schema.back().name == "mu");
}

TEST_CASE("holes dataset covers every hole count")
{
  GenerateOptions opt;
  opt.problem = geometry::Problem::Holes;
  opt.n = 200;
  opt.grid = 16;
  opt.seed = 100;
  const auto ds = generate_dataset(opt);
  CHECK(ds.param_dim() == 2);
  CHECK_FALSE(ds.has_geometry_params());
  int counts[5] = {0, 0, 0, 0, 0};
  for (const auto &d : ds.domains)
  {
    ++counts[d.holes.size()];
  }
  for (int m = 1; m <= 4; ++m)
  {
    CHECK(counts[m] >= 20);
  }
}
