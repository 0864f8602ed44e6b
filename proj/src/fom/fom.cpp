// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "romforge/fom/fom.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <cmath>
#include <string>

#include "romforge/common/error.hpp"

namespace romforge::fom
{

BoundaryProblem benchmark_problem(const EquationParams &params)
{
  BoundaryProblem p;
  const double f = params.rhs_const;
  p.rhs = [f](double, double) { return f; };
  p.dirichlet = [](double, double) { return 0.0; };
  p.dirichlet_on_x_sides = false;
  p.neumann_left = params.beta;
  p.neumann_right = -params.beta;
  p.hole_value = params.dirichlet_hole_value;
  p.mu = params.mu;
  p.velocity_x = params.advection_scale * std::cos(params.phi);
  p.velocity_y = params.advection_scale * std::sin(params.phi);
  return p;
}

LinearSystem assemble(const geometry::DomainSpec &spec, const BoundaryProblem &problem,
                      const FomConfig &config)
{
  const int n = config.grid_n;
  if (n < 8)
  {
    throw ConfigError("grid_n must be at least 8, got " + std::to_string(n));
  }
  if (!(problem.mu > 0.0))
  {
    throw ConfigError("diffusion coefficient must be positive");
  }
  const double h = 1.0 / (n - 1);
  const auto node = [n](int i, int j) { return static_cast<std::size_t>(i) * n + j; };
  const auto coord = [h](int k) { return k * h; };

  LinearSystem sys;
  sys.grid_n = n;
  sys.tolerance = config.linear_solver_tol;
  sys.max_iterations = config.max_iterations();
  sys.prescribed = Field(n, n, 0.0);
  sys.hole_node.assign(static_cast<std::size_t>(n) * n, 0);
  sys.unknown_of_node.assign(static_cast<std::size_t>(n) * n, -1);

  const int j_lo = problem.dirichlet_on_x_sides ? 1 : 0;
  const int j_hi = problem.dirichlet_on_x_sides ? n - 2 : n - 1;
  for (int i = 0; i < n; ++i)
  {
    for (int j = 0; j < n; ++j)
    {
      const double x = coord(j);
      const double y = coord(i);
      const bool in_hole = !geometry::point_in_domain(spec, x, y);
      sys.hole_node[node(i, j)] = in_hole ? 1 : 0;
      if (in_hole)
      {
        sys.prescribed.at(i, j) = problem.hole_value;
      }
      else if (i == 0 || i == n - 1 || j < j_lo || j > j_hi)
      {
        sys.prescribed.at(i, j) = problem.dirichlet(x, y);
      }
      else
      {
        sys.unknown_of_node[node(i, j)] = static_cast<int>(sys.node_of_unknown.size());
        sys.node_of_unknown.push_back(static_cast<int>(node(i, j)));
      }
    }
  }
  const auto count = static_cast<Eigen::Index>(sys.node_of_unknown.size());
  if (count == 0)
  {
    throw DegenerateDomain("no interior unknowns remain on a " + std::to_string(n) + "^2 grid");
  }

  const double diff = problem.mu / (h * h);
  const double adv_x = problem.velocity_x / (2.0 * h);
  const double adv_y = problem.velocity_y / (2.0 * h);

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(count) * 5);
  sys.rhs.setZero(count);

  for (Eigen::Index row = 0; row < count; ++row)
  {
    const int id = sys.node_of_unknown[static_cast<std::size_t>(row)];
    const int i = id / n;
    const int j = id % n;
    double b = problem.rhs(coord(j), coord(i));
    triplets.emplace_back(row, row, 4.0 * diff);

    double west = -diff - adv_x;
    double east = -diff + adv_x;
    const double south = -diff - adv_y;
    const double north = -diff + adv_y;

    // Ghost-node elimination: u(-h) = u(h) + 2h g_left, u(1+h) = u(1-h) + 2h g_right.
    if (j == 0)
    {
      b -= west * 2.0 * h * problem.neumann_left;
      east += west;
      west = 0.0;
    }
    else if (j == n - 1)
    {
      b -= east * 2.0 * h * problem.neumann_right;
      west += east;
      east = 0.0;
    }

    const auto couple = [&](int ni, int nj, double coef) {
      if (coef == 0.0)
      {
        return;
      }
      const int col = sys.unknown_of_node[node(ni, nj)];
      if (col >= 0)
      {
        triplets.emplace_back(row, col, coef);
      }
      else
      {
        b -= coef * sys.prescribed.at(ni, nj);
      }
    };
    if (j > 0)
    {
      couple(i, j - 1, west);
    }
    if (j < n - 1)
    {
      couple(i, j + 1, east);
    }
    couple(i - 1, j, south);
    couple(i + 1, j, north);
    sys.rhs[row] = b;
  }

  sys.matrix.resize(count, count);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  sys.matrix.makeCompressed();
  return sys;
}

LinearSystem assemble(const geometry::DomainSpec &spec, const EquationParams &params,
                      const FomConfig &config)
{
  return assemble(spec, benchmark_problem(params), config);
}

Field solve(const LinearSystem &system, SolveStats *stats)
{
  Eigen::BiCGSTAB<LinearSystem::Matrix, Eigen::DiagonalPreconditioner<double>> solver;
  solver.setTolerance(system.tolerance);
  solver.setMaxIterations(system.max_iterations);
  solver.compute(system.matrix);
  Eigen::VectorXd x = solver.solve(system.rhs);

  const double bnorm = system.rhs.norm();
  const auto true_residual = [&] {
    return bnorm > 0.0 ? (system.rhs - system.matrix * x).norm() / bnorm
                       : (system.matrix * x).norm();
  };
  double residual = true_residual();
  // The recursively updated residual can drift from the true one; restart
  // from the current iterate a few times before giving up.
  for (int restart = 0; restart < 3 && x.allFinite() && residual > system.tolerance; ++restart)
  {
    x = solver.solveWithGuess(system.rhs, x);
    residual = true_residual();
  }
  if (stats != nullptr)
  {
    stats->iterations = static_cast<int>(solver.iterations());
    stats->relative_residual = residual;
  }
  if (!x.allFinite() || residual > system.tolerance)
  {
    throw SolverDiverged("BiCGSTAB stopped at relative residual " + std::to_string(residual) +
                             " (tolerance " + std::to_string(system.tolerance) + ", " +
                             std::to_string(solver.iterations()) + " iterations)",
                         residual);
  }

  Field field = system.prescribed;
  for (std::size_t k = 0; k < system.node_of_unknown.size(); ++k)
  {
    field.values[static_cast<std::size_t>(system.node_of_unknown[k])] =
        x[static_cast<Eigen::Index>(k)];
  }
  return field;
}

Field solve_benchmark(const geometry::DomainSpec &spec, const EquationParams &params,
                      const FomConfig &config)
{
  return solve(assemble(spec, params, config));
}

}  // namespace romforge::fom
