// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ROMFORGE_FOM_FOM_HPP
#define ROMFORGE_FOM_FOM_HPP

#include <Eigen/Sparse>

#include <cstdint>
#include <functional>
#include <vector>

#include "romforge/fom/equation.hpp"
#include "romforge/geometry/geometry.hpp"

namespace romforge::fom
{

/// Scalar field on an H x W node grid; node (i, j) sits at
/// (j / (W - 1), i / (H - 1)).
struct Field
{
  int height = 0;
  int width = 0;
  std::vector<double> values;

  Field() = default;
  Field(int h, int w, double fill = 0.0)
    : height(h), width(w), values(static_cast<std::size_t>(h) * w, fill)
  {
  }

  double &at(int i, int j) { return values[static_cast<std::size_t>(i) * width + j]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * width + j]; }
  std::size_t size() const { return values.size(); }
};

struct FomConfig
{
  int grid_n = 64;
  double linear_solver_tol = 1e-8;
  int linear_solver_max_iter = 0;  ///< 0 selects 20 * grid_n^2

  int max_iterations() const
  {
    return linear_solver_max_iter > 0 ? linear_solver_max_iter : 20 * grid_n * grid_n;
  }
};

using Function2d = std::function<double(double, double)>;

/// Boundary-value problem in the general form used by both the benchmarks
/// and the manufactured-solution checks:
///   -mu Lap(u) + velocity . grad(u) = rhs     on the grid minus the holes
///   u = dirichlet                             on y = 0 and y = 1
///   u = dirichlet  or  du/dnu = neumann_*      on x = 0 and x = 1
///   u = hole_value                            on and inside the holes
struct BoundaryProblem
{
  Function2d rhs = [](double, double) { return 0.0; };
  Function2d dirichlet = [](double, double) { return 0.0; };
  bool dirichlet_on_x_sides = false;
  double neumann_left = 0.0;   ///< du/dnu at x = 0 (outward normal -x)
  double neumann_right = 0.0;  ///< du/dnu at x = 1 (outward normal +x)
  double hole_value = 0.0;
  double mu = 1.0;
  double velocity_x = 0.0;
  double velocity_y = 0.0;
};

/// The benchmark problem for the given coefficients.
BoundaryProblem benchmark_problem(const EquationParams &params);

/// Sparse system over the unknown nodes plus everything needed to scatter
/// the solution back onto the grid.
struct LinearSystem
{
  using Matrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  int grid_n = 0;
  Matrix matrix;
  Eigen::VectorXd rhs;
  std::vector<int> unknown_of_node;  ///< -1 for nodes with prescribed values
  std::vector<int> node_of_unknown;
  std::vector<std::uint8_t> hole_node;  ///< 1 on and inside holes
  Field prescribed;                     ///< Dirichlet values, 0 at unknowns
  double tolerance = 1e-8;
  int max_iterations = 0;

  std::size_t unknown_count() const { return node_of_unknown.size(); }
};

/// Five-point Laplacian, central advection, ghost-node Neumann elimination.
/// Throws DegenerateDomain if no unknown remains.
LinearSystem assemble(const geometry::DomainSpec &spec, const BoundaryProblem &problem,
                      const FomConfig &config);

LinearSystem assemble(const geometry::DomainSpec &spec, const EquationParams &params,
                      const FomConfig &config);

struct SolveStats
{
  int iterations = 0;
  double relative_residual = 0.0;
};

/// BiCGSTAB with a diagonal preconditioner. Throws SolverDiverged.
Field solve(const LinearSystem &system, SolveStats *stats = nullptr);

/// Convenience: assemble + solve for the benchmark equation.
Field solve_benchmark(const geometry::DomainSpec &spec, const EquationParams &params,
                      const FomConfig &config);

}  // namespace romforge::fom

#endif  // ROMFORGE_FOM_FOM_HPP
