// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ROMFORGE_FOM_EQUATION_HPP
#define ROMFORGE_FOM_EQUATION_HPP

namespace romforge::fom
{

/// Coefficients of  -mu*Lap(u) + advection_scale * c . grad(u) = rhs_const
/// with c = (cos phi, sin phi), du/dnu = beta at x = 0 and -beta at x = 1,
/// u = 0 at y = 0 and y = 1, u = dirichlet_hole_value on the holes.
struct EquationParams
{
  double phi = 0.0;
  double beta = 1.0;
  double mu = 1.0;
  double dirichlet_hole_value = 1.0;
  double advection_scale = 0.1;
  double rhs_const = 1.0;
};

}  // namespace romforge::fom

#endif  // ROMFORGE_FOM_EQUATION_HPP
