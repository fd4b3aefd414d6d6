#pragma once

#include "heatlsm/layer_potentials.hpp"

#include <functional>

namespace heatlsm {

/// Polar annulus grid for the Crank-Nicolson reference solver. Radial nodes
/// include both boundary circles; the angular direction is periodic.
struct AnnulusGrid {
  Real r_inner = 0.4;
  Real r_outer = 1.0;
  int n_r = 64;
  int n_theta = 64;
  int n_time = 256;
  Real horizon = 1.0;

  void check() const;
  Real dr() const { return (r_outer - r_inner) / (n_r - 1); }
  Real dtheta() const { return 2.0 * M_PI / n_theta; }
  Real dt() const { return horizon / n_time; }
  Real radius(int i) const { return r_inner + i * dr(); }
  int index(int i, int j) const { return i * n_theta + j; }
};

/// Space-time field of one Crank-Nicolson solve. Columns are time levels
/// t_n = n dt, n = 0..n_time; rows are grid nodes in (radial, angular) order.
struct FdmSolution {
  AnnulusGrid grid;
  Matrix field;

  Real level_time(int n) const { return n * grid.dt(); }
  /// Trapezoidal-in-r quadrature of the field over the annulus at one level.
  Real integral(int level) const;
  Real l2_norm(int level) const;
};

/// Crank-Nicolson in time, second-order central differences in polar
/// coordinates; ghost nodes impose d_r u = lambda u at the inner circle and
/// d_r u = f at the outer circle. Zero initial data.
FdmSolution fdm_solve(const AnnulusGrid& grid, Real lambda,
                      const std::function<Real(Real, Real)>& flux);

/// Variant with a warm start (used by the dissipation property check).
FdmSolution fdm_solve_from(const AnnulusGrid& grid, Real lambda,
                           const std::function<Real(Real, Real)>& flux,
                           const Vector& initial);

/// Outer-circle trace resampled onto the collocation midpoints of a BEM
/// space-time mesh with matching angular nodes.
Matrix fdm_ntd_trace(const FdmSolution& solution, const SpaceTimeMesh& target_mesh);

}  // namespace heatlsm
