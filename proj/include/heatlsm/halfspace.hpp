#pragma once

#include "heatlsm/types.hpp"

#include <vector>

namespace heatlsm {

/// Configuration of the three-dimensional half-space reflected solution.
/// The half space is xi3 < 0 with the impedance condition on xi3 = 0.
struct HalfspaceConfig {
  Real lambda0 = 0.0;        // impedance at the flattening point, >= 0
  Real xi3 = -0.5;           // target depth, < 0
  Real eta3 = -0.5;          // source depth, < 0
  Vec2 xi_perp = Vec2::Zero();
  Vec2 eta_perp = Vec2::Zero();
  Real t = 1.0;
  Real s = 0.0;

  void check() const;
};

/// L(t, s, xi3, eta3; lambda0) evaluated from its definition as a real
/// oscillatory integral, after the p = sqrt(r) substitution:
///   L = Re int_0^inf 2 e^{-(t-s)p^2} (lambda0 + ip)/(lambda0 - ip) e^{ipc} dp,
/// with c = xi3 + eta3. Absolute tolerance 1e-10 by default.
Real integral_L(const HalfspaceConfig& config, Real abs_tol = 1e-10);

/// Same quantity through the shifted-contour route: the explicit surface-mode
/// term (present only when the contour shift |c|/(2(t-s)) crosses the pole at
/// lambda0) plus two Gaussian-weighted rational integrals.
Real integral_L_residue_route(const HalfspaceConfig& config, Real abs_tol = 1e-10);

/// Reflected half-space solution
///   W+(xi,t;eta,s) = (lambda0/(2 pi (t-s)) e^{lambda0^2 (t-s)+lambda0 (xi3+eta3)}
///                     - L/(8 pi^2 (t-s))) e^{-|xi'-eta'|^2/(4(t-s))},
/// and exactly 0 for t <= s.
Real w_plus(const HalfspaceConfig& config);

struct AsymptoticsRow {
  Real epsilon = 0.0;
  Real w_plus_value = 0.0;
  Real scaled = 0.0;     // epsilon^3 * W+
  Real deviation = 0.0;  // relative deviation from the limiting constant
};

/// Coincident-point short-time table: xi = eta, xi3 = eta3 = -eps/2,
/// t - s = eps^2. The scaled column tends to coincident_limit_constant().
std::vector<AsymptoticsRow> coincident_asymptotics(Real lambda0,
                                                   const std::vector<Real>& epsilons);

/// 1 / (8 e^{1/4} pi^{3/2}).
Real coincident_limit_constant();

}  // namespace heatlsm
