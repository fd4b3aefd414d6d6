#pragma once

#include "heatlsm/types.hpp"

#include <functional>
#include <vector>

namespace heatlsm {

/// Gauss-Legendre rule on [-1, 1]. Nodes and weights are computed once per
/// order by Newton iteration on the Legendre recurrence and cached.
struct GaussRule {
  std::vector<Real> nodes;
  std::vector<Real> weights;
};

const GaussRule& gauss_legendre(int order);

struct QuadResult {
  Real value = 0.0;
  Real error_estimate = 0.0;
  bool converged = false;
};

/// Adaptive panel integration with an embedded Gauss pair (GL10 vs GL20).
QuadResult adaptive_quadrature(const std::function<Real(Real)>& f, Real a, Real b,
                               Real abs_tol, Real rel_tol = 1e-12, int max_depth = 48);

/// Tanh-sinh quadrature on [a, b] with level doubling until the requested
/// absolute tolerance is met. Robust for endpoint singularities.
QuadResult tanh_sinh(const std::function<Real(Real)>& f, Real a, Real b,
                     Real abs_tol, int max_level = 12);

/// Nested adaptive quadrature over the box [ax, bx] x [ay, by].
QuadResult adaptive_quadrature_2d(const std::function<Real(Real, Real)>& f, Real ax,
                                  Real bx, Real ay, Real by, Real tol);

/// Fixed-order Gauss-Legendre integral of f over [a, b].
Real gauss_panel(const std::function<Real(Real)>& f, Real a, Real b, int order);

}  // namespace heatlsm
