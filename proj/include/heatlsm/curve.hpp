#pragma once

#include "heatlsm/types.hpp"

#include <string>

namespace heatlsm {

enum class CurveKind { circle, ellipse, kite, star };

/// Closed C^2 boundary curve given by an analytic parametrization over
/// [0, 2 pi). Counterclockwise by contract; a clockwise curve can be
/// constructed for diagnostics and is caught by the orientation check.
struct ParametricCurve {
  CurveKind kind = CurveKind::circle;
  Vec2 center = Vec2::Zero();
  Real radius = 1.0;        // circle, star base radius, kite scale
  Vec2 radii = Vec2(1, 1);  // ellipse semi-axes
  Real amplitude = 0.0;     // star deformation amplitude
  int lobes = 5;            // star lobe count
  bool clockwise = false;

  Vec2 position(Real theta) const;
  Vec2 derivative(Real theta) const;
  Vec2 second_derivative(Real theta) const;

  /// Unit outward normal (for a counterclockwise curve).
  Vec2 normal(Real theta) const;
  Real speed(Real theta) const { return derivative(theta).norm(); }
  Real curvature(Real theta) const;

  static ParametricCurve make_circle(const Vec2& center, Real radius);
  static ParametricCurve make_ellipse(const Vec2& center, Real a, Real b);
  static ParametricCurve make_kite(const Vec2& center, Real scale);
  static ParametricCurve make_star(const Vec2& center, Real radius, Real amplitude,
                                   int lobes);
};

std::string to_string(CurveKind kind);
CurveKind curve_kind_from_string(const std::string& name);

}  // namespace heatlsm
