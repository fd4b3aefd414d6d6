#include "heatlsm/curve.hpp"

#include <cmath>

namespace heatlsm {

namespace {

// Kite benchmark shape: (cos t + 0.65 cos 2t - 0.65, 1.5 sin t).
inline void kite_terms(Real t, Real scale, Vec2& p, Vec2& d1, Vec2& d2) {
  p = scale * Vec2(std::cos(t) + 0.65 * std::cos(2 * t) - 0.65, 1.5 * std::sin(t));
  d1 = scale * Vec2(-std::sin(t) - 1.3 * std::sin(2 * t), 1.5 * std::cos(t));
  d2 = scale * Vec2(-std::cos(t) - 2.6 * std::cos(2 * t), -1.5 * std::sin(t));
}

}  // namespace

Vec2 ParametricCurve::position(Real theta) const {
  const Real t = clockwise ? -theta : theta;
  switch (kind) {
    case CurveKind::circle:
      return center + radius * Vec2(std::cos(t), std::sin(t));
    case CurveKind::ellipse:
      return center + Vec2(radii[0] * std::cos(t), radii[1] * std::sin(t));
    case CurveKind::kite: {
      Vec2 p, d1, d2;
      kite_terms(t, radius, p, d1, d2);
      return center + p;
    }
    case CurveKind::star: {
      const Real r = radius * (1.0 + amplitude * std::cos(lobes * t));
      return center + r * Vec2(std::cos(t), std::sin(t));
    }
  }
  return center;
}

Vec2 ParametricCurve::derivative(Real theta) const {
  const Real sign = clockwise ? -1.0 : 1.0;
  const Real t = clockwise ? -theta : theta;
  Vec2 d;
  switch (kind) {
    case CurveKind::circle:
      d = radius * Vec2(-std::sin(t), std::cos(t));
      break;
    case CurveKind::ellipse:
      d = Vec2(-radii[0] * std::sin(t), radii[1] * std::cos(t));
      break;
    case CurveKind::kite: {
      Vec2 p, d1, d2;
      kite_terms(t, radius, p, d1, d2);
      d = d1;
      break;
    }
    case CurveKind::star: {
      const Real r = radius * (1.0 + amplitude * std::cos(lobes * t));
      const Real dr = -radius * amplitude * lobes * std::sin(lobes * t);
      d = Vec2(dr * std::cos(t) - r * std::sin(t), dr * std::sin(t) + r * std::cos(t));
      break;
    }
  }
  return sign * d;
}

Vec2 ParametricCurve::second_derivative(Real theta) const {
  const Real t = clockwise ? -theta : theta;
  switch (kind) {
    case CurveKind::circle:
      return radius * Vec2(-std::cos(t), -std::sin(t));
    case CurveKind::ellipse:
      return Vec2(-radii[0] * std::cos(t), -radii[1] * std::sin(t));
    case CurveKind::kite: {
      Vec2 p, d1, d2;
      kite_terms(t, radius, p, d1, d2);
      return d2;
    }
    case CurveKind::star: {
      const Real r = radius * (1.0 + amplitude * std::cos(lobes * t));
      const Real dr = -radius * amplitude * lobes * std::sin(lobes * t);
      const Real ddr = -radius * amplitude * lobes * lobes * std::cos(lobes * t);
      return Vec2((ddr - r) * std::cos(t) - 2.0 * dr * std::sin(t),
                  (ddr - r) * std::sin(t) + 2.0 * dr * std::cos(t));
    }
  }
  return Vec2::Zero();
}

Vec2 ParametricCurve::normal(Real theta) const {
  const Vec2 d = derivative(theta);
  const Real len = d.norm();
  if (len <= 0.0) throw GeometryError("degenerate curve: zero tangent");
  // Rotate the tangent by -90 degrees; outward for a counterclockwise curve.
  return Vec2(d[1], -d[0]) / len;
}

Real ParametricCurve::curvature(Real theta) const {
  const Vec2 d1 = derivative(theta);
  const Vec2 d2 = second_derivative(theta);
  const Real speed3 = std::pow(d1.norm(), 3);
  if (speed3 <= 0.0) throw GeometryError("degenerate curve: zero tangent");
  return (d1[0] * d2[1] - d1[1] * d2[0]) / speed3;
}

ParametricCurve ParametricCurve::make_circle(const Vec2& center, Real radius) {
  ParametricCurve c;
  c.kind = CurveKind::circle;
  c.center = center;
  c.radius = radius;
  return c;
}

ParametricCurve ParametricCurve::make_ellipse(const Vec2& center, Real a, Real b) {
  ParametricCurve c;
  c.kind = CurveKind::ellipse;
  c.center = center;
  c.radii = Vec2(a, b);
  return c;
}

ParametricCurve ParametricCurve::make_kite(const Vec2& center, Real scale) {
  ParametricCurve c;
  c.kind = CurveKind::kite;
  c.center = center;
  c.radius = scale;
  return c;
}

ParametricCurve ParametricCurve::make_star(const Vec2& center, Real radius,
                                           Real amplitude, int lobes) {
  ParametricCurve c;
  c.kind = CurveKind::star;
  c.center = center;
  c.radius = radius;
  c.amplitude = amplitude;
  c.lobes = lobes;
  return c;
}

std::string to_string(CurveKind kind) {
  switch (kind) {
    case CurveKind::circle: return "circle";
    case CurveKind::ellipse: return "ellipse";
    case CurveKind::kite: return "kite";
    case CurveKind::star: return "star";
  }
  return "circle";
}

CurveKind curve_kind_from_string(const std::string& name) {
  if (name == "circle") return CurveKind::circle;
  if (name == "ellipse") return CurveKind::ellipse;
  if (name == "kite") return CurveKind::kite;
  if (name == "star") return CurveKind::star;
  throw ValidationError("unknown curve kind: " + name);
}

}  // namespace heatlsm
