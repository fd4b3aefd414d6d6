#include "heatlsm/mesh.hpp"

#include <cmath>

namespace heatlsm {

Real SpaceTimeMesh::perimeter() const {
  Real sum = 0.0;
  for (Real w : weights) sum += w;
  return sum;
}

Real SpaceTimeMesh::signed_area() const {
  // div theorem: area = 1/2 * closed integral of x . nu dsigma
  Real sum = 0.0;
  for (int i = 0; i < n_space; ++i) sum += weights[i] * points[i].dot(normals[i]);
  return 0.5 * sum;
}

Real SpaceTimeMesh::min_node_spacing() const {
  Real best = std::numeric_limits<Real>::max();
  for (int i = 0; i < n_space; ++i) {
    const Vec2 d = points[(i + 1) % n_space] - points[i];
    best = std::min(best, d.norm());
  }
  return best;
}

SpaceTimeMesh build_spatial_mesh(const ParametricCurve& curve, int n_space) {
  if (n_space < 8) throw GeometryError("build_mesh: need at least 8 spatial nodes");
  SpaceTimeMesh mesh;
  mesh.curve = curve;
  mesh.n_space = n_space;
  const Real h = 2.0 * M_PI / n_space;

  // reject degenerate parametrizations on a fine grid
  const int fine = std::max(1024, 8 * n_space);
  for (int i = 0; i < fine; ++i) {
    if (curve.speed(2.0 * M_PI * i / fine) < 1e-12)
      throw GeometryError("degenerate curve: zero tangent on parameter grid");
  }

  mesh.params.resize(n_space);
  mesh.points.resize(n_space);
  mesh.normals.resize(n_space);
  mesh.weights.resize(n_space);
  mesh.curvatures.resize(n_space);
  for (int i = 0; i < n_space; ++i) {
    const Real theta = i * h;
    mesh.params[i] = theta;
    mesh.points[i] = curve.position(theta);
    mesh.normals[i] = curve.normal(theta);
    mesh.weights[i] = curve.speed(theta) * h;
    mesh.curvatures[i] = curve.curvature(theta);
  }
  return mesh;
}

SpaceTimeMesh build_mesh(const ParametricCurve& curve, int n_space, int n_steps,
                         Real horizon) {
  if (n_steps < 4) throw GeometryError("build_mesh: need at least 4 time steps");
  if (!(horizon > 0.0)) throw GeometryError("build_mesh: horizon must be positive");
  SpaceTimeMesh mesh = build_spatial_mesh(curve, n_space);
  mesh.n_steps = n_steps;
  mesh.horizon = horizon;
  mesh.dt = horizon / n_steps;
  return mesh;
}

Real winding_number(const ParametricCurve& curve, const Vec2& point, int samples) {
  Real total = 0.0;
  Vec2 prev = curve.position(0.0) - point;
  for (int i = 1; i <= samples; ++i) {
    const Vec2 cur = curve.position(2.0 * M_PI * i / samples) - point;
    total += std::atan2(prev[0] * cur[1] - prev[1] * cur[0], prev.dot(cur));
    prev = cur;
  }
  return total / (2.0 * M_PI);
}

Real distance_to_curve(const ParametricCurve& curve, const Vec2& point, int samples) {
  Real best = std::numeric_limits<Real>::max();
  Vec2 prev = curve.position(0.0);
  for (int i = 1; i <= samples; ++i) {
    const Vec2 cur = curve.position(2.0 * M_PI * i / samples);
    // distance to segment [prev, cur]
    const Vec2 seg = cur - prev;
    const Real len2 = seg.squaredNorm();
    Real u = len2 > 0.0 ? (point - prev).dot(seg) / len2 : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    best = std::min(best, (point - (prev + u * seg)).norm());
    prev = cur;
  }
  return best;
}

std::string to_string(Region region) {
  switch (region) {
    case Region::inside_cavity: return "inside_cavity";
    case Region::in_conductor: return "in_conductor";
    case Region::outside: return "outside";
    case Region::on_boundary: return "on_boundary";
  }
  return "outside";
}

}  // namespace heatlsm
