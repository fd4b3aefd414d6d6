#pragma once

#include "heatlsm/curve.hpp"
#include "heatlsm/types.hpp"

#include <vector>

namespace heatlsm {

/// Discretized closed boundary curve crossed with a uniform time grid.
///
/// Spatial nodes sit at equispaced parameters; each node carries position,
/// unit normal, curvature and an arc-length weight (midpoint rule on the
/// periodic parametrization). Time steps l = 1..n_steps cover ((l-1) dt, l dt]
/// and densities are piecewise constant per step, collocated at midpoints.
struct SpaceTimeMesh {
  ParametricCurve curve;
  int n_space = 0;
  int n_steps = 0;
  Real horizon = 0.0;
  Real dt = 0.0;

  std::vector<Real> params;      // parameter of each node
  std::vector<Vec2> points;      // node positions
  std::vector<Vec2> normals;     // unit outward normals
  std::vector<Real> weights;     // arc-length quadrature weights
  std::vector<Real> curvatures;  // signed curvature at nodes

  Real param_step() const { return 2.0 * M_PI / n_space; }
  Real midpoint_time(int step) const { return (step - 0.5) * dt; }  // step is 1-based
  Real perimeter() const;
  /// Signed area computed from node/normal data; positive iff counterclockwise.
  Real signed_area() const;
  Real min_node_spacing() const;
};

SpaceTimeMesh build_mesh(const ParametricCurve& curve, int n_space, int n_steps,
                         Real horizon);

/// Spatial-only mesh for geometry queries (no time grid).
SpaceTimeMesh build_spatial_mesh(const ParametricCurve& curve, int n_space);

enum class Region { inside_cavity, in_conductor, outside, on_boundary };

/// Winding-number query of a single closed curve: > 0.5 means inside.
Real winding_number(const ParametricCurve& curve, const Vec2& point, int samples = 720);

/// Distance from a point to a curve estimated on a dense parameter sample.
Real distance_to_curve(const ParametricCurve& curve, const Vec2& point,
                       int samples = 1024);

std::string to_string(Region region);

}  // namespace heatlsm
