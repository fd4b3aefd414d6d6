#pragma once

#include "heatlsm/mesh.hpp"

#include <optional>
#include <string>
#include <vector>

namespace heatlsm {

/// Geometry, impedance and discretization of one experiment.
///
/// JSON schema (validated on load; field paths reported on violation):
/// {
///   "outer":   {"kind": "circle|ellipse|kite|star", "center": [x, y], ...},
///   "cavity":  optional curve object,
///   "lambda":  number >= 0, or array of N_s_inner nodewise samples,
///   "T":       horizon > 0,
///   "N_s_outer": int >= 8, "N_s_inner": int >= 8, "N_t": int >= 4,
///   "min_gap": optional, default 0.05
/// }
struct Scenario {
  ParametricCurve outer;
  std::optional<ParametricCurve> cavity;
  std::vector<Real> lambda_samples;  // one per inner node (empty without cavity)
  Real lambda_constant = 0.0;
  bool lambda_is_constant = true;
  Real horizon = 1.0;
  int n_space_outer = 32;
  int n_space_inner = 32;
  int n_steps = 32;
  Real min_gap = 0.05;

  bool has_cavity() const { return cavity.has_value(); }
  /// Impedance at inner node i.
  Real lambda_at(int i) const {
    return lambda_is_constant ? lambda_constant : lambda_samples[i];
  }
  Vector lambda_vector() const;

  SpaceTimeMesh outer_mesh() const;
  SpaceTimeMesh inner_mesh() const;

  static Scenario concentric_benchmark(Real outer_radius = 1.0, Real cavity_radius = 0.4,
                                       Real lambda = 1.0, int n_space = 48,
                                       int n_steps = 48, Real horizon = 1.0);

  /// Parse and validate from a JSON string. With allow_misoriented the
  /// orientation contract is not enforced (used by the validation command,
  /// which reports it as a check instead).
  static Scenario from_json_text(const std::string& text, bool allow_misoriented = false);
  static Scenario load(const std::string& path, bool allow_misoriented = false);

  /// Parse a cavity-free scenario and reject any cavity field (blind contract
  /// of the reconstruction front end).
  static Scenario load_blind(const std::string& path);

  std::string to_json_text() const;
  /// FNV-1a hash of the canonical JSON encoding.
  std::string hash() const;
};

/// Classify a sampling point against the scenario geometry.
Region point_location(const Scenario& scenario, const Vec2& point,
                      Real boundary_tol = 1e-9);

}  // namespace heatlsm
