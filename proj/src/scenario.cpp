#include "heatlsm/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace heatlsm {

using nlohmann::json;

namespace {

ParametricCurve curve_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path + ": expected an object");
  if (!j.contains("kind")) throw ValidationError(path + ".kind: missing");
  ParametricCurve c;
  c.kind = curve_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("center")) {
    const auto& cc = j.at("center");
    if (!cc.is_array() || cc.size() != 2)
      throw ValidationError(path + ".center: expected [x, y]");
    c.center = Vec2(cc[0].get<Real>(), cc[1].get<Real>());
  }
  auto need_positive = [&](const char* field) {
    if (!j.contains(field)) throw ValidationError(path + "." + field + ": missing");
    const Real v = j.at(field).get<Real>();
    if (!(v > 0.0)) throw ValidationError(path + "." + field + ": must be positive");
    return v;
  };
  switch (c.kind) {
    case CurveKind::circle:
      c.radius = need_positive("radius");
      break;
    case CurveKind::ellipse: {
      if (!j.contains("radii")) throw ValidationError(path + ".radii: missing");
      const auto& r = j.at("radii");
      if (!r.is_array() || r.size() != 2)
        throw ValidationError(path + ".radii: expected [a, b]");
      c.radii = Vec2(r[0].get<Real>(), r[1].get<Real>());
      if (!(c.radii[0] > 0.0 && c.radii[1] > 0.0))
        throw ValidationError(path + ".radii: must be positive");
      break;
    }
    case CurveKind::kite:
      c.radius = need_positive("scale");
      break;
    case CurveKind::star: {
      c.radius = need_positive("radius");
      if (!j.contains("amplitude")) throw ValidationError(path + ".amplitude: missing");
      c.amplitude = j.at("amplitude").get<Real>();
      if (!(c.amplitude >= 0.0 && c.amplitude < 0.5))
        throw ValidationError(path + ".amplitude: must be in [0, 0.5)");
      c.lobes = j.value("lobes", 5);
      if (c.lobes < 2 || c.lobes > 16)
        throw ValidationError(path + ".lobes: must be in [2, 16]");
      break;
    }
  }
  if (j.contains("orientation")) {
    const std::string o = j.at("orientation").get<std::string>();
    if (o == "cw")
      c.clockwise = true;
    else if (o != "ccw")
      throw ValidationError(path + ".orientation: expected \"ccw\" or \"cw\"");
  }
  return c;
}

json curve_to_json(const ParametricCurve& c) {
  json j;
  j["kind"] = to_string(c.kind);
  j["center"] = {c.center[0], c.center[1]};
  switch (c.kind) {
    case CurveKind::circle: j["radius"] = c.radius; break;
    case CurveKind::ellipse: j["radii"] = {c.radii[0], c.radii[1]}; break;
    case CurveKind::kite: j["scale"] = c.radius; break;
    case CurveKind::star:
      j["radius"] = c.radius;
      j["amplitude"] = c.amplitude;
      j["lobes"] = c.lobes;
      break;
  }
  if (c.clockwise) j["orientation"] = "cw";
  return j;
}

bool curve_self_intersects(const ParametricCurve& curve, int samples = 512) {
  std::vector<Vec2> p(samples);
  for (int i = 0; i < samples; ++i) p[i] = curve.position(2.0 * M_PI * i / samples);
  auto seg_intersect = [](const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    auto cross = [](const Vec2& u, const Vec2& v) { return u[0] * v[1] - u[1] * v[0]; };
    const Real d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
    const Real d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
  };
  for (int i = 0; i < samples; ++i) {
    const Vec2 &a = p[i], &b = p[(i + 1) % samples];
    for (int k = i + 2; k < samples; ++k) {
      if (i == 0 && k == samples - 1) continue;  // adjacent through the seam
      if (seg_intersect(a, b, p[k], p[(k + 1) % samples])) return true;
    }
  }
  return false;
}

void validate_geometry(Scenario& s, const std::string& root, bool allow_misoriented) {
  SpaceTimeMesh outer = build_spatial_mesh(s.outer, std::max(64, s.n_space_outer));
  if (!allow_misoriented && outer.signed_area() <= 0.0)
    throw ValidationError(root + ".outer: curve must be counterclockwise");
  if (curve_self_intersects(s.outer))
    throw ValidationError(root + ".outer: curve self-intersects");

  if (s.has_cavity()) {
    SpaceTimeMesh inner = build_spatial_mesh(*s.cavity, std::max(64, s.n_space_inner));
    if (!allow_misoriented && inner.signed_area() <= 0.0)
      throw ValidationError(root + ".cavity: curve must be counterclockwise");
    if (curve_self_intersects(*s.cavity))
      throw ValidationError(root + ".cavity: curve self-intersects");

    // closure(D) inside Omega with a positive gap
    Real min_dist = std::numeric_limits<Real>::max();
    for (const Vec2& q : inner.points)
      min_dist = std::min(min_dist, distance_to_curve(s.outer, q));
    for (const Vec2& q : inner.points) {
      if (std::abs(winding_number(s.outer, q)) < 0.5)
        throw ValidationError(root + ".cavity: not contained in the outer domain");
    }
    if (min_dist < s.min_gap)
      throw ValidationError(root + ".cavity: gap to the outer boundary below min_gap");
  }
}

}  // namespace

Vector Scenario::lambda_vector() const {
  Vector v(n_space_inner);
  for (int i = 0; i < n_space_inner; ++i) v[i] = lambda_at(i);
  return v;
}

SpaceTimeMesh Scenario::outer_mesh() const {
  return build_mesh(outer, n_space_outer, n_steps, horizon);
}

SpaceTimeMesh Scenario::inner_mesh() const {
  if (!has_cavity()) throw GeometryError("scenario has no cavity");
  return build_mesh(*cavity, n_space_inner, n_steps, horizon);
}

Scenario Scenario::concentric_benchmark(Real outer_radius, Real cavity_radius,
                                        Real lambda, int n_space, int n_steps,
                                        Real horizon) {
  Scenario s;
  s.outer = ParametricCurve::make_circle(Vec2::Zero(), outer_radius);
  s.cavity = ParametricCurve::make_circle(Vec2::Zero(), cavity_radius);
  s.lambda_constant = lambda;
  s.lambda_is_constant = true;
  s.horizon = horizon;
  s.n_space_outer = n_space;
  s.n_space_inner = n_space;
  s.n_steps = n_steps;
  return s;
}

Scenario Scenario::from_json_text(const std::string& text, bool allow_misoriented) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scenario: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("scenario: expected a JSON object");

  Scenario s;
  if (!j.contains("outer")) throw ValidationError("scenario.outer: missing");
  s.outer = curve_from_json(j.at("outer"), "scenario.outer");

  if (j.contains("cavity") && !j.at("cavity").is_null())
    s.cavity = curve_from_json(j.at("cavity"), "scenario.cavity");

  if (!j.contains("T")) throw ValidationError("scenario.T: missing");
  s.horizon = j.at("T").get<Real>();
  if (!(s.horizon > 0.0)) throw ValidationError("scenario.T: must be positive");

  auto need_int = [&](const char* field, int lo) {
    if (!j.contains(field)) throw ValidationError(std::string("scenario.") + field + ": missing");
    const int v = j.at(field).get<int>();
    if (v < lo)
      throw ValidationError(std::string("scenario.") + field + ": must be >= " +
                            std::to_string(lo));
    return v;
  };
  s.n_space_outer = need_int("N_s_outer", 8);
  s.n_steps = need_int("N_t", 4);
  s.min_gap = j.value("min_gap", 0.05);
  if (!(s.min_gap > 0.0)) throw ValidationError("scenario.min_gap: must be positive");

  if (s.has_cavity()) {
    s.n_space_inner = need_int("N_s_inner", 8);
    if (!j.contains("lambda")) throw ValidationError("scenario.lambda: missing");
    const auto& lam = j.at("lambda");
    if (lam.is_number()) {
      s.lambda_is_constant = true;
      s.lambda_constant = lam.get<Real>();
      if (!(s.lambda_constant >= 0.0) || !std::isfinite(s.lambda_constant))
        throw ValidationError("scenario.lambda: must be finite and >= 0");
    } else if (lam.is_array()) {
      s.lambda_is_constant = false;
      s.lambda_samples.resize(lam.size());
      for (size_t i = 0; i < lam.size(); ++i) {
        s.lambda_samples[i] = lam[i].get<Real>();
        if (!(s.lambda_samples[i] >= 0.0) || !std::isfinite(s.lambda_samples[i]))
          throw ValidationError("scenario.lambda[" + std::to_string(i) +
                                "]: must be finite and >= 0");
      }
      if (static_cast<int>(lam.size()) != s.n_space_inner)
        throw ValidationError("scenario.lambda: nodewise array must have N_s_inner entries");
    } else {
      throw ValidationError("scenario.lambda: expected a number or an array");
    }
  } else {
    if (j.contains("lambda") && !j.at("lambda").is_null())
      throw ValidationError("scenario.lambda: set but scenario has no cavity");
    s.n_space_inner = j.value("N_s_inner", 0);
  }

  validate_geometry(s, "scenario", allow_misoriented);
  return s;
}

Scenario Scenario::load(const std::string& path, bool allow_misoriented) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str(), allow_misoriented);
}

Scenario Scenario::load_blind(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  json j;
  try {
    j = json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scenario: invalid JSON: ") + e.what());
  }
  if (j.contains("cavity") || j.contains("lambda"))
    throw ValidationError(
        "scenario.cavity: a blind reconstruction scenario must not describe the cavity");
  return from_json_text(buffer.str());
}

std::string Scenario::to_json_text() const {
  json j;
  j["outer"] = curve_to_json(outer);
  if (has_cavity()) {
    j["cavity"] = curve_to_json(*cavity);
    if (lambda_is_constant)
      j["lambda"] = lambda_constant;
    else
      j["lambda"] = lambda_samples;
    j["N_s_inner"] = n_space_inner;
  }
  j["T"] = horizon;
  j["N_s_outer"] = n_space_outer;
  j["N_t"] = n_steps;
  j["min_gap"] = min_gap;
  return j.dump(2);
}

std::string Scenario::hash() const {
  const std::string text = to_json_text();
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

Region point_location(const Scenario& scenario, const Vec2& point, Real boundary_tol) {
  if (distance_to_curve(scenario.outer, point) < boundary_tol) return Region::on_boundary;
  if (std::abs(winding_number(scenario.outer, point)) < 0.5) return Region::outside;
  if (scenario.has_cavity()) {
    if (distance_to_curve(*scenario.cavity, point) < boundary_tol)
      return Region::on_boundary;
    if (std::abs(winding_number(*scenario.cavity, point)) > 0.5)
      return Region::inside_cavity;
  }
  return Region::in_conductor;
}

}  // namespace heatlsm
