#include "heatlsm/scenario.hpp"

#include "heatlsm/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace heatlsm;

namespace {

// independent point-in-polygon oracle: even-odd ray casting on a dense polygon
bool ray_casting_inside(const ParametricCurve& curve, const Vec2& p, int samples = 2048) {
  bool inside = false;
  Vec2 prev = curve.position(0.0);
  for (int i = 1; i <= samples; ++i) {
    const Vec2 cur = curve.position(2.0 * M_PI * i / samples);
    if ((prev[1] > p[1]) != (cur[1] > p[1])) {
      const Real x_cross = prev[0] + (p[1] - prev[1]) / (cur[1] - prev[1]) * (cur[0] - prev[0]);
      if (x_cross > p[0]) inside = !inside;
    }
    prev = cur;
  }
  return inside;
}

}  // namespace

TEST_CASE("unit circle mesh: weights sum to the perimeter, normals are radial") {
  SpaceTimeMesh mesh = build_mesh(ParametricCurve::make_circle(Vec2::Zero(), 1.0), 64, 8, 1.0);
  CHECK(mesh.perimeter() == doctest::Approx(2.0 * M_PI).epsilon(1e-10 / (2 * M_PI)));
  for (int i = 0; i < mesh.n_space; ++i) {
    const Real theta = mesh.params[i];
    CHECK(mesh.normals[i][0] == doctest::Approx(std::cos(theta)).epsilon(1e-13));
    CHECK(mesh.normals[i][1] == doctest::Approx(std::sin(theta)).epsilon(1e-13));
    CHECK(mesh.normals[i].norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mesh.curvatures[i] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("kite perimeter against the adaptive arc-length oracle") {
  const ParametricCurve kite = ParametricCurve::make_kite(Vec2(0.1, -0.2), 0.7);
  SpaceTimeMesh mesh = build_spatial_mesh(kite, 256);
  QuadResult oracle = adaptive_quadrature([&](Real th) { return kite.speed(th); }, 0.0,
                                          2.0 * M_PI, 1e-13);
  REQUIRE(oracle.converged);
  CHECK(std::abs(mesh.perimeter() - oracle.value) / oracle.value <= 1e-8);
}

TEST_CASE("orientation contract: positive signed area for every preset") {
  const std::vector<ParametricCurve> presets{
      ParametricCurve::make_circle(Vec2(0.3, 0.1), 0.8),
      ParametricCurve::make_ellipse(Vec2::Zero(), 1.2, 0.7),
      ParametricCurve::make_kite(Vec2::Zero(), 0.5),
      ParametricCurve::make_star(Vec2(-0.1, 0.2), 0.6, 0.2, 7)};
  for (const auto& c : presets) {
    SpaceTimeMesh mesh = build_spatial_mesh(c, 128);
    CHECK(mesh.signed_area() > 0.0);
  }
  ParametricCurve cw = ParametricCurve::make_circle(Vec2::Zero(), 1.0);
  cw.clockwise = true;
  CHECK(build_spatial_mesh(cw, 64).signed_area() < 0.0);
}

TEST_CASE("refinement halves the chord length and the perimeter error is high order") {
  const ParametricCurve kite = ParametricCurve::make_kite(Vec2::Zero(), 1.0);
  SpaceTimeMesh coarse = build_spatial_mesh(kite, 32);
  SpaceTimeMesh fine = build_spatial_mesh(kite, 64);
  auto max_chord = [](const SpaceTimeMesh& m) {
    Real best = 0.0;
    for (int i = 0; i < m.n_space; ++i)
      best = std::max(best, (m.points[(i + 1) % m.n_space] - m.points[i]).norm());
    return best;
  };
  CHECK(max_chord(fine) <= 0.6 * max_chord(coarse));

  QuadResult oracle = adaptive_quadrature([&](Real th) { return kite.speed(th); }, 0.0,
                                          2.0 * M_PI, 1e-13);
  const Real err8 = std::abs(build_spatial_mesh(kite, 8).perimeter() - oracle.value);
  const Real err16 = std::abs(build_spatial_mesh(kite, 16).perimeter() - oracle.value);
  CHECK(err16 <= err8 / 4.0);  // at least second order (trapezoid is spectral here)
}

TEST_CASE("point location on the concentric benchmark") {
  Scenario s = Scenario::concentric_benchmark(1.0, 0.4, 1.0, 32, 8, 1.0);
  CHECK(point_location(s, Vec2(0.0, 0.0)) == Region::inside_cavity);
  CHECK(point_location(s, Vec2(2.0, 0.0)) == Region::outside);
  CHECK(point_location(s, Vec2(0.7, 0.0)) == Region::in_conductor);
  CHECK(point_location(s, Vec2(1.0 + 1e-12, 0.0)) == Region::on_boundary);
}

TEST_CASE("point location agrees with the ray-casting oracle on random points") {
  Scenario s;
  s.outer = ParametricCurve::make_kite(Vec2::Zero(), 1.0);
  s.cavity = ParametricCurve::make_star(Vec2(-0.3, 0.0), 0.3, 0.15, 5);
  s.lambda_constant = 1.0;
  s.n_space_outer = s.n_space_inner = 32;
  s.n_steps = 4;

  std::mt19937_64 rng(42);
  std::uniform_real_distribution<Real> u(-2.2, 2.2);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec2 p(u(rng), u(rng));
    // skip points hugging either curve, where polygon oracles disagree with
    // the smooth curve by discretization
    if (distance_to_curve(s.outer, p) < 1e-3 ||
        distance_to_curve(*s.cavity, p) < 1e-3)
      continue;
    ++checked;
    const Region tag = point_location(s, p);
    const bool in_outer = ray_casting_inside(s.outer, p);
    const bool in_cavity = ray_casting_inside(*s.cavity, p);
    if (!in_outer) {
      CHECK(tag == Region::outside);
    } else if (in_cavity) {
      CHECK(tag == Region::inside_cavity);
    } else {
      CHECK(tag == Region::in_conductor);
    }
  }
  CHECK(checked > 800);
}

TEST_CASE("degenerate curve is rejected") {
  // amplitude 1 pinches the star through its center with a genuine cusp
  // (r and r' vanish together at the lobe minima)
  ParametricCurve bad = ParametricCurve::make_star(Vec2::Zero(), 1.0, 1.0, 2);
  CHECK_THROWS_AS(build_spatial_mesh(bad, 64), GeometryError);
}

TEST_CASE("scenario json round trip and validation errors") {
  Scenario s = Scenario::concentric_benchmark(1.0, 0.4, 1.0, 16, 8, 1.0);
  Scenario loaded = Scenario::from_json_text(s.to_json_text());
  CHECK(loaded.outer.radius == doctest::Approx(1.0));
  CHECK(loaded.cavity->radius == doctest::Approx(0.4));
  CHECK(loaded.lambda_constant == doctest::Approx(1.0));

  CHECK_THROWS_WITH_AS(Scenario::from_json_text(R"({"T": 1.0})"),
                       doctest::Contains("scenario.outer"), ValidationError);
  CHECK_THROWS_WITH_AS(
      Scenario::from_json_text(
          R"({"outer": {"kind": "circle", "radius": 1.0}, "T": -1, "N_s_outer": 16, "N_t": 8})"),
      doctest::Contains("scenario.T"), ValidationError);
  // cavity too close to the outer boundary
  CHECK_THROWS_WITH_AS(
      Scenario::from_json_text(
          R"({"outer": {"kind": "circle", "radius": 1.0},
              "cavity": {"kind": "circle", "radius": 0.99},
              "lambda": 1.0, "T": 1.0, "N_s_outer": 16, "N_s_inner": 16, "N_t": 8})"),
      doctest::Contains("gap"), ValidationError);
  // negative impedance sample
  CHECK_THROWS_WITH_AS(
      Scenario::from_json_text(
          R"({"outer": {"kind": "circle", "radius": 1.0},
              "cavity": {"kind": "circle", "radius": 0.4},
              "lambda": -0.5, "T": 1.0, "N_s_outer": 16, "N_s_inner": 16, "N_t": 8})"),
      doctest::Contains("lambda"), ValidationError);
  // nodewise lambda with the wrong length
  CHECK_THROWS_WITH_AS(
      Scenario::from_json_text(
          R"({"outer": {"kind": "circle", "radius": 1.0},
              "cavity": {"kind": "circle", "radius": 0.4},
              "lambda": [1.0, 2.0], "T": 1.0, "N_s_outer": 16, "N_s_inner": 16, "N_t": 8})"),
      doctest::Contains("lambda"), ValidationError);
}

TEST_CASE("nodewise lambda is accepted and sampled") {
  Scenario s = Scenario::concentric_benchmark(1.0, 0.4, 1.0, 16, 8, 1.0);
  s.lambda_is_constant = false;
  s.lambda_samples.assign(16, 0.0);
  for (int i = 0; i < 16; ++i) s.lambda_samples[i] = 1.0 + 0.5 * std::sin(2.0 * M_PI * i / 16);
  Scenario loaded = Scenario::from_json_text(s.to_json_text());
  CHECK_FALSE(loaded.lambda_is_constant);
  CHECK(loaded.lambda_at(3) == doctest::Approx(s.lambda_samples[3]));
}

TEST_CASE("scenario hash is stable and sensitive") {
  Scenario a = Scenario::concentric_benchmark();
  Scenario b = Scenario::concentric_benchmark();
  CHECK(a.hash() == b.hash());
  b.horizon = 2.0;
  CHECK(a.hash() != b.hash());
}
