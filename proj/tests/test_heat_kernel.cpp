#include "heatlsm/heat_kernel.hpp"

#include "heatlsm/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace heatlsm;

namespace {

Vector v2(Real x, Real y) {
  Vector v(2);
  v << x, y;
  return v;
}

Vector v3(Real x, Real y, Real z) {
  Vector v(3);
  v << x, y, z;
  return v;
}

}  // namespace

TEST_CASE("kernel is exactly zero for t <= s") {
  const Vector x = v2(0.3, -0.1), y = v2(0.3, -0.1);
  CHECK(fundamental_solution(x, 1.0, y, 2.0) == 0.0);
  CHECK(fundamental_solution(x, 1.0, y, 1.0) == 0.0);
  const KernelDerivatives kd =
      kernel_derivatives(v2(1, 0), 0.5, v2(0, 0), 0.7, v2(1, 0), v2(0, 1));
  CHECK(kd.at_x.value == 0.0);
  CHECK(kd.at_x.gradient.norm() == 0.0);
  CHECK(kd.at_y.normal_derivative == 0.0);
  CHECK(robin_kernel(v2(1, 0), 0.5, v2(0, 0), 0.7, 2.0, v2(1, 0)) == 0.0);
}

TEST_CASE("coincident points at t - s = 1/(4 pi) give exactly one in 2-D") {
  const Vector x = v2(0.2, 0.4);
  CHECK(fundamental_solution(x, 1.0 + 1.0 / (4.0 * M_PI), x, 1.0) ==
        doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("spatial normalization by adaptive quadrature") {
  const Vector y = v2(0.1, -0.2);
  const Real s = 0.3;
  for (Real t : {0.35, 0.8}) {
    QuadResult r = adaptive_quadrature_2d(
        [&](Real px, Real py) {
          return fundamental_solution(v2(px, py), t, y, s);
        },
        y[0] - 12.0, y[0] + 12.0, y[1] - 12.0, y[1] + 12.0, 1e-9);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-8));
  }
  // 3-D: factorizes into the 2-D mass times a 1-D Gaussian integral
  const Real t = 0.6, tau = t - s;
  QuadResult line = adaptive_quadrature(
      [&](Real pz) {
        return fundamental_solution(v3(0.1, -0.2, pz), t, v3(0.1, -0.2, 0.0), s);
      },
      -12.0, 12.0, 1e-12);
  const Real slice = 1.0 / (4.0 * M_PI * tau);  // 2-D kernel at zero offset
  CHECK(line.value == doctest::Approx(slice).epsilon(1e-9));
}

TEST_CASE("radial alignment identity for the source-side normal derivative") {
  // x - y parallel to nu(y): nu . grad_y = (|x-y| / (2(t-s))) Gamma
  const Vector y = v2(0.0, 0.0), x = v2(0.7, 0.0);
  Vector ny = v2(1.0, 0.0);
  const Real t = 0.9, s = 0.4;
  const KernelDerivatives kd = kernel_derivatives(x, t, y, s, ny, ny);
  const Real expected = (x - y).norm() / (2.0 * (t - s)) * kd.at_y.value;
  CHECK(kd.at_y.normal_derivative == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("analytic gradient against central differences") {
  const Vector x = v2(0.4, -0.3), y = v2(-0.2, 0.1);
  const Real t = 0.7, s = 0.2, h = 1e-5;
  const KernelDerivatives kd = kernel_derivatives(x, t, y, s, v2(0, 1), v2(1, 0));
  for (int d = 0; d < 2; ++d) {
    Vector xp = x, xm = x;
    xp[d] += h;
    xm[d] -= h;
    const Real fd =
        (fundamental_solution(xp, t, y, s) - fundamental_solution(xm, t, y, s)) /
        (2.0 * h);
    CHECK(std::abs(kd.at_x.gradient[d] - fd) <= 1e-6 * std::abs(fd));
    Vector yp = y, ym = y;
    yp[d] += h;
    ym[d] -= h;
    const Real fdy =
        (fundamental_solution(x, t, yp, s) - fundamental_solution(x, t, ym, s)) /
        (2.0 * h);
    CHECK(std::abs(kd.at_y.gradient[d] - fdy) <= 1e-6 * std::abs(fdy));
  }
}

TEST_CASE("robin kernel reductions") {
  const Vector x = v2(0.5, 0.2), y = v2(-0.1, -0.4), nx = v2(0.6, 0.8);
  const Real t = 1.1, s = 0.3;
  const KernelDerivatives kd = kernel_derivatives(x, t, y, s, nx, nx);
  CHECK(robin_kernel(x, t, y, s, 0.0, nx) == kd.at_x.normal_derivative);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<Real> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector xx = v2(u(rng), u(rng)), yy = v2(u(rng), u(rng));
    Vector n = v2(u(rng), u(rng));
    if (n.norm() < 1e-3) continue;
    n /= n.norm();
    const Real tt = 1.0 + u(rng) * 0.5, ss = 0.2;
    const Real lam = std::abs(u(rng)) * 3.0;
    const KernelDerivatives kk = kernel_derivatives(xx, tt, yy, ss, n, n);
    const Real composed = kk.at_x.normal_derivative - lam * kk.at_x.value;
    CHECK(robin_kernel(xx, tt, yy, ss, lam, n) == composed);
  }
}

TEST_CASE("kernel symmetry in the spatial arguments") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<Real> u(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector x = v2(u(rng), u(rng)), y = v2(u(rng), u(rng));
    const Real t = 1.5, s = 0.4;
    CHECK(fundamental_solution(x, t, y, s) == fundamental_solution(y, t, x, s));
  }
}

TEST_CASE("heat-equation residual by finite differences") {
  const Vector y = v2(0.0, 0.0);
  const Real s = 0.0, h = 1e-3;
  for (const auto& [px, py, t] : {std::tuple{0.3, 0.1, 0.05}, {0.8, -0.5, 0.4}}) {
    const Vector x = v2(px, py);
    const Real ut = (fundamental_solution(x, t + h, y, s) -
                     fundamental_solution(x, t - h, y, s)) /
                    (2.0 * h);
    Real lap = -4.0 * fundamental_solution(x, t, y, s);
    for (int d = 0; d < 2; ++d) {
      Vector xp = x, xm = x;
      xp[d] += h;
      xm[d] -= h;
      lap += fundamental_solution(xp, t, y, s) + fundamental_solution(xm, t, y, s);
    }
    lap /= h * h;
    const Real scale = std::abs(ut) + std::abs(lap) + 1e-300;
    CHECK(std::abs(ut - lap) / scale <= 1e-4);
  }
}

TEST_CASE("underflow guard yields exact zero") {
  // |x-y|^2 / (4(t-s)) > 700 -> hard zero
  CHECK(fundamental_solution(v2(0, 0), 1e-4, v2(1, 0), 0.0) == 0.0);
  CHECK(fundamental_solution(v2(0, 0), 1.0, v2(60, 0), 0.0) == 0.0);
}

TEST_CASE("input-domain errors") {
  CHECK_THROWS_AS(fundamental_solution(v2(std::nan(""), 0), 1.0, v2(0, 0), 0.0),
                  InputDomainError);
  Vector bad(4);
  bad.setZero();
  CHECK_THROWS_AS(fundamental_solution(bad, 1.0, bad, 0.0), InputDomainError);
  CHECK_THROWS_AS(robin_kernel(v2(1, 0), 1.0, v2(0, 0), 0.0, -1.0, v2(1, 0)),
                  InputDomainError);
}
