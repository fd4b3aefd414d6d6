#include "heatlsm/quadrature.hpp"

#include <doctest.h>

#include <cmath>

using namespace heatlsm;

TEST_CASE("gauss-legendre rules integrate polynomials") {
  const GaussRule& g = gauss_legendre(10);
  Real wsum = 0.0, x2 = 0.0;
  for (int i = 0; i < 10; ++i) {
    wsum += g.weights[i];
    x2 += g.weights[i] * g.nodes[i] * g.nodes[i];
  }
  CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(x2 == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("adaptive quadrature reaches the tolerance on a peaked integrand") {
  auto f = [](Real x) { return std::exp(-200.0 * (x - 0.3) * (x - 0.3)); };
  QuadResult r = adaptive_quadrature(f, 0.0, 1.0, 1e-12);
  const Real root = std::sqrt(200.0);
  const Real exact =
      std::sqrt(M_PI / 200.0) / 2.0 * (std::erf(root * 0.7) + std::erf(root * 0.3));
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(exact).epsilon(1e-10));
}

TEST_CASE("tanh-sinh handles an endpoint log singularity") {
  QuadResult r = tanh_sinh([](Real x) { return std::log(x); }, 0.0, 1.0, 1e-12);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(-1.0).epsilon(1e-11));
}

TEST_CASE("2-D quadrature integrates a Gaussian over a box") {
  QuadResult r = adaptive_quadrature_2d(
      [](Real x, Real y) { return std::exp(-x * x - y * y); }, -8.0, 8.0, -8.0, 8.0,
      1e-9);
  CHECK(r.value == doctest::Approx(M_PI).epsilon(1e-8));
}
