#include "heatlsm/halfspace.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace heatlsm;

namespace {

HalfspaceConfig config(Real lambda0, Real xi3, Real eta3, Real t, Real s) {
  HalfspaceConfig c;
  c.lambda0 = lambda0;
  c.xi3 = xi3;
  c.eta3 = eta3;
  c.t = t;
  c.s = s;
  return c;
}

Real image_kernel(const HalfspaceConfig& c) {
  const Real tau = c.t - c.s;
  const Real r2 = (c.xi_perp - c.eta_perp).squaredNorm() +
                  (c.xi3 + c.eta3) * (c.xi3 + c.eta3);
  return std::pow(4.0 * M_PI * tau, -1.5) * std::exp(-r2 / (4.0 * tau));
}

}  // namespace

TEST_CASE("lambda0 = 0 reduces L to the Gaussian-cosine closed form") {
  for (Real eps : {1e-1, 1e-2, 1e-3}) {
    HalfspaceConfig c = config(0.0, -eps / 2, -eps / 2, eps * eps, 0.0);
    const Real closed = -std::sqrt(M_PI) * std::exp(-0.25) / eps;
    CHECK(integral_L(c) == doctest::Approx(closed).epsilon(1e-11));
  }
  // generic non-coincident configuration
  HalfspaceConfig c = config(0.0, -0.3, -0.5, 0.2, 0.05);
  const Real tau = c.t - c.s, sum = c.xi3 + c.eta3;
  const Real closed = -std::sqrt(M_PI / tau) * std::exp(-sum * sum / (4.0 * tau));
  CHECK(integral_L(c) == doctest::Approx(closed).epsilon(1e-12));
}

TEST_CASE("L asymptote: the epsilon^-1 term dominates with a bounded remainder") {
  const Real lambda0 = 1.0;
  Real prev_scaled = std::numeric_limits<Real>::max();
  for (Real eps : {1e-1, 1e-2, 1e-3}) {
    HalfspaceConfig c = config(lambda0, -eps / 2, -eps / 2, eps * eps, 0.0);
    const Real L = integral_L(c);
    const Real bracket = L - (4.0 * M_PI * lambda0 - std::exp(-0.25) * std::sqrt(M_PI) / eps);
    CHECK(std::abs(bracket) <= 5.0);  // O(1) remainder
    const Real scaled = std::abs(bracket) * eps;
    CHECK(scaled < prev_scaled);
    prev_scaled = scaled;
  }
  CHECK(prev_scaled <= 0.01);
}

TEST_CASE("residue route agrees with the direct integral in both pole regimes") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<Real> u(0.0, 1.0);
  int crossed = 0, uncrossed = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const Real lambda0 = 3.0 * u(rng);
    const Real xi3 = -0.05 - 0.6 * u(rng);
    const Real eta3 = -0.05 - 0.6 * u(rng);
    const Real tau = 0.02 + 0.4 * u(rng);
    HalfspaceConfig c = config(lambda0, xi3, eta3, tau, 0.0);
    const Real shift = -(xi3 + eta3) / (2.0 * tau);
    if (std::abs(shift - lambda0) < 0.1 * std::max(lambda0, 1.0)) continue;  // skip borderline
    (shift > lambda0 ? crossed : uncrossed)++;
    const Real direct = integral_L(c);
    const Real residue = integral_L_residue_route(c);
    CHECK(std::abs(direct - residue) <= 1e-8 * std::max(std::abs(direct), 1.0));
  }
  CHECK(crossed >= 5);
  CHECK(uncrossed >= 5);
}

TEST_CASE("w_plus is the reflected fundamental solution when lambda0 = 0") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<Real> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    HalfspaceConfig c;
    c.lambda0 = 0.0;
    c.xi3 = -0.05 - 0.8 * u(rng);
    c.eta3 = -0.05 - 0.8 * u(rng);
    c.xi_perp = Vec2(u(rng) - 0.5, u(rng) - 0.5);
    c.eta_perp = Vec2(u(rng) - 0.5, u(rng) - 0.5);
    c.s = 0.1 * u(rng);
    c.t = c.s + 0.05 + 0.45 * u(rng);
    const Real image = image_kernel(c);
    CHECK(std::abs(w_plus(c) - image) <= 1e-8 * image);
  }
}

TEST_CASE("w_plus vanishes for t <= s and is symmetric under xi <-> eta") {
  HalfspaceConfig c = config(1.3, -0.4, -0.2, 0.1, 0.4);
  c.xi_perp = Vec2(0.3, 0.0);
  CHECK(w_plus(c) == 0.0);

  HalfspaceConfig a = config(0.8, -0.35, -0.15, 0.6, 0.1);
  a.xi_perp = Vec2(0.2, -0.4);
  a.eta_perp = Vec2(-0.1, 0.3);
  HalfspaceConfig b = a;
  std::swap(b.xi3, b.eta3);
  std::swap(b.xi_perp, b.eta_perp);
  CHECK(w_plus(a) == doctest::Approx(w_plus(b)).epsilon(1e-13));
}

TEST_CASE("coincident asymptotics approach the limiting constant linearly") {
  auto rows = coincident_asymptotics(1.0, {1e-1, 1e-2, 1e-3});
  REQUIRE(rows.size() == 3);
  CHECK(rows[2].deviation <= 0.05);
  CHECK(rows[1].deviation < rows[0].deviation);
  CHECK(rows[2].deviation < rows[1].deviation);
  // O(eps^-2) correction: deviation shrinks like eps over the decade
  const Real ratio10 = rows[1].deviation / rows[0].deviation;
  const Real ratio21 = rows[2].deviation / rows[1].deviation;
  CHECK(ratio10 == doctest::Approx(0.1).epsilon(0.5));
  CHECK(ratio21 == doctest::Approx(0.1).epsilon(0.5));

  CHECK(coincident_limit_constant() == doctest::Approx(0.01749).epsilon(5e-3));
  CHECK_THROWS_AS(coincident_asymptotics(1.0, {}), InputDomainError);
  CHECK_THROWS_AS(coincident_asymptotics(1.0, {-0.1}), InputDomainError);
}

TEST_CASE("heat-equation residual of w_plus by finite differences") {
  HalfspaceConfig base = config(0.7, -0.5, -0.4, 0.3, 0.1);
  base.xi_perp = Vec2(0.2, -0.1);
  base.eta_perp = Vec2(0.0, 0.1);
  const Real h = 1e-2;

  auto at = [&](Real dx1, Real dx2, Real dx3, Real dtime) {
    HalfspaceConfig c = base;
    c.xi_perp[0] += dx1;
    c.xi_perp[1] += dx2;
    c.xi3 += dx3;
    c.t += dtime;
    return w_plus(c);
  };
  auto residual_parts = [&](Real step) {
    const Real center = at(0, 0, 0, 0);
    const Real ut = (at(0, 0, 0, step) - at(0, 0, 0, -step)) / (2.0 * step);
    Real lap = -6.0 * center;
    lap += at(step, 0, 0, 0) + at(-step, 0, 0, 0);
    lap += at(0, step, 0, 0) + at(0, -step, 0, 0);
    lap += at(0, 0, step, 0) + at(0, 0, -step, 0);
    lap /= step * step;
    return std::pair{ut, lap};
  };
  // Richardson in h removes the leading h^2 truncation of both stencils.
  const auto [ut_h, lap_h] = residual_parts(h);
  const auto [ut_h2, lap_h2] = residual_parts(0.5 * h);
  const Real ut = (4.0 * ut_h2 - ut_h) / 3.0;
  const Real lap = (4.0 * lap_h2 - lap_h) / 3.0;
  const Real scale = std::abs(ut) + std::abs(lap) + 1e-300;
  CHECK(std::abs(ut - lap) / scale <= 1e-4);
}

TEST_CASE("impedance boundary condition at xi3 = 0 by one-sided differences") {
  // (d_xi3 - lambda0)(W+ + Gamma~) = 0 at the boundary plane
  HalfspaceConfig base = config(0.9, -1e-7, -0.35, 0.25, 0.05);
  base.xi_perp = Vec2(0.15, -0.2);
  base.eta_perp = Vec2(-0.05, 0.1);
  const Real h = 5e-4;

  auto total = [&](Real xi3) {
    HalfspaceConfig c = base;
    c.xi3 = xi3;
    const Real tau = c.t - c.s;
    const Real r2 = (c.xi_perp - c.eta_perp).squaredNorm() + (xi3 - c.eta3) * (xi3 - c.eta3);
    const Real gamma = std::pow(4.0 * M_PI * tau, -1.5) * std::exp(-r2 / (4.0 * tau));
    return w_plus(c) + gamma;
  };
  // one-sided second-order difference into the domain (xi3 < 0)
  const Real f0 = total(-1e-9), f1 = total(-h), f2 = total(-2.0 * h);
  const Real deriv = (3.0 * f0 - 4.0 * f1 + f2) / (2.0 * h);
  const Real residual = deriv - base.lambda0 * f0;
  CHECK(std::abs(residual) / (std::abs(deriv) + base.lambda0 * std::abs(f0)) <= 1e-3);
}

TEST_CASE("large impedance excites the growing surface mode") {
  // The boundary condition feeds energy in (d_nu u = +lambda u with the
  // normal leaving the half space), so the kernel carries the surface mode
  // lambda0 e^{lambda0^2 (t-s) + lambda0 (xi3+eta3)} / (2 pi (t-s)) rather
  // than a Dirichlet image limit. Check that this mode dominates W+ once
  // lambda0 (t-s) exceeds the depth scale.
  for (const auto& [lambda0, tau] : {std::pair{40.0, 0.25}, {80.0, 0.05}}) {
    HalfspaceConfig c = config(lambda0, -0.05, -0.05, tau, 0.0);
    const Real mode = lambda0 / (2.0 * M_PI * tau) *
                      std::exp(lambda0 * lambda0 * tau + lambda0 * (c.xi3 + c.eta3));
    const Real value = w_plus(c);
    CHECK(value > 0.0);
    CHECK(std::abs(value - mode) <= 0.05 * mode);
  }
  // and in the opposite (short-time, pole-crossed) regime W+ stays
  // Neumann-like: close to +image, far from the sign-flipped image
  HalfspaceConfig c = config(1000.0, -0.005, -0.005, 2.5e-6, 0.0);
  const Real image = image_kernel(c);
  CHECK(w_plus(c) > 0.0);
  CHECK(std::abs(w_plus(c) - image) < std::abs(w_plus(c) + image));
}

TEST_CASE("invalid configurations are rejected") {
  CHECK_THROWS_AS(integral_L(config(-1.0, -0.1, -0.1, 1.0, 0.0)), InputDomainError);
  CHECK_THROWS_AS(integral_L(config(1.0, 0.1, -0.1, 1.0, 0.0)), InputDomainError);
  CHECK_THROWS_AS(integral_L(config(1.0, -0.1, -0.1, 0.5, 0.5)), InputDomainError);
}
