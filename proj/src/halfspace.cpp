#include "heatlsm/halfspace.hpp"

#include "heatlsm/quadrature.hpp"

#include <cmath>

namespace heatlsm {

void HalfspaceConfig::check() const {
  if (!(lambda0 >= 0.0) || !std::isfinite(lambda0))
    throw InputDomainError("halfspace: lambda0 must be finite and >= 0");
  if (!(xi3 < 0.0) || !(eta3 < 0.0))
    throw InputDomainError("halfspace: xi3 and eta3 must be negative");
  if (!(t > s)) throw InputDomainError("halfspace: need t > s");
  if (!std::isfinite(xi3) || !std::isfinite(eta3) || !std::isfinite(t) ||
      !std::isfinite(s) || !xi_perp.allFinite() || !eta_perp.allFinite())
    throw InputDomainError("halfspace: non-finite configuration");
}

Real integral_L(const HalfspaceConfig& config, Real abs_tol) {
  config.check();
  const Real tau = config.t - config.s;
  const Real c = config.xi3 + config.eta3;
  const Real lam = config.lambda0;

  // Gaussian decay sets the cutoff; tau P^2 = 40 leaves a tail below 1e-17.
  const Real cutoff = std::sqrt(40.0 / tau);

  auto integrand = [&](Real p) {
    const Real phase = p * c;
    Real moebius_cos, moebius_sin;  // (lam + ip)/(lam - ip) = e^{2i atan(p/lam)}
    if (lam == 0.0) {
      moebius_cos = -1.0;
      moebius_sin = 0.0;
    } else {
      const Real denom = lam * lam + p * p;
      moebius_cos = (lam * lam - p * p) / denom;
      moebius_sin = 2.0 * lam * p / denom;
    }
    return 2.0 * std::exp(-tau * p * p) *
           (moebius_cos * std::cos(phase) - moebius_sin * std::sin(phase));
  };

  // Panel breakpoints: resolve the Moebius transition at p ~ lambda0 and keep
  // the phase advance per panel below ~2 pi; tanh-sinh per panel.
  std::vector<Real> breaks{0.0};
  if (lam > 0.0) {
    for (Real b : {0.25 * lam, lam, 4.0 * lam, 16.0 * lam})
      if (b < cutoff) breaks.push_back(b);
  }
  const Real max_width = (std::abs(c) > 0.0) ? 2.0 * M_PI / std::abs(c)
                                             : std::numeric_limits<Real>::max();
  breaks.push_back(cutoff);
  std::sort(breaks.begin(), breaks.end());

  Real total = 0.0;
  Real achieved = 0.0;
  bool ok = true;
  for (size_t i = 0; i + 1 < breaks.size(); ++i) {
    Real a = breaks[i];
    const Real b = breaks[i + 1];
    if (!(b > a)) continue;
    const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / max_width)));
    const Real w = (b - a) / pieces;
    for (int k = 0; k < pieces; ++k) {
      QuadResult r = tanh_sinh(integrand, a + k * w, a + (k + 1) * w,
                               abs_tol / (2.0 * pieces * breaks.size()), 12);
      total += r.value;
      achieved += r.error_estimate;
      ok = ok && r.converged;
    }
  }
  if (!ok)
    throw NumericError("integral_L: quadrature did not converge, achieved tolerance " +
                       std::to_string(achieved));
  return total;
}

Real integral_L_residue_route(const HalfspaceConfig& config, Real abs_tol) {
  config.check();
  const Real tau = config.t - config.s;
  const Real c = config.xi3 + config.eta3;
  const Real lam = config.lambda0;

  const Real b = -c / std::pow(tau, 1.5);  // positive since c < 0
  const Real lam2 = lam * lam;
  const Real c2_over_4tau2 = c * c / (4.0 * tau * tau);

  auto j1_integrand = [&](Real q) {
    const Real A = c2_over_4tau2 - q * q / tau;
    const Real num = lam2 * lam2 - A * A - b * b * q * q;
    const Real den = (lam2 - A) * (lam2 - A) + b * b * q * q;
    return std::exp(-q * q) * num / den;
  };
  auto j2_integrand = [&](Real q) {
    const Real A = c2_over_4tau2 - q * q / tau;
    const Real num = (A - lam2) * b + 2.0 * b * q * q / tau;
    const Real den = (lam2 - A) * (lam2 - A) + b * b * q * q;
    return std::exp(-q * q) * num / den;
  };

  const Real Q = 6.5;  // e^{-Q^2} ~ 4e-19
  QuadResult j1 = adaptive_quadrature(j1_integrand, -Q, Q, abs_tol, 1e-13);
  QuadResult j2 = adaptive_quadrature(j2_integrand, -Q, Q, abs_tol, 1e-13);
  if (!j1.converged || !j2.converged)
    throw NumericError("integral_L_residue_route: quadrature did not converge");

  const Real gauss = std::exp(-c * c / (4.0 * tau));
  Real value = gauss * (j1.value / std::sqrt(tau) - lam * j2.value);
  // The contour shift to Im p = -|c|/(2 tau) crosses the pole at -i lambda0
  // only when |c|/(2 tau) > lambda0; the surface-mode term appears then.
  if (lam > 0.0 && -c / (2.0 * tau) > lam)
    value += 4.0 * M_PI * lam * std::exp(tau * lam2 + lam * c);
  return value;
}

Real w_plus(const HalfspaceConfig& config) {
  if (config.t <= config.s) {
    HalfspaceConfig probe = config;
    probe.t = probe.s + 1.0;
    probe.check();  // still validate the geometry fields
    return 0.0;
  }
  config.check();
  const Real tau = config.t - config.s;
  const Real c = config.xi3 + config.eta3;
  const Real lam = config.lambda0;
  const Real lateral2 = (config.xi_perp - config.eta_perp).squaredNorm();

  const Real L = integral_L(config);
  const Real surface_term =
      (lam > 0.0) ? lam / (2.0 * M_PI * tau) * std::exp(lam * lam * tau + lam * c) : 0.0;
  const Real gauss = std::exp(-lateral2 / (4.0 * tau));
  return (surface_term - L / (8.0 * M_PI * M_PI * tau)) * gauss;
}

Real coincident_limit_constant() {
  return 1.0 / (8.0 * std::exp(0.25) * std::pow(M_PI, 1.5));
}

std::vector<AsymptoticsRow> coincident_asymptotics(Real lambda0,
                                                   const std::vector<Real>& epsilons) {
  if (epsilons.empty())
    throw InputDomainError("coincident_asymptotics: empty epsilon list");
  std::vector<AsymptoticsRow> rows;
  rows.reserve(epsilons.size());
  const Real limit = coincident_limit_constant();
  for (Real eps : epsilons) {
    if (!(eps > 0.0)) throw InputDomainError("coincident_asymptotics: epsilon must be > 0");
    HalfspaceConfig cfg;
    cfg.lambda0 = lambda0;
    cfg.xi3 = cfg.eta3 = -0.5 * eps;
    cfg.s = 0.0;
    cfg.t = eps * eps;
    AsymptoticsRow row;
    row.epsilon = eps;
    row.w_plus_value = w_plus(cfg);
    row.scaled = eps * eps * eps * row.w_plus_value;
    row.deviation = std::abs(row.scaled - limit) / limit;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace heatlsm
