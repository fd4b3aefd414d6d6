#include "heatlsm/heat_kernel.hpp"

#include <cmath>

namespace heatlsm {

namespace {

void check_point(const Vector& x, const char* name) {
  if (x.size() != 2 && x.size() != 3)
    throw InputDomainError(std::string(name) + ": dimension must be 2 or 3");
  if (!x.allFinite()) throw InputDomainError(std::string(name) + ": non-finite coordinates");
}

void check_time(Real t, const char* name) {
  if (!std::isfinite(t)) throw InputDomainError(std::string(name) + ": non-finite time");
}

}  // namespace

Real fundamental_solution(const Vector& x, Real t, const Vector& y, Real s) {
  check_point(x, "x");
  check_point(y, "y");
  check_time(t, "t");
  check_time(s, "s");
  if (x.size() != y.size()) throw InputDomainError("x and y dimensions differ");

  const Real tau = t - s;
  if (tau <= 0.0) return 0.0;
  const Real z = (x - y).squaredNorm() / (4.0 * tau);
  if (z > kernel_exponent_cutoff) return 0.0;
  const int n = static_cast<int>(x.size());
  const Real norm = (n == 2) ? 1.0 / (4.0 * M_PI * tau)
                             : 1.0 / std::pow(4.0 * M_PI * tau, 1.5);
  return norm * std::exp(-z);
}

KernelDerivatives kernel_derivatives(const Vector& x, Real t, const Vector& y, Real s,
                                     const Vector& normal_at_x,
                                     const Vector& normal_at_y) {
  KernelDerivatives out;
  const Real value = fundamental_solution(x, t, y, s);
  out.at_x.value = value;
  out.at_y.value = value;
  if (value == 0.0) return out;

  const Real tau = t - s;
  const int n = static_cast<int>(x.size());
  // grad_x Gamma = -Gamma (x-y)/(2 tau), grad_y Gamma = +Gamma (x-y)/(2 tau)
  for (int i = 0; i < n; ++i) {
    const Real g = value * (x[i] - y[i]) / (2.0 * tau);
    out.at_x.gradient[i] = -g;
    out.at_y.gradient[i] = g;
  }
  for (int i = 0; i < n; ++i) {
    out.at_x.normal_derivative += normal_at_x[i] * out.at_x.gradient[i];
    out.at_y.normal_derivative += normal_at_y[i] * out.at_y.gradient[i];
  }
  return out;
}

Real robin_kernel(const Vector& x, Real t, const Vector& y, Real s, Real lambda_at_x,
                  const Vector& normal_at_x) {
  if (lambda_at_x < 0.0) throw InputDomainError("robin_kernel: lambda must be >= 0");
  const KernelDerivatives kd = kernel_derivatives(x, t, y, s, normal_at_x, normal_at_x);
  return kd.at_x.normal_derivative - lambda_at_x * kd.at_x.value;
}

}  // namespace heatlsm
