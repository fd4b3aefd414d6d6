#pragma once

#include "heatlsm/types.hpp"

namespace heatlsm {

/// Point evaluation bundle of the heat kernel at one space-time pair.
struct KernelEval {
  Real value = 0.0;
  Eigen::Vector3d gradient = Eigen::Vector3d::Zero();  // first n entries used
  Real normal_derivative = 0.0;
};

/// Free-space heat kernel (4 pi (t-s))^{-n/2} exp(-|x-y|^2 / (4(t-s))) for
/// t > s and exactly zero otherwise. n = x.size() must be 2 or 3.
Real fundamental_solution(const Vector& x, Real t, const Vector& y, Real s);

/// Kernel value together with both spatial gradients and the normal
/// derivatives in the supplied unit directions. Everything vanishes for t <= s.
struct KernelDerivatives {
  KernelEval at_x;  // gradient_x and nu(x) . grad_x
  KernelEval at_y;  // gradient_y and nu(y) . grad_y
};

KernelDerivatives kernel_derivatives(const Vector& x, Real t, const Vector& y, Real s,
                                     const Vector& normal_at_x,
                                     const Vector& normal_at_y);

/// Robin combination d_{nu(x)} Gamma - lambda(x) Gamma.
Real robin_kernel(const Vector& x, Real t, const Vector& y, Real s, Real lambda_at_x,
                  const Vector& normal_at_x);

}  // namespace heatlsm
