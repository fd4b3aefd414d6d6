#include "heatlsm/fdm.hpp"

#include <Eigen/Sparse>

#include <cmath>

namespace heatlsm {

void AnnulusGrid::check() const {
  if (!(0.0 < r_inner && r_inner < r_outer))
    throw InputDomainError("annulus: need 0 < R_inner < R_outer");
  if (n_r < 16 || n_theta < 16)
    throw InputDomainError("annulus: need at least 16 nodes per direction");
  if (n_time < 2) throw InputDomainError("annulus: need at least 2 time steps");
  if (!(horizon > 0.0)) throw InputDomainError("annulus: horizon must be positive");
}

Real FdmSolution::integral(int level) const {
  const Real hr = grid.dr();
  const Real ht = grid.dtheta();
  Real sum = 0.0;
  for (int i = 0; i < grid.n_r; ++i) {
    const Real w_r = (i == 0 || i == grid.n_r - 1) ? 0.5 : 1.0;
    for (int j = 0; j < grid.n_theta; ++j)
      sum += w_r * grid.radius(i) * field(grid.index(i, j), level);
  }
  return sum * hr * ht;
}

Real FdmSolution::l2_norm(int level) const {
  const Real hr = grid.dr();
  const Real ht = grid.dtheta();
  Real sum = 0.0;
  for (int i = 0; i < grid.n_r; ++i) {
    const Real w_r = (i == 0 || i == grid.n_r - 1) ? 0.5 : 1.0;
    for (int j = 0; j < grid.n_theta; ++j) {
      const Real v = field(grid.index(i, j), level);
      sum += w_r * grid.radius(i) * v * v;
    }
  }
  return std::sqrt(sum * hr * ht);
}

namespace {

using Triplet = Eigen::Triplet<Real>;
using Sparse = Eigen::SparseMatrix<Real>;

// Discrete Laplacian with the Robin/Neumann ghost nodes eliminated, plus the
// boundary-flux load factor: L u + b(t), b_j = (2/hr + 1/r_out) f_j(t).
void build_laplacian(const AnnulusGrid& g, Real lambda, Sparse& laplacian,
                     Real& flux_factor) {
  const Real hr = g.dr();
  const Real ht = g.dtheta();
  const int n = g.n_r * g.n_theta;
  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(n) * 5);

  for (int i = 0; i < g.n_r; ++i) {
    const Real r = g.radius(i);
    const Real inv_hr2 = 1.0 / (hr * hr);
    const Real inv_2hr_r = 1.0 / (2.0 * hr * r);
    const Real inv_ht2_r2 = 1.0 / (ht * ht * r * r);
    for (int j = 0; j < g.n_theta; ++j) {
      const int row = g.index(i, j);
      const int jp = g.index(i, (j + 1) % g.n_theta);
      const int jm = g.index(i, (j + g.n_theta - 1) % g.n_theta);
      trips.emplace_back(row, jp, inv_ht2_r2);
      trips.emplace_back(row, jm, inv_ht2_r2);
      Real diag = -2.0 * inv_hr2 - 2.0 * inv_ht2_r2;
      if (i == 0) {
        // ghost: u_{-1} = u_1 - 2 hr lambda u_0
        trips.emplace_back(row, g.index(1, j), 2.0 * inv_hr2);
        diag += -2.0 * hr * lambda * inv_hr2 + lambda / r;
      } else if (i == g.n_r - 1) {
        // ghost: u_N = u_{N-2} + 2 hr f
        trips.emplace_back(row, g.index(g.n_r - 2, j), 2.0 * inv_hr2);
      } else {
        trips.emplace_back(row, g.index(i + 1, j), inv_hr2 + inv_2hr_r);
        trips.emplace_back(row, g.index(i - 1, j), inv_hr2 - inv_2hr_r);
      }
      trips.emplace_back(row, row, diag);
    }
  }
  laplacian.resize(n, n);
  laplacian.setFromTriplets(trips.begin(), trips.end());
  flux_factor = 2.0 / hr + 1.0 / g.r_outer;
}

}  // namespace

FdmSolution fdm_solve_from(const AnnulusGrid& grid, Real lambda,
                           const std::function<Real(Real, Real)>& flux,
                           const Vector& initial) {
  grid.check();
  if (!(lambda >= 0.0)) throw InputDomainError("fdm_solve: lambda must be >= 0");

  const int n = grid.n_r * grid.n_theta;
  if (initial.size() != n) throw InputDomainError("fdm_solve: initial field size mismatch");

  Sparse laplacian;
  Real flux_factor = 0.0;
  build_laplacian(grid, lambda, laplacian, flux_factor);

  const Real dt = grid.dt();
  Sparse identity(n, n);
  identity.setIdentity();
  Sparse lhs = identity - (0.5 * dt) * laplacian;
  Sparse rhs_op = identity + (0.5 * dt) * laplacian;

  Eigen::SparseLU<Sparse> lu;
  lu.compute(lhs);
  if (lu.info() != Eigen::Success)
    throw SolverError("fdm_solve: Crank-Nicolson system factorization failed");

  FdmSolution sol;
  sol.grid = grid;
  sol.field.resize(n, grid.n_time + 1);
  sol.field.col(0) = initial;

  auto load = [&](Real t) {
    Vector b = Vector::Zero(n);
    for (int j = 0; j < grid.n_theta; ++j)
      b[grid.index(grid.n_r - 1, j)] = flux_factor * flux(j * grid.dtheta(), t);
    return b;
  };

  Vector b_prev = load(0.0);
  for (int step = 1; step <= grid.n_time; ++step) {
    Vector b_next = load(step * dt);
    Vector rhs = rhs_op * sol.field.col(step - 1) + (0.5 * dt) * (b_prev + b_next);
    sol.field.col(step) = lu.solve(rhs);
    if (lu.info() != Eigen::Success) throw SolverError("fdm_solve: back-substitution failed");
    b_prev.swap(b_next);
  }
  return sol;
}

FdmSolution fdm_solve(const AnnulusGrid& grid, Real lambda,
                      const std::function<Real(Real, Real)>& flux) {
  return fdm_solve_from(grid, lambda, flux,
                        Vector::Zero(static_cast<long>(grid.n_r) * grid.n_theta));
}

Matrix fdm_ntd_trace(const FdmSolution& solution, const SpaceTimeMesh& target_mesh) {
  const AnnulusGrid& g = solution.grid;
  if (target_mesh.n_space != g.n_theta)
    throw InputDomainError("fdm_ntd_trace: angular node counts differ");
  const Real ratio_real = target_mesh.dt / g.dt();
  const int ratio = static_cast<int>(std::lround(ratio_real));
  if (std::abs(ratio_real - ratio) > 1e-9 || ratio < 1 || ratio % 2 != 0)
    throw InputDomainError(
        "fdm_ntd_trace: FDM steps per BEM step must be a positive even integer");

  Matrix trace(g.n_theta, target_mesh.n_steps);
  for (int k = 0; k < target_mesh.n_steps; ++k) {
    const int level = k * ratio + ratio / 2;  // midpoint of BEM step k+1
    for (int j = 0; j < g.n_theta; ++j)
      trace(j, k) = solution.field(g.index(g.n_r - 1, j), level);
  }
  return trace;
}

}  // namespace heatlsm
