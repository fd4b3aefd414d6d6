#include "heatlsm/forward.hpp"

#include "heatlsm/heat_kernel.hpp"

#include <cmath>
#include <random>

namespace heatlsm {

namespace {

CausalBlockOperator scale_rows(const CausalBlockOperator& op, const Vector& diag) {
  CausalBlockOperator out = op;
  for (auto& block : out.lag) block = diag.asDiagonal() * block;
  return out;
}

std::vector<Vector> stack_steps(const std::vector<const Matrix*>& parts, int n_steps) {
  int total = 0;
  for (const Matrix* p : parts) total += static_cast<int>(p->rows());
  std::vector<Vector> rhs(n_steps, Vector::Zero(total));
  for (int k = 0; k < n_steps; ++k) {
    int off = 0;
    for (const Matrix* p : parts) {
      rhs[k].segment(off, p->rows()) = p->col(k);
      off += static_cast<int>(p->rows());
    }
  }
  return rhs;
}

Matrix unstack(const std::vector<Vector>& steps, int offset, int rows) {
  Matrix out(rows, steps.size());
  for (size_t k = 0; k < steps.size(); ++k) out.col(k) = steps[k].segment(offset, rows);
  return out;
}

// Free-space kernel value and normal derivative on the outer boundary for a
// fixed interior pole (y, s); used by the Green-function corrector.
Real gamma2(const Vec2& x, Real t, const Vec2& y, Real s) {
  const Real tau = t - s;
  if (tau <= 0.0) return 0.0;
  const Real z = (x - y).squaredNorm() / (4.0 * tau);
  if (z > kernel_exponent_cutoff) return 0.0;
  return std::exp(-z) / (4.0 * M_PI * tau);
}

}  // namespace

NtdGapMatrix gap_matrix(const NtdGapMatrix& lambda_d, const NtdGapMatrix& lambda_empty) {
  if (lambda_d.map.rows() != lambda_empty.map.rows() ||
      lambda_d.n_steps != lambda_empty.n_steps)
    throw AssemblyError("gap_matrix: maps live on different grids");
  NtdGapMatrix f;
  f.map = lambda_d.map - lambda_empty.map;
  f.tag = "gap_F";
  f.n_space = lambda_d.n_space;
  f.n_steps = lambda_d.n_steps;
  f.dt = lambda_d.dt;
  return f;
}

Real reciprocity_defect(const NtdGapMatrix& ntd, const Vector& spacetime_weights,
                        int n_pairs, std::uint64_t seed) {
  const long m = ntd.map.rows();
  if (spacetime_weights.size() != m)
    throw InputDomainError("reciprocity_defect: weight size mismatch");
  const int n = ntd.n_space, steps = ntd.n_steps;

  auto reverse_time = [&](const Vector& v) {
    Vector r(m);
    for (int k = 0; k < steps; ++k)
      r.segment(static_cast<long>(k) * n, n) =
          v.segment(static_cast<long>(steps - 1 - k) * n, n);
    return r;
  };

  std::mt19937_64 rng(seed);
  auto gaussian = [&]() {
    const Real u1 = (static_cast<Real>(rng() >> 11) + 0.5) * 0x1.0p-53;
    const Real u2 = (static_cast<Real>(rng() >> 11) + 0.5) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  };

  Real worst = 0.0;
  for (int p = 0; p < n_pairs; ++p) {
    Vector f(m), g(m);
    for (long i = 0; i < m; ++i) f[i] = gaussian();
    for (long i = 0; i < m; ++i) g[i] = gaussian();
    const Vector lf = ntd.map * f;
    const Vector lg = ntd.map * g;
    const Real a = lf.dot(spacetime_weights.cwiseProduct(reverse_time(g)));
    const Real b = lg.dot(spacetime_weights.cwiseProduct(reverse_time(f)));
    const Real denom = std::max({std::abs(a), std::abs(b), 1e-300});
    worst = std::max(worst, std::abs(a - b) / denom);
  }
  return worst;
}

struct ForwardContext::Operators {
  // cavity-free path
  CausalBlockOperator n22, v22, k22;
  MotSystem empty_system;

  // indirect two-density path
  std::unique_ptr<MotSystem> indirect_system;
  CausalBlockOperator n12, n21, v21, v11, n11, v12;

  // direct (paper) system
  std::unique_ptr<MotSystem> direct_system;
  CausalBlockOperator k11, k21, k12, w11, w21;

  Operators(const SpaceTimeMesh& outer) : empty_system({outer.n_space}, {outer.n_space}, outer.n_steps, outer.dt) {}
};

ForwardContext::ForwardContext(const Scenario& scenario)
    : scenario_(scenario), outer_(scenario.outer_mesh()) {
  if (scenario_.has_cavity()) inner_ = scenario_.inner_mesh();

  ops_ = std::make_unique<Operators>(outer_);
  ops_->n22 = assemble_adjoint_double_layer(outer_, outer_);
  ops_->v22 = assemble_single_layer(outer_, outer_);
  ops_->k22 = assemble_double_layer(outer_, outer_);
  ops_->empty_system.add_nodewise(0, 0, Vector::Constant(outer_.n_space, 0.5));
  ops_->empty_system.add_operator(0, 0, 1.0, ops_->n22);

  if (scenario_.has_cavity()) {
    const Vector lambda = scenario_.lambda_vector();
    ops_->n12 = assemble_adjoint_double_layer(inner_, outer_);
    ops_->n21 = assemble_adjoint_double_layer(outer_, inner_);
    ops_->v21 = assemble_single_layer(outer_, inner_);
    ops_->v11 = assemble_single_layer(inner_, inner_);
    ops_->n11 = assemble_adjoint_double_layer(inner_, inner_);
    ops_->v12 = assemble_single_layer(inner_, outer_);

    auto sys = std::make_unique<MotSystem>(
        std::vector<int>{outer_.n_space, inner_.n_space},
        std::vector<int>{outer_.n_space, inner_.n_space}, outer_.n_steps, outer_.dt);
    // d_nu u = f on the outer boundary (interior trace of the single layers)
    sys->add_nodewise(0, 0, Vector::Constant(outer_.n_space, 0.5));
    sys->add_operator(0, 0, 1.0, ops_->n22);
    sys->add_operator(0, 1, 1.0, ops_->n12);
    // d_nu u - lambda u = 0 on the cavity boundary (trace from the conductor)
    sys->add_operator(1, 0, 1.0, ops_->n21);
    sys->add_operator(1, 0, -1.0, scale_rows(ops_->v21, lambda));
    sys->add_nodewise(1, 1, Vector::Constant(inner_.n_space, -0.5));
    sys->add_operator(1, 1, 1.0, ops_->n11);
    sys->add_operator(1, 1, -1.0, scale_rows(ops_->v11, lambda));
    ops_->indirect_system = std::move(sys);
  }
}

ForwardContext::~ForwardContext() = default;

const SpaceTimeMesh& ForwardContext::inner_mesh() const {
  if (!scenario_.has_cavity()) throw GeometryError("scenario has no cavity");
  return inner_;
}

const ForwardContext::Operators& ForwardContext::ops() const { return *ops_; }

const CausalBlockOperator& ForwardContext::op_v22() const { return ops().v22; }
const CausalBlockOperator& ForwardContext::op_v21() const {
  inner_mesh();
  return ops().v21;
}
const CausalBlockOperator& ForwardContext::op_v12() const {
  inner_mesh();
  return ops().v12;
}
const CausalBlockOperator& ForwardContext::op_n21() const {
  inner_mesh();
  return ops().n21;
}
const MotSystem& ForwardContext::indirect_system() const {
  inner_mesh();
  return *ops().indirect_system;
}

void ForwardContext::ops_warmup() const {
  ops().empty_system.step_condition();
  if (scenario_.has_cavity()) ops().indirect_system->step_condition();
}

Vector ForwardContext::spacetime_weights() const {
  Vector w(static_cast<long>(outer_.n_space) * outer_.n_steps);
  for (int k = 0; k < outer_.n_steps; ++k)
    for (int i = 0; i < outer_.n_space; ++i)
      w[static_cast<long>(k) * outer_.n_space + i] = outer_.weights[i] * outer_.dt;
  return w;
}

Vector ForwardContext::inner_spacetime_weights() const {
  const SpaceTimeMesh& m = inner_mesh();
  Vector w(static_cast<long>(m.n_space) * m.n_steps);
  for (int k = 0; k < m.n_steps; ++k)
    for (int i = 0; i < m.n_space; ++i)
      w[static_cast<long>(k) * m.n_space + i] = m.weights[i] * m.dt;
  return w;
}

Real ForwardContext::robin_residual(const BoundaryDensity& u1,
                                    const BoundaryDensity& u2) const {
  const Vector lambda = scenario_.lambda_vector();
  Real num = 0.0, den1 = 0.0, den2 = 0.0;
  for (int k = 0; k < inner_.n_steps; ++k) {
    for (int i = 0; i < inner_.n_space; ++i) {
      const Real w = inner_.weights[i] * inner_.dt;
      const Real r = u1.values(i, k) - lambda[i] * u2.values(i, k);
      num += w * r * r;
      den1 += w * u1.values(i, k) * u1.values(i, k);
      den2 += w * u2.values(i, k) * u2.values(i, k);
    }
  }
  const Real denom = std::max({std::sqrt(den1), std::sqrt(den2), 1e-300});
  return std::sqrt(num) / denom;
}

Matrix ForwardContext::empty_density(const Matrix& flux) const {
  if (flux.rows() != outer_.n_space || flux.cols() != outer_.n_steps)
    throw InputDomainError("flux shape does not match the outer mesh");
  if (!flux.allFinite()) throw InputDomainError("flux has non-finite entries");
  std::vector<Vector> rhs = stack_steps({&flux}, outer_.n_steps);
  std::vector<Vector> psi = ops().empty_system.solve(rhs);
  return unstack(psi, 0, outer_.n_space);
}

Matrix ForwardContext::empty_trace(const Matrix& psi) const {
  return ops().v22.apply(psi);
}

ForwardSolution ForwardContext::solve_empty(const Matrix& flux) const {
  ForwardSolution sol;
  Matrix psi = empty_density(flux);
  sol.u3 = BoundaryDensity(outer_, empty_trace(psi));
  sol.flux = flux;
  sol.path = "empty";
  sol.condition_estimate = ops().empty_system.step_condition();
  return sol;
}

Vector ForwardContext::empty_field(const Matrix& psi, const std::vector<Vec2>& points,
                                   const std::vector<Real>& times) const {
  return evaluate_potential(LayerKind::single_layer, outer_, psi, points, times);
}

ForwardSolution ForwardContext::solve_indirect(const Matrix& flux) const {
  if (!scenario_.has_cavity())
    throw GeometryError("solve_indirect: scenario has no cavity");
  if (flux.rows() != outer_.n_space || flux.cols() != outer_.n_steps)
    throw InputDomainError("flux shape does not match the outer mesh");
  if (!flux.allFinite()) throw InputDomainError("flux has non-finite entries");

  const Operators& o = ops();
  const Matrix zero_inner = Matrix::Zero(inner_.n_space, inner_.n_steps);
  std::vector<Vector> rhs = stack_steps({&flux, &zero_inner}, outer_.n_steps);
  std::vector<Vector> sol_steps = o.indirect_system->solve(rhs);
  Matrix alpha = unstack(sol_steps, 0, outer_.n_space);
  Matrix beta = unstack(sol_steps, outer_.n_space, inner_.n_space);

  ForwardSolution sol;
  sol.u2 = BoundaryDensity(inner_, o.v21.apply(alpha) + o.v11.apply(beta));
  sol.u1 = BoundaryDensity(inner_, o.n21.apply(alpha) + o.n11.apply(beta) - 0.5 * beta);
  sol.u3 = BoundaryDensity(outer_, o.v22.apply(alpha) + o.v12.apply(beta));
  sol.flux = flux;
  sol.path = "indirect";
  sol.condition_estimate = o.indirect_system->step_condition();
  sol.robin_residual = robin_residual(sol.u1, sol.u2);
  sol.robin_flag = sol.robin_residual > 5e-2;
  return sol;
}

ForwardSolution ForwardContext::solve_direct(const Matrix& flux) const {
  if (!scenario_.has_cavity()) throw GeometryError("solve_direct: scenario has no cavity");
  if (flux.rows() != outer_.n_space || flux.cols() != outer_.n_steps)
    throw InputDomainError("flux shape does not match the outer mesh");
  if (!flux.allFinite()) throw InputDomainError("flux has non-finite entries");

  Operators& o = *ops_;
  if (!o.direct_system) {
    const Vector lambda = scenario_.lambda_vector();
    o.k11 = assemble_double_layer(inner_, inner_);
    o.k21 = assemble_double_layer(outer_, inner_);
    o.k12 = assemble_double_layer(inner_, outer_);
    o.w11 = assemble_hypersingular(inner_, inner_);
    o.w21 = assemble_hypersingular(outer_, inner_);

    auto sys = std::make_unique<MotSystem>(
        std::vector<int>{inner_.n_space, inner_.n_space, outer_.n_space},
        std::vector<int>{inner_.n_space, inner_.n_space, outer_.n_space},
        outer_.n_steps, outer_.dt);
    sys->add_operator(0, 0, 1.0, o.v11);
    sys->add_nodewise(0, 1, Vector::Constant(inner_.n_space, 0.5));
    sys->add_operator(0, 1, -1.0, o.k11);
    sys->add_operator(0, 2, 1.0, o.k21);

    sys->add_nodewise(1, 0, Vector::Constant(inner_.n_space, -0.5));
    sys->add_operator(1, 0, 1.0, o.n11);
    sys->add_operator(1, 1, 1.0, o.w11);
    sys->add_nodewise(1, 1, lambda);
    sys->add_operator(1, 2, -1.0, o.w21);

    sys->add_operator(2, 0, 1.0, o.v12);
    sys->add_operator(2, 1, -1.0, o.k12);
    sys->add_nodewise(2, 2, Vector::Constant(outer_.n_space, 0.5));
    sys->add_operator(2, 2, 1.0, o.k22);
    o.direct_system = std::move(sys);
  }

  const Matrix rhs_v21 = o.v21.apply(flux);
  const Matrix rhs_n21 = o.n21.apply(flux);
  const Matrix rhs_v22 = o.v22.apply(flux);
  std::vector<Vector> rhs = stack_steps({&rhs_v21, &rhs_n21, &rhs_v22}, outer_.n_steps);
  std::vector<Vector> sol_steps = o.direct_system->solve(rhs);

  ForwardSolution sol;
  sol.u1 = BoundaryDensity(inner_, unstack(sol_steps, 0, inner_.n_space));
  sol.u2 = BoundaryDensity(inner_, unstack(sol_steps, inner_.n_space, inner_.n_space));
  sol.u3 = BoundaryDensity(outer_, unstack(sol_steps, 2 * inner_.n_space, outer_.n_space));
  sol.flux = flux;
  sol.path = "direct";
  sol.condition_estimate = o.direct_system->step_condition();
  sol.robin_residual = robin_residual(sol.u1, sol.u2);
  sol.robin_flag = sol.robin_residual > 5e-2;
  return sol;
}

NtdGapMatrix ForwardContext::ntd_matrix(bool with_cavity) const {
  const int n = outer_.n_space;
  const int steps = outer_.n_steps;
  NtdGapMatrix ntd;
  ntd.tag = with_cavity ? "lambda_D" : "lambda_empty";
  ntd.n_space = n;
  ntd.n_steps = steps;
  ntd.dt = outer_.dt;
  ntd.map = Matrix::Zero(static_cast<long>(n) * steps, static_cast<long>(n) * steps);

  // One solve per spatial basis node with the flux supported in step 1; the
  // whole map follows by time invariance of the causal pipeline.
  std::vector<Matrix> response(n);
  for (int j = 0; j < n; ++j) {
    Matrix basis = Matrix::Zero(n, steps);
    basis(j, 0) = 1.0;
    if (with_cavity) {
      response[j] = solve_indirect(basis).u3.values;
    } else {
      response[j] = empty_trace(empty_density(basis));
    }
  }
  for (int k = 0; k < steps; ++k)
    for (int l = 0; l <= k; ++l)
      for (int j = 0; j < n; ++j)
        ntd.map.block(static_cast<long>(k) * n, static_cast<long>(l) * n + j, n, 1) =
            response[j].col(k - l);
  return ntd;
}

BoundaryDensity ForwardContext::green_neumann_trace(const Vec2& y, Real s,
                                                    bool* accuracy_warning) const {
  if (!(s > 0.0) || !(s < outer_.horizon))
    throw InputDomainError("green_neumann_trace: need 0 < s < T");
  if (std::abs(winding_number(outer_.curve, y)) < 0.5)
    throw InputDomainError("green_neumann_trace: pole must lie inside the domain");
  const Real dist = distance_to_curve(outer_.curve, y);
  const Real mean_cell = outer_.perimeter() / outer_.n_space;
  if (accuracy_warning != nullptr) *accuracy_warning = dist < 2.0 * mean_cell;

  // corrector flux: -d_nu Gamma_(y,s) sampled at collocation midpoints
  Matrix corrector_flux(outer_.n_space, outer_.n_steps);
  for (int k = 0; k < outer_.n_steps; ++k) {
    const Real t = outer_.midpoint_time(k + 1);
    for (int i = 0; i < outer_.n_space; ++i) {
      const Real tau = t - s;
      if (tau <= 0.0) {
        corrector_flux(i, k) = 0.0;
        continue;
      }
      const Real v = gamma2(outer_.points[i], t, y, s);
      corrector_flux(i, k) =
          v * (outer_.points[i] - y).dot(outer_.normals[i]) / (2.0 * tau);
    }
  }
  Matrix psi = empty_density(corrector_flux);
  Matrix trace = empty_trace(psi);
  for (int k = 0; k < outer_.n_steps; ++k) {
    const Real t = outer_.midpoint_time(k + 1);
    for (int i = 0; i < outer_.n_space; ++i)
      trace(i, k) += gamma2(outer_.points[i], t, y, s);
  }
  return BoundaryDensity(outer_, std::move(trace));
}

Vector ForwardContext::evaluate_field(const ForwardSolution& solution,
                                      const std::vector<Vec2>& points,
                                      const std::vector<Real>& times) const {
  if (points.size() != times.size())
    throw InputDomainError("evaluate_field: points/times size mismatch");
  for (size_t q = 0; q < points.size(); ++q) {
    const Region region = point_location(scenario_, points[q]);
    const bool ok = scenario_.has_cavity() ? region == Region::in_conductor
                                           : region != Region::outside &&
                                                 region != Region::on_boundary;
    if (!ok)
      throw InputDomainError("evaluate_field: point " + std::to_string(q) +
                             " outside the field region (" + to_string(region) + ")");
  }

  Vector u = evaluate_potential(LayerKind::single_layer, outer_, solution.flux, points,
                                times);
  u -= evaluate_potential(LayerKind::double_layer, outer_, solution.u3.values, points,
                          times);
  if (scenario_.has_cavity() && solution.u1.mesh != nullptr) {
    u -= evaluate_potential(LayerKind::single_layer, inner_, solution.u1.values, points,
                            times);
    u += evaluate_potential(LayerKind::double_layer, inner_, solution.u2.values, points,
                            times);
  }
  return u;
}

}  // namespace heatlsm
