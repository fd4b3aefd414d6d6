#include "heatlsm/layer_potentials.hpp"

#include "heatlsm/quadrature.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace heatlsm {

namespace {

inline Real expint_e1(Real x) {
  if (x > kernel_exponent_cutoff) return 0.0;
  return -std::expint(-x);
}

// e^{-r2/(4 tau_hi)} - e^{-r2/(4 tau_lo)}, stable for nearby exponents.
inline Real gauss_bracket(Real r2, Real tau_hi, Real tau_lo) {
  const Real a = r2 / (4.0 * tau_hi);
  if (tau_lo <= 0.0) return a > kernel_exponent_cutoff ? 0.0 : std::exp(-a);
  const Real b = r2 / (4.0 * tau_lo);
  if (a > kernel_exponent_cutoff) return 0.0;
  if (b > kernel_exponent_cutoff) return std::exp(-a);
  return std::exp(-b) * std::expm1(b - a);
}

// (1+a)e^{-a} - (1+b)e^{-b} with a = r2/(4 tau_hi), b = r2/(4 tau_lo).
inline Real gauss_moment_bracket(Real r2, Real tau_hi, Real tau_lo) {
  const Real a = r2 / (4.0 * tau_hi);
  if (tau_lo <= 0.0) return a > kernel_exponent_cutoff ? 0.0 : (1.0 + a) * std::exp(-a);
  const Real b = r2 / (4.0 * tau_lo);
  if (a > kernel_exponent_cutoff) return 0.0;
  if (b > kernel_exponent_cutoff) return (1.0 + a) * std::exp(-a);
  return std::exp(-b) * (std::expm1(b - a) + a * std::exp(b - a) - b);
}

}  // namespace

Real tk_single_layer(Real r2, Real tau_hi, Real tau_lo) {
  if (tau_lo <= 0.0) {
    if (r2 <= 0.0) return std::numeric_limits<Real>::infinity();
    return expint_e1(r2 / (4.0 * tau_hi)) / (4.0 * M_PI);
  }
  const Real u_hi = r2 / (4.0 * tau_lo);
  if (u_hi < 1e-8) {
    const Real u_lo = r2 / (4.0 * tau_hi);
    return (std::log(tau_hi / tau_lo) + (u_lo - u_hi)) / (4.0 * M_PI);
  }
  return (expint_e1(r2 / (4.0 * tau_hi)) - expint_e1(u_hi)) / (4.0 * M_PI);
}

Real tk_double_layer(Real d_src, Real r2, Real tau_hi, Real tau_lo) {
  if (r2 < 1e-28) return 0.0;
  return d_src / (2.0 * M_PI * r2) * gauss_bracket(r2, tau_hi, tau_lo);
}

Real tk_adjoint_double_layer(Real d_tgt, Real r2, Real tau_hi, Real tau_lo) {
  if (r2 < 1e-28) return 0.0;
  return -d_tgt / (2.0 * M_PI * r2) * gauss_bracket(r2, tau_hi, tau_lo);
}

Real tk_hypersingular(Real n_dot, Real d_tgt, Real d_src, Real r2, Real tau_hi,
                      Real tau_lo) {
  if (r2 < 1e-28) return 0.0;
  return -n_dot / (2.0 * M_PI * r2) * gauss_bracket(r2, tau_hi, tau_lo) +
         d_tgt * d_src / (M_PI * r2 * r2) * gauss_moment_bracket(r2, tau_hi, tau_lo);
}

Real tk_kernel(LayerKind kind, const Vec2& x, const Vec2& nx, const Vec2& y,
               const Vec2& ny, Real tau_hi, Real tau_lo) {
  const Vec2 diff = x - y;
  const Real r2 = diff.squaredNorm();
  switch (kind) {
    case LayerKind::single_layer:
      return tk_single_layer(r2, tau_hi, tau_lo);
    case LayerKind::double_layer:
      return tk_double_layer(diff.dot(ny), r2, tau_hi, tau_lo);
    case LayerKind::adjoint_double_layer:
      return tk_adjoint_double_layer(diff.dot(nx), r2, tau_hi, tau_lo);
    case LayerKind::hypersingular:
      return tk_hypersingular(nx.dot(ny), diff.dot(nx), diff.dot(ny), r2, tau_hi,
                              tau_lo);
  }
  return 0.0;
}

namespace {

struct Window {
  Real tau_hi, tau_lo;
};

inline Window lag_window(int m, Real dt) {
  if (m == 0) return {0.5 * dt, 0.0};
  return {(m + 0.5) * dt, (m - 0.5) * dt};
}

// Geometric panel refinement toward one endpoint of [a, b].
template <typename F>
Real graded_panels(const F& f, Real a, Real b, bool toward_a, Real ratio, int n_panels,
                   int order) {
  Real total = 0.0;
  Real outer = 1.0;
  for (int k = 0; k < n_panels; ++k) {
    const Real inner = (k + 1 == n_panels) ? 0.0 : outer * ratio;
    Real lo, hi;
    if (toward_a) {
      lo = a + inner * (b - a);
      hi = a + outer * (b - a);
    } else {
      lo = b - outer * (b - a);
      hi = b - inner * (b - a);
    }
    total += gauss_panel(f, lo, hi, order);
    outer = inner;
  }
  return total;
}

// Integral of the lag kernel over one source cell for a fixed target, with
// panels graded toward the parameter closest to the target.
Real integrate_cell(LayerKind kind, const SpaceTimeMesh& src, int cell, const Vec2& x,
                    const Vec2& nx, Real tau_hi, Real tau_lo, bool singular_node) {
  const Real h = src.param_step();
  const Real theta_c = src.params[cell];
  const Real lo = theta_c - 0.5 * h;
  const Real hi = theta_c + 0.5 * h;

  auto f = [&](Real theta) {
    const Vec2 y = src.curve.position(theta);
    const Vec2 ny = src.curve.normal(theta);
    return tk_kernel(kind, x, nx, y, ny, tau_hi, tau_lo) * src.curve.speed(theta);
  };

  Real theta_star = theta_c;
  if (!singular_node) {
    // Newton projection of the target onto the curve, clamped to the cell.
    for (int it = 0; it < 4; ++it) {
      const Vec2 p = src.curve.position(theta_star) - x;
      const Vec2 d1 = src.curve.derivative(theta_star);
      const Vec2 d2 = src.curve.second_derivative(theta_star);
      const Real denom = d1.squaredNorm() + p.dot(d2);
      if (std::abs(denom) < 1e-14) break;
      theta_star -= p.dot(d1) / denom;
    }
    theta_star = std::clamp(theta_star, lo, hi);
  }

  const Real ratio = (singular_node && kind == LayerKind::single_layer) ? 0.15 : 0.5;
  const int n_panels = (singular_node && kind == LayerKind::single_layer) ? 8 : 6;
  const int order = 8;

  if (theta_star <= lo + 1e-14 * h)
    return graded_panels(f, lo, hi, true, ratio, n_panels, order);
  if (theta_star >= hi - 1e-14 * h)
    return graded_panels(f, lo, hi, false, ratio, n_panels, order);
  return graded_panels(f, lo, theta_star, false, ratio, n_panels, order) +
         graded_panels(f, theta_star, hi, true, ratio, n_panels, order);
}

int circular_distance(int i, int j, int n) {
  const int d = std::abs(i - j);
  return std::min(d, n - d);
}

CausalBlockOperator assemble_generic(LayerKind kind, const SpaceTimeMesh& src,
                                     const std::vector<Vec2>& tgt_points,
                                     const std::vector<Vec2>& tgt_normals,
                                     bool same_mesh) {
  CausalBlockOperator op;
  op.n_src = src.n_space;
  op.n_tgt = static_cast<int>(tgt_points.size());
  op.n_steps = src.n_steps;
  op.dt = src.dt;
  op.lag.resize(op.n_steps);

  const bool needs_tgt_normal =
      kind == LayerKind::adjoint_double_layer || kind == LayerKind::hypersingular;
  if (needs_tgt_normal && tgt_normals.size() != tgt_points.size())
    throw AssemblyError("target normals required for this kernel");
  const Vec2 zero = Vec2::Zero();

  for (int m = 0; m < op.n_steps; ++m) op.lag[m].resize(op.n_tgt, op.n_src);

  const Real mean_cell = src.perimeter() / src.n_space;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int p = 0; p < op.n_tgt; ++p) {
    const Vec2& x = tgt_points[p];
    const Vec2& nx = needs_tgt_normal ? tgt_normals[p] : zero;
    for (int j = 0; j < op.n_src; ++j) {
      const Real dist = (x - src.points[j]).norm();
      const bool index_near = same_mesh && circular_distance(p, j, src.n_space) <= 2;
      const bool near = index_near || dist <= 2.5 * mean_cell;
      const bool singular = same_mesh && p == j;
      for (int m = 0; m < op.n_steps; ++m) {
        const Window w = lag_window(m, src.dt);
        Real value;
        if (near) {
          value = integrate_cell(kind, src, j, x, nx, w.tau_hi, w.tau_lo,
                                 singular && dist < 1e-14);
        } else {
          value = src.weights[j] *
                  tk_kernel(kind, x, nx, src.points[j], src.normals[j], w.tau_hi,
                            w.tau_lo);
        }
        op.lag[m](p, j) = value;
      }
    }
  }
  return op;
}

void check_time_grids(const SpaceTimeMesh& src, const SpaceTimeMesh& tgt) {
  if (src.n_steps != tgt.n_steps || std::abs(src.dt - tgt.dt) > 1e-15 * src.dt)
    throw AssemblyError("mismatched time grids between source and target meshes");
  if (src.n_steps <= 0) throw AssemblyError("source mesh has no time grid");
}

bool is_same_mesh(const SpaceTimeMesh& a, const SpaceTimeMesh& b) {
  if (a.n_space != b.n_space) return false;
  for (int i = 0; i < a.n_space; i += std::max(1, a.n_space / 8)) {
    if ((a.points[i] - b.points[i]).norm() > 1e-14) return false;
  }
  return true;
}

}  // namespace

Matrix CausalBlockOperator::apply(const Matrix& density) const {
  if (density.rows() != n_src || density.cols() != n_steps)
    throw AssemblyError("apply: density shape does not match the operator");
  Matrix out = Matrix::Zero(n_tgt, n_steps);
  for (int k = 0; k < n_steps; ++k)
    for (int m = 0; m <= k; ++m) out.col(k) += lag[m] * density.col(k - m);
  return out;
}

Matrix CausalBlockOperator::to_dense() const {
  Matrix dense = Matrix::Zero(static_cast<long>(n_tgt) * n_steps,
                              static_cast<long>(n_src) * n_steps);
  for (int k = 0; k < n_steps; ++k)
    for (int l = 0; l <= k; ++l)
      dense.block(static_cast<long>(k) * n_tgt, static_cast<long>(l) * n_src, n_tgt,
                  n_src) = lag[k - l];
  return dense;
}

CausalBlockOperator assemble_single_layer(const SpaceTimeMesh& src,
                                          const SpaceTimeMesh& tgt) {
  check_time_grids(src, tgt);
  return assemble_generic(LayerKind::single_layer, src, tgt.points, tgt.normals,
                          is_same_mesh(src, tgt));
}

CausalBlockOperator assemble_double_layer(const SpaceTimeMesh& src,
                                          const SpaceTimeMesh& tgt) {
  check_time_grids(src, tgt);
  return assemble_generic(LayerKind::double_layer, src, tgt.points, tgt.normals,
                          is_same_mesh(src, tgt));
}

CausalBlockOperator assemble_adjoint_double_layer(const SpaceTimeMesh& src,
                                                  const SpaceTimeMesh& tgt) {
  check_time_grids(src, tgt);
  return assemble_generic(LayerKind::adjoint_double_layer, src, tgt.points, tgt.normals,
                          is_same_mesh(src, tgt));
}

CausalBlockOperator assemble_hypersingular(const SpaceTimeMesh& src,
                                           const SpaceTimeMesh& tgt,
                                           const AssemblyOptions& options) {
  check_time_grids(src, tgt);
  if (!is_same_mesh(src, tgt)) {
    return assemble_generic(LayerKind::hypersingular, src, tgt.points, tgt.normals,
                            false);
  }

  // Same-mesh case: evaluate the (smooth off-surface) kernel at normal offsets
  // +-h and +-h/2 and Richardson-extrapolate. The two-sided average removes
  // the odd error terms, the extrapolation the leading even one.
  const Real mean_cell = src.perimeter() / src.n_space;
  const Real h = options.hypersingular_offset_factor * mean_cell;
  if (0.5 * h < 0.02 * mean_cell)
    throw AssemblyError("hypersingular offset below the mesh resolution floor");

  auto offset_average = [&](Real offset) {
    std::vector<Vec2> plus(src.n_space), minus(src.n_space);
    for (int i = 0; i < src.n_space; ++i) {
      plus[i] = src.points[i] + offset * src.normals[i];
      minus[i] = src.points[i] - offset * src.normals[i];
    }
    CausalBlockOperator a =
        assemble_generic(LayerKind::hypersingular, src, plus, src.normals, true);
    CausalBlockOperator b =
        assemble_generic(LayerKind::hypersingular, src, minus, src.normals, true);
    for (int m = 0; m < a.n_steps; ++m) a.lag[m] = 0.5 * (a.lag[m] + b.lag[m]);
    return a;
  };

  CausalBlockOperator coarse = offset_average(h);
  CausalBlockOperator fine = offset_average(0.5 * h);
  for (int m = 0; m < fine.n_steps; ++m)
    fine.lag[m] = (4.0 * fine.lag[m] - coarse.lag[m]) / 3.0;
  return fine;
}

BoundaryDensity apply(const CausalBlockOperator& op, const BoundaryDensity& density,
                      const SpaceTimeMesh& tgt_mesh) {
  if (density.mesh == nullptr || density.mesh->n_space != op.n_src ||
      density.mesh->n_steps != op.n_steps)
    throw AssemblyError("apply: density does not live on the operator's source mesh");
  return BoundaryDensity(tgt_mesh, op.apply(density.values));
}

Vector evaluate_potential(LayerKind kind, const SpaceTimeMesh& src,
                          const Matrix& density, const std::vector<Vec2>& points,
                          const std::vector<Real>& times,
                          const std::vector<Vec2>* target_normals) {
  if (points.size() != times.size())
    throw InputDomainError("evaluate_potential: points/times size mismatch");
  if (density.rows() != src.n_space || density.cols() != src.n_steps)
    throw InputDomainError("evaluate_potential: density shape mismatch");
  const bool needs_normal =
      kind == LayerKind::adjoint_double_layer || kind == LayerKind::hypersingular;
  if (needs_normal && (target_normals == nullptr || target_normals->size() != points.size()))
    throw InputDomainError("evaluate_potential: target normals required");

  const Real mean_cell = src.perimeter() / src.n_space;
  Vector out = Vector::Zero(points.size());

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (long q = 0; q < static_cast<long>(points.size()); ++q) {
    const Vec2& x = points[q];
    const Vec2 nx = needs_normal ? (*target_normals)[q] : Vec2::Zero();
    const Real t = times[q];
    if (t <= 0.0) continue;
    Real acc = 0.0;
    for (int l = 1; l <= src.n_steps; ++l) {
      const Real tau_hi = t - (l - 1) * src.dt;
      if (tau_hi <= 0.0) break;
      const Real tau_lo = std::max(t - l * src.dt, 0.0);
      for (int j = 0; j < src.n_space; ++j) {
        const Real dist = (x - src.points[j]).norm();
        Real value;
        if (dist <= 2.5 * mean_cell) {
          value = integrate_cell(kind, src, j, x, nx, tau_hi, tau_lo, false);
        } else {
          value = src.weights[j] * tk_kernel(kind, x, nx, src.points[j],
                                             src.normals[j], tau_hi, tau_lo);
        }
        acc += value * density(j, l - 1);
      }
    }
    out[q] = acc;
  }
  return out;
}

MotSystem::MotSystem(std::vector<int> row_sizes, std::vector<int> col_sizes, int n_steps,
                     Real dt)
    : row_sizes_(std::move(row_sizes)),
      col_sizes_(std::move(col_sizes)),
      n_steps_(n_steps),
      dt_(dt) {
  row_offsets_.resize(row_sizes_.size());
  col_offsets_.resize(col_sizes_.size());
  for (size_t i = 0; i < row_sizes_.size(); ++i) {
    row_offsets_[i] = total_rows_;
    total_rows_ += row_sizes_[i];
  }
  for (size_t i = 0; i < col_sizes_.size(); ++i) {
    col_offsets_[i] = total_cols_;
    total_cols_ += col_sizes_[i];
  }
  lag_.assign(n_steps_, Matrix::Zero(total_rows_, total_cols_));
}

void MotSystem::add_operator(int block_row, int block_col, Real coeff,
                             const CausalBlockOperator& op) {
  if (op.n_steps != n_steps_)
    throw AssemblyError("MotSystem: operator has a different number of time steps");
  if (op.n_tgt != row_sizes_[block_row] || op.n_src != col_sizes_[block_col])
    throw AssemblyError("MotSystem: operator block size mismatch");
  for (int m = 0; m < n_steps_; ++m)
    lag_[m].block(row_offsets_[block_row], col_offsets_[block_col], op.n_tgt, op.n_src) +=
        coeff * op.lag[m];
  lu_.reset();
}

void MotSystem::add_nodewise(int block_row, int block_col, const Vector& diag) {
  if (diag.size() != row_sizes_[block_row] || diag.size() != col_sizes_[block_col])
    throw AssemblyError("MotSystem: nodewise diagonal size mismatch");
  lag_[0]
      .block(row_offsets_[block_row], col_offsets_[block_col], diag.size(), diag.size())
      .diagonal() += diag;
  lu_.reset();
}

const Eigen::PartialPivLU<Matrix>& MotSystem::lu() const {
  if (!lu_) {
    if (total_rows_ != total_cols_)
      throw SolverError("MotSystem: step block is not square");
    lu_.emplace(lag_[0]);
    rcond_ = lu_->rcond();
    if (!(rcond_ > 1e-14))
      throw SolverError("MotSystem: singular step-0 block, rcond estimate " +
                        std::to_string(rcond_));
  }
  return *lu_;
}

Real MotSystem::step_condition() const {
  lu();
  return rcond_;
}

std::vector<Vector> MotSystem::solve(const std::vector<Vector>& rhs) const {
  if (static_cast<int>(rhs.size()) != n_steps_)
    throw SolverError("MotSystem: rhs must supply one vector per time step");
  const auto& factor = lu();
  std::vector<Vector> x(n_steps_);
  for (int k = 0; k < n_steps_; ++k) {
    Vector r = rhs[k];
    if (r.size() != total_rows_) throw SolverError("MotSystem: rhs size mismatch");
    for (int m = 1; m <= k; ++m) r.noalias() -= lag_[m] * x[k - m];
    x[k] = factor.solve(r);
  }
  return x;
}

std::vector<Vector> mot_solve(const MotSystem& system, const std::vector<Vector>& rhs) {
  return system.solve(rhs);
}

}  // namespace heatlsm
