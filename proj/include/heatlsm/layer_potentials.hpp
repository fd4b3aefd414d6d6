#pragma once

#include "heatlsm/mesh.hpp"

#include <optional>
#include <vector>

namespace heatlsm {

/// Scalar field on a space-time mesh, piecewise constant per time step.
/// Implicitly zero for t < 0.
struct BoundaryDensity {
  const SpaceTimeMesh* mesh = nullptr;
  Matrix values;  // n_space x n_steps

  BoundaryDensity() = default;
  BoundaryDensity(const SpaceTimeMesh& m, Matrix v) : mesh(&m), values(std::move(v)) {}
  static BoundaryDensity zero(const SpaceTimeMesh& m) {
    return BoundaryDensity(m, Matrix::Zero(m.n_space, m.n_steps));
  }
  /// Stacked step-major vector view [step 1 nodes, step 2 nodes, ...].
  Vector stacked() const { return values.reshaped(); }
};

/// Block-lower-triangular discretization of a heat layer potential. Uniform
/// time grid and an autonomous kernel make the blocks Toeplitz in time, so
/// only the n_steps distinct lags are stored; block (k, l) is lag[k - l] and
/// exactly zero for l > k.
struct CausalBlockOperator {
  int n_src = 0;
  int n_tgt = 0;
  int n_steps = 0;
  Real dt = 0.0;
  std::vector<Matrix> lag;

  /// y_k = sum_{l <= k} lag[k-l] x_l  (block forward product).
  Matrix apply(const Matrix& density) const;
  /// Flattened (n_tgt*n_steps) x (n_src*n_steps) matrix, step-major.
  Matrix to_dense() const;
};

enum class LayerKind { single_layer, double_layer, adjoint_double_layer, hypersingular };

/// Time-integrated 2-D heat kernels over a (t-s) window [tau_lo, tau_hi].
/// These are the exact antiderivatives used by the Nystrom assembly.
Real tk_single_layer(Real r2, Real tau_hi, Real tau_lo);
Real tk_double_layer(Real d_src, Real r2, Real tau_hi, Real tau_lo);
Real tk_adjoint_double_layer(Real d_tgt, Real r2, Real tau_hi, Real tau_lo);
Real tk_hypersingular(Real n_dot, Real d_tgt, Real d_src, Real r2, Real tau_hi,
                      Real tau_lo);

/// Kernel dispatch for one target/source configuration.
Real tk_kernel(LayerKind kind, const Vec2& x, const Vec2& nx, const Vec2& y,
               const Vec2& ny, Real tau_hi, Real tau_lo);

struct AssemblyOptions {
  /// Offset for the same-mesh hypersingular operator, as a multiple of the
  /// mean node spacing. Richardson-extrapolated from h and h/2.
  Real hypersingular_offset_factor = 0.5;
};

CausalBlockOperator assemble_single_layer(const SpaceTimeMesh& src,
                                          const SpaceTimeMesh& tgt);
CausalBlockOperator assemble_double_layer(const SpaceTimeMesh& src,
                                          const SpaceTimeMesh& tgt);
CausalBlockOperator assemble_adjoint_double_layer(const SpaceTimeMesh& src,
                                                  const SpaceTimeMesh& tgt);
CausalBlockOperator assemble_hypersingular(const SpaceTimeMesh& src,
                                           const SpaceTimeMesh& tgt,
                                           const AssemblyOptions& options = {});

BoundaryDensity apply(const CausalBlockOperator& op, const BoundaryDensity& density,
                      const SpaceTimeMesh& tgt_mesh);

/// Potential evaluation at arbitrary space-time targets (off the source
/// surface). Partial trailing windows are integrated exactly. A target normal
/// turns single_layer into its directional derivative and double_layer into
/// the (negated) hypersingular kernel.
Vector evaluate_potential(LayerKind kind, const SpaceTimeMesh& src,
                          const Matrix& density, const std::vector<Vec2>& points,
                          const std::vector<Real>& times,
                          const std::vector<Vec2>* target_normals = nullptr);

/// Coupled causal block system with dense stacked step blocks, solved by
/// marching-on-in-time forward substitution.
class MotSystem {
 public:
  MotSystem(std::vector<int> row_sizes, std::vector<int> col_sizes, int n_steps, Real dt);

  void add_operator(int block_row, int block_col, Real coeff,
                    const CausalBlockOperator& op);
  /// Nodewise multiplicative term (identity in time) on the lag-0 diagonal.
  void add_nodewise(int block_row, int block_col, const Vector& diag);

  int rows() const { return total_rows_; }
  int cols() const { return total_cols_; }
  int steps() const { return n_steps_; }
  const Matrix& lag_block(int m) const { return lag_[m]; }

  /// Reciprocal condition estimate of the step-0 block (factorizes on demand).
  Real step_condition() const;

  /// Forward substitution: rhs and result are one stacked vector per step.
  std::vector<Vector> solve(const std::vector<Vector>& rhs) const;

 private:
  const Eigen::PartialPivLU<Matrix>& lu() const;

  std::vector<int> row_sizes_, col_sizes_;
  std::vector<int> row_offsets_, col_offsets_;
  int total_rows_ = 0, total_cols_ = 0;
  int n_steps_ = 0;
  Real dt_ = 0.0;
  std::vector<Matrix> lag_;
  mutable std::optional<Eigen::PartialPivLU<Matrix>> lu_;
  mutable Real rcond_ = 0.0;
};

/// Free-function form of the marching solver.
std::vector<Vector> mot_solve(const MotSystem& system, const std::vector<Vector>& rhs);

}  // namespace heatlsm
