#pragma once

#include "heatlsm/layer_potentials.hpp"
#include "heatlsm/scenario.hpp"

#include <memory>
#include <string>

namespace heatlsm {

/// Boundary traces of one forward solve: u1 = flux trace on the cavity,
/// u2 = temperature trace on the cavity, u3 = temperature trace on the
/// outer boundary.
struct ForwardSolution {
  BoundaryDensity u1, u2, u3;
  Matrix flux;  // applied Neumann data on the outer mesh (n_space x n_steps)
  std::string path;
  Real robin_residual = 0.0;
  bool robin_flag = false;
  Real condition_estimate = 0.0;
};

/// Dense map from stacked flux coefficients on the outer space-time grid to
/// stacked temperature-trace coefficients, step-major.
struct NtdGapMatrix {
  Matrix map;
  std::string tag;  // lambda_D | lambda_empty | gap_F
  int n_space = 0;
  int n_steps = 0;
  Real dt = 0.0;
};

NtdGapMatrix gap_matrix(const NtdGapMatrix& lambda_d, const NtdGapMatrix& lambda_empty);

/// Worst relative defect of <Lf, Rg> = <Lg, Rf> over random flux pairs, where
/// R is time reversal about the horizon and the pairing is the discrete L2
/// surrogate inner product.
Real reciprocity_defect(const NtdGapMatrix& ntd, const Vector& spacetime_weights,
                        int n_pairs, std::uint64_t seed);

/// Assembles and caches the discrete layer operators of one scenario and
/// exposes the forward solves built on them. Immutable after construction;
/// all solve methods are const and reuse cached factorizations.
class ForwardContext {
 public:
  explicit ForwardContext(const Scenario& scenario);
  ~ForwardContext();

  const Scenario& scenario() const { return scenario_; }
  const SpaceTimeMesh& outer_mesh() const { return outer_; }
  const SpaceTimeMesh& inner_mesh() const;

  /// Production path: pure single-layer ansatz on both boundaries.
  ForwardSolution solve_indirect(const Matrix& flux) const;
  /// Direct system with the hypersingular block, collocated as printed.
  ForwardSolution solve_direct(const Matrix& flux) const;

  /// Cavity-free single-layer solve (I/2 + N22) psi = f.
  Matrix empty_density(const Matrix& flux) const;
  Matrix empty_trace(const Matrix& psi) const;
  ForwardSolution solve_empty(const Matrix& flux) const;
  /// Field of the cavity-free solution at interior points.
  Vector empty_field(const Matrix& psi, const std::vector<Vec2>& points,
                     const std::vector<Real>& times) const;

  /// Column-by-column discrete Neumann-to-Dirichlet map; exploits the
  /// time-invariance of the pipeline, so only one solve per spatial node.
  NtdGapMatrix ntd_matrix(bool with_cavity) const;

  /// Outer trace of the Neumann Green function of the cavity-free domain with
  /// pole (y, s): trace of Gamma_(y,s) plus the single-layer corrector.
  BoundaryDensity green_neumann_trace(const Vec2& y, Real s,
                                      bool* accuracy_warning = nullptr) const;

  /// Representation-formula field evaluation from solved traces.
  Vector evaluate_field(const ForwardSolution& solution, const std::vector<Vec2>& points,
                        const std::vector<Real>& times) const;

  /// Discrete L2 weights (arc length x dt) on the outer space-time grid,
  /// stacked step-major.
  Vector spacetime_weights() const;
  Vector inner_spacetime_weights() const;

  Real robin_residual(const BoundaryDensity& u1, const BoundaryDensity& u2) const;

  // Assembled blocks and the cached two-density system, shared with the
  // factorization-testing machinery. Cavity blocks require a cavity.
  const CausalBlockOperator& op_v22() const;
  const CausalBlockOperator& op_v21() const;
  const CausalBlockOperator& op_v12() const;
  const CausalBlockOperator& op_n21() const;
  const MotSystem& indirect_system() const;
  /// Factorizes the cached step blocks ahead of a parallel region.
  void ops_warmup() const;

 private:
  struct Operators;
  const Operators& ops() const;

  Scenario scenario_;
  SpaceTimeMesh outer_;
  SpaceTimeMesh inner_;
  std::unique_ptr<Operators> ops_;
};

}  // namespace heatlsm
