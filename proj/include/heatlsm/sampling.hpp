#pragma once

#include "heatlsm/forward.hpp"

#include <cstdint>

namespace heatlsm {

struct RegularizationConfig {
  enum class Rule { fixed, quasiopt };
  Real alpha = 1e-8;
  Rule rule = Rule::fixed;
  Real noise_level = 0.0;
};

struct GapSolution {
  Vector g;
  Real g_norm = 0.0;       // discrete L2 norm of g
  Real discrepancy = 0.0;  // discrete L2 norm of Fg - rhs
  Real alpha_used = 0.0;
};

/// Tikhonov solver for the gap equation in the discrete L2 surrogate inner
/// product (arc length x dt weights). A fixed-alpha solve reuses one LDLT
/// factorization; the quasi-optimality rule runs on a lazily computed SVD of
/// the whitened operator.
class TikhonovSolver {
 public:
  TikhonovSolver(const NtdGapMatrix& gap, Vector spacetime_weights);

  GapSolution solve(const Vector& rhs, const RegularizationConfig& reg) const;

  /// Largest singular value of the whitened operator (computes the SVD).
  Real operator_norm() const;

 private:
  struct Cache;
  const Cache& cache() const;
  const Eigen::BDCSVD<Matrix>& svd() const;

  Matrix map_;
  Vector w_sqrt_, w_inv_sqrt_;
  std::shared_ptr<Cache> cache_;
};

/// Cavity-side Robin trace of the cavity-free solution: f -> (d_nu - lambda) u^f
/// restricted to the cavity space-time grid. Testing/factorization use only.
BoundaryDensity operator_H(const ForwardContext& ctx, const Matrix& flux);

/// Outer trace of the mixed problem with Robin data g on the cavity and zero
/// flux outside. Testing/factorization use only.
BoundaryDensity operator_A(const ForwardContext& ctx, const Matrix& robin_data);

/// Discrete operator-norm residual |F + A H| / |F| on matching nodal bases.
/// Returns 0 by convention for cavity-free scenarios.
Real factorization_residual(const ForwardContext& ctx);

/// Weighted spectral norm estimate via power iteration on the whitened matrix.
Real weighted_operator_norm(const Matrix& m, const Vector& weights, int iterations = 40);

struct GridSpec {
  Real x0 = 0.0, y0 = 0.0;
  Real dx = 0.1, dy = 0.1;
  int nx = 0, ny = 0;

  Vec2 point(int i, int j) const { return Vec2(x0 + i * dx, y0 + j * dy); }
};

/// Rectangular lattice of the given spacing covering the outer curve's
/// bounding box, with grid lines through the origin.
GridSpec make_grid(const ParametricCurve& outer, Real spacing);

enum IndicatorFlag : int {
  flag_near_boundary = 1,  // within two mesh widths of the outer boundary
  flag_failed = 2,
};

struct IndicatorField {
  GridSpec grid;
  std::vector<Vec2> points;        // all grid points, row-major (j outer, i inner)
  std::vector<Region> tags;
  std::vector<Real> density_norm;  // |g^y|, NaN where not computed
  std::vector<Real> pointwise;     // (S g^y)(y, s+tau)
  std::vector<Real> discrepancy;
  std::vector<Real> alpha_used;
  std::vector<int> flags;
  Real sample_time = 0.0;   // s
  Real time_offset = 0.0;   // tau
};

/// Linear sampling sweep. Consumes only the outer geometry (blind scenario)
/// and the measured gap matrix; per-point failures are flagged, not fatal.
IndicatorField indicator_sweep(const Scenario& blind, const NtdGapMatrix& gap,
                               const GridSpec& grid, Real sample_time, Real time_offset,
                               const RegularizationConfig& reg);

struct ContourResult {
  bool found = false;
  std::vector<std::vector<Vec2>> loops;  // closed polylines
  Real threshold = 0.0;                  // on log |g^y|
  std::string diagnostic;
};

/// Thresholds 1/|g^y| at the level maximizing inter-class contrast (Otsu on
/// the log histogram) and extracts the level-set contour by marching squares.
ContourResult extract_boundary(const IndicatorField& field);

/// Componentwise Gaussian noise scaled to level * |data|_F / sqrt(count);
/// deterministic under the seed (internal Box-Muller generator).
Matrix add_noise(const Matrix& data, Real level, std::uint64_t seed);

}  // namespace heatlsm
