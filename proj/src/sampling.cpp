#include "heatlsm/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace heatlsm {

struct TikhonovSolver::Cache {
  std::mutex mutex;
  Matrix normal_base;  // F^T W F
  Matrix ftw;          // F^T W
  std::map<Real, Eigen::LDLT<Matrix>> ldlt_by_alpha;
  std::optional<Eigen::BDCSVD<Matrix>> svd;
  Matrix u, v;  // whitened factors
};

TikhonovSolver::TikhonovSolver(const NtdGapMatrix& gap, Vector spacetime_weights)
    : map_(gap.map), cache_(std::make_shared<Cache>()) {
  if (map_.rows() != map_.cols() || map_.rows() != spacetime_weights.size())
    throw InputDomainError("TikhonovSolver: weight vector does not match the map");
  w_sqrt_ = spacetime_weights.array().sqrt();
  w_inv_sqrt_ = w_sqrt_.array().inverse();
  cache_->ftw = map_.transpose() * spacetime_weights.asDiagonal();
  cache_->normal_base = cache_->ftw * map_;
}

const Eigen::BDCSVD<Matrix>& TikhonovSolver::svd() const {
  std::lock_guard<std::mutex> lock(cache_->mutex);
  if (!cache_->svd) {
    Matrix whitened = w_sqrt_.asDiagonal() * map_ * w_inv_sqrt_.asDiagonal();
    cache_->svd.emplace(whitened, Eigen::ComputeThinU | Eigen::ComputeThinV);
  }
  return *cache_->svd;
}

Real TikhonovSolver::operator_norm() const { return svd().singularValues()[0]; }

GapSolution TikhonovSolver::solve(const Vector& rhs, const RegularizationConfig& reg) const {
  if (rhs.size() != map_.rows()) throw InputDomainError("gap_solve: rhs size mismatch");
  if (!(reg.alpha >= 0.0)) throw InputDomainError("gap_solve: alpha must be >= 0");

  GapSolution out;
  const Vector w = w_sqrt_.array().square();

  auto finalize = [&](const Vector& g, Real alpha) {
    out.g = g;
    out.alpha_used = alpha;
    out.g_norm = std::sqrt(g.dot(w.cwiseProduct(g)));
    const Vector r = map_ * g - rhs;
    out.discrepancy = std::sqrt(r.dot(w.cwiseProduct(r)));
  };

  if (reg.rule == RegularizationConfig::Rule::fixed && reg.alpha > 0.0) {
    const Eigen::LDLT<Matrix>* factor = nullptr;
    {
      std::lock_guard<std::mutex> lock(cache_->mutex);
      auto it = cache_->ldlt_by_alpha.find(reg.alpha);
      if (it == cache_->ldlt_by_alpha.end()) {
        Matrix normal = cache_->normal_base;
        normal.diagonal() += reg.alpha * w;
        it = cache_->ldlt_by_alpha.emplace(reg.alpha, normal.ldlt()).first;
      }
      factor = &it->second;
    }
    finalize(factor->solve(cache_->ftw * rhs), reg.alpha);
    return out;
  }

  // SVD path: whitened coordinates diagonalize both norms.
  const auto& decomposition = svd();
  const Vector& sigma = decomposition.singularValues();
  const Vector beta = decomposition.matrixU().transpose() * w_sqrt_.cwiseProduct(rhs);

  if (reg.rule == RegularizationConfig::Rule::fixed) {
    // alpha = 0: plain least squares, rejected on rank deficiency
    const Real smax = sigma[0];
    const Real smin = sigma[sigma.size() - 1];
    if (!(smin > 1e-12 * smax))
      throw NumericError("gap_solve: alpha = 0 with a rank-deficient gap matrix");
    Vector coeff = beta.cwiseQuotient(sigma);
    finalize(w_inv_sqrt_.cwiseProduct(decomposition.matrixV() * coeff), 0.0);
    return out;
  }

  // quasi-optimality sweep on a log grid: minimize |g_{k+1} - g_k|
  const Real smax2 = sigma[0] * sigma[0];
  std::vector<Real> alphas;
  for (int j = 0; j <= 13; ++j) alphas.push_back(smax2 * std::pow(10.0, -j));
  Real best_alpha = alphas[0];
  Real best_jump = std::numeric_limits<Real>::max();
  for (size_t k = 0; k + 1 < alphas.size(); ++k) {
    Real jump2 = 0.0;
    for (long i = 0; i < sigma.size(); ++i) {
      const Real f0 = sigma[i] / (sigma[i] * sigma[i] + alphas[k]);
      const Real f1 = sigma[i] / (sigma[i] * sigma[i] + alphas[k + 1]);
      const Real d = (f1 - f0) * beta[i];
      jump2 += d * d;
    }
    if (jump2 < best_jump) {
      best_jump = jump2;
      best_alpha = alphas[k + 1];
    }
  }
  Vector coeff(sigma.size());
  for (long i = 0; i < sigma.size(); ++i)
    coeff[i] = sigma[i] / (sigma[i] * sigma[i] + best_alpha) * beta[i];
  finalize(w_inv_sqrt_.cwiseProduct(decomposition.matrixV() * coeff), best_alpha);
  return out;
}

BoundaryDensity operator_H(const ForwardContext& ctx, const Matrix& flux) {
  const SpaceTimeMesh& inner = ctx.inner_mesh();
  const Matrix psi = ctx.empty_density(flux);
  const Vector lambda = ctx.scenario().lambda_vector();
  Matrix values = ctx.op_n21().apply(psi) -
                  lambda.asDiagonal() * ctx.op_v21().apply(psi);
  return BoundaryDensity(inner, std::move(values));
}

BoundaryDensity operator_A(const ForwardContext& ctx, const Matrix& robin_data) {
  const SpaceTimeMesh& inner = ctx.inner_mesh();
  const SpaceTimeMesh& outer = ctx.outer_mesh();
  if (robin_data.rows() != inner.n_space || robin_data.cols() != inner.n_steps)
    throw InputDomainError("operator_A: data shape does not match the cavity mesh");

  const int steps = outer.n_steps;
  std::vector<Vector> rhs(steps, Vector::Zero(outer.n_space + inner.n_space));
  for (int k = 0; k < steps; ++k)
    rhs[k].segment(outer.n_space, inner.n_space) = robin_data.col(k);
  std::vector<Vector> sol = ctx.indirect_system().solve(rhs);

  Matrix alpha(outer.n_space, steps), beta(inner.n_space, steps);
  for (int k = 0; k < steps; ++k) {
    alpha.col(k) = sol[k].head(outer.n_space);
    beta.col(k) = sol[k].segment(outer.n_space, inner.n_space);
  }
  return BoundaryDensity(outer, ctx.op_v22().apply(alpha) + ctx.op_v12().apply(beta));
}

Real weighted_operator_norm(const Matrix& m, const Vector& weights, int iterations) {
  if (m.rows() != weights.size() || m.cols() != weights.size())
    throw InputDomainError("weighted_operator_norm: shape mismatch");
  const Vector ws = weights.array().sqrt();
  const Vector wi = ws.array().inverse();
  // power iteration on (W^1/2 M W^-1/2)^T (W^1/2 M W^-1/2)
  Vector v = Vector::Ones(m.cols());
  for (long i = 0; i < v.size(); ++i) v[i] += 0.01 * std::sin(0.7 * i);
  v.normalize();
  Real norm = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector t = ws.cwiseProduct(m * wi.cwiseProduct(v));
    Vector u = wi.cwiseProduct(m.transpose() * ws.cwiseProduct(t));
    norm = std::sqrt(u.norm());
    if (u.norm() < 1e-300) return 0.0;
    v = u / u.norm();
  }
  return norm;
}

Real factorization_residual(const ForwardContext& ctx) {
  if (!ctx.scenario().has_cavity()) return 0.0;  // both maps coincide, F = 0
  const SpaceTimeMesh& outer = ctx.outer_mesh();
  const SpaceTimeMesh& inner = ctx.inner_mesh();
  const int n2 = outer.n_space, n1 = inner.n_space, steps = outer.n_steps;
  const long m_outer = static_cast<long>(n2) * steps;
  const long m_inner = static_cast<long>(n1) * steps;

  NtdGapMatrix f = gap_matrix(ctx.ntd_matrix(true), ctx.ntd_matrix(false));

  // H on the nodal flux basis, one solve per spatial node (time invariance)
  Matrix h_matrix = Matrix::Zero(m_inner, m_outer);
  for (int j = 0; j < n2; ++j) {
    Matrix basis = Matrix::Zero(n2, steps);
    basis(j, 0) = 1.0;
    const Matrix column = operator_H(ctx, basis).values;
    for (int k = 0; k < steps; ++k)
      for (int l = 0; l + k < steps; ++l)
        h_matrix.block(static_cast<long>(l + k) * n1, static_cast<long>(l) * n2 + j, n1,
                       1) = column.col(k);
  }

  // A on the nodal Robin basis
  Matrix a_matrix = Matrix::Zero(m_outer, m_inner);
  for (int j = 0; j < n1; ++j) {
    Matrix basis = Matrix::Zero(n1, steps);
    basis(j, 0) = 1.0;
    const Matrix column = operator_A(ctx, basis).values;
    for (int k = 0; k < steps; ++k)
      for (int l = 0; l + k < steps; ++l)
        a_matrix.block(static_cast<long>(l + k) * n2, static_cast<long>(l) * n1 + j, n2,
                       1) = column.col(k);
  }

  const Vector w = ctx.spacetime_weights();
  Matrix residual = f.map + a_matrix * h_matrix;
  const Real f_norm = weighted_operator_norm(f.map, w);
  if (f_norm <= 0.0) return 0.0;
  return weighted_operator_norm(residual, w) / f_norm;
}

GridSpec make_grid(const ParametricCurve& outer, Real spacing) {
  if (!(spacing > 0.0)) throw InputDomainError("make_grid: spacing must be positive");
  Real xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (int i = 0; i < 720; ++i) {
    const Vec2 p = outer.position(2.0 * M_PI * i / 720);
    xmin = std::min(xmin, p[0]);
    xmax = std::max(xmax, p[0]);
    ymin = std::min(ymin, p[1]);
    ymax = std::max(ymax, p[1]);
  }
  GridSpec g;
  g.dx = g.dy = spacing;
  const long ix0 = static_cast<long>(std::ceil(xmin / spacing - 1e-9));
  const long ix1 = static_cast<long>(std::floor(xmax / spacing + 1e-9));
  const long iy0 = static_cast<long>(std::ceil(ymin / spacing - 1e-9));
  const long iy1 = static_cast<long>(std::floor(ymax / spacing + 1e-9));
  g.x0 = ix0 * spacing;
  g.y0 = iy0 * spacing;
  g.nx = static_cast<int>(ix1 - ix0 + 1);
  g.ny = static_cast<int>(iy1 - iy0 + 1);
  if (g.nx <= 0 || g.ny <= 0) throw InputDomainError("make_grid: empty grid");
  return g;
}

IndicatorField indicator_sweep(const Scenario& blind, const NtdGapMatrix& gap,
                               const GridSpec& grid, Real sample_time, Real time_offset,
                               const RegularizationConfig& reg) {
  if (blind.has_cavity())
    throw ValidationError("indicator_sweep: reconstruction input must be blind");
  if (gap.n_space != blind.n_space_outer || gap.n_steps != blind.n_steps)
    throw ValidationError("indicator_sweep: gap matrix grid does not match the scenario");
  if (!(sample_time > 0.0) || !(sample_time < blind.horizon))
    throw ValidationError("indicator_sweep: need 0 < s < T");
  if (!(time_offset > 0.0) || sample_time + time_offset > blind.horizon)
    throw ValidationError("indicator_sweep: need 0 < tau and s + tau <= T");

  ForwardContext ctx(blind);
  TikhonovSolver solver(gap, ctx.spacetime_weights());

  IndicatorField field;
  field.grid = grid;
  field.sample_time = sample_time;
  field.time_offset = time_offset;
  const long count = static_cast<long>(grid.nx) * grid.ny;
  field.points.resize(count);
  field.tags.resize(count);
  const Real nan = std::numeric_limits<Real>::quiet_NaN();
  field.density_norm.assign(count, nan);
  field.pointwise.assign(count, nan);
  field.discrepancy.assign(count, nan);
  field.alpha_used.assign(count, nan);
  field.flags.assign(count, 0);

  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const long q = static_cast<long>(j) * grid.nx + i;
      field.points[q] = grid.point(i, j);
      field.tags[q] = point_location(blind, field.points[q]);
    }

  bool any_inside = false;
  for (long q = 0; q < count; ++q)
    any_inside = any_inside || field.tags[q] == Region::in_conductor;
  if (!any_inside)
    throw ValidationError("indicator_sweep: sampling grid lies outside the domain");

  // warm up shared factorizations before the parallel region
  ctx.ops_warmup();
  if (reg.rule == RegularizationConfig::Rule::quasiopt)
    solver.operator_norm();
  else
    solver.solve(Vector::Zero(gap.map.rows()), reg);

  const Real mean_cell = ctx.outer_mesh().perimeter() / ctx.outer_mesh().n_space;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (long q = 0; q < count; ++q) {
    if (field.tags[q] != Region::in_conductor) continue;
    try {
      bool warn = false;
      BoundaryDensity rhs = ctx.green_neumann_trace(field.points[q], sample_time, &warn);
      if (warn) field.flags[q] |= flag_near_boundary;
      GapSolution sol = solver.solve(rhs.stacked(), reg);
      field.density_norm[q] = sol.g_norm;
      field.discrepancy[q] = sol.discrepancy;
      field.alpha_used[q] = sol.alpha_used;

      Matrix g_density = sol.g.reshaped(gap.n_space, gap.n_steps);
      Matrix psi = ctx.empty_density(g_density);
      Vector value = ctx.empty_field(psi, {field.points[q]}, {sample_time + time_offset});
      field.pointwise[q] = value[0];
      if (distance_to_curve(blind.outer, field.points[q]) < 2.0 * mean_cell)
        field.flags[q] |= flag_near_boundary;
    } catch (const std::exception&) {
      field.flags[q] |= flag_failed;
    }
  }
  return field;
}

namespace {

struct OtsuResult {
  bool ok = false;
  Real threshold = 0.0;
  Real low_fraction = 0.0;
  Real separation = 0.0;  // |mu1 - mu0| / sigma_total
};

OtsuResult otsu_threshold(std::vector<Real> z) {
  OtsuResult out;
  if (z.size() < 16) return out;
  const auto [mn_it, mx_it] = std::minmax_element(z.begin(), z.end());
  const Real mn = *mn_it, mx = *mx_it;
  if (!(mx > mn + 1e-12)) return out;

  constexpr int bins = 64;
  std::vector<Real> hist(bins, 0.0), level(bins, 0.0);
  for (int b = 0; b < bins; ++b) level[b] = mn + (b + 0.5) * (mx - mn) / bins;
  for (Real v : z) {
    int b = std::min(bins - 1, static_cast<int>((v - mn) / (mx - mn) * bins));
    hist[b] += 1.0;
  }
  const Real total = static_cast<Real>(z.size());
  Real mu_total = 0.0, var_total = 0.0;
  for (int b = 0; b < bins; ++b) mu_total += hist[b] * level[b];
  mu_total /= total;
  for (int b = 0; b < bins; ++b)
    var_total += hist[b] * (level[b] - mu_total) * (level[b] - mu_total);
  var_total /= total;

  Real best = -1.0;
  Real w0 = 0.0, sum0 = 0.0;
  for (int b = 0; b + 1 < bins; ++b) {
    w0 += hist[b];
    sum0 += hist[b] * level[b];
    const Real w1 = total - w0;
    if (w0 < 1.0 || w1 < 1.0) continue;
    const Real mu0 = sum0 / w0, mu1 = (mu_total * total - sum0) / w1;
    const Real between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (between > best) {
      best = between;
      out.threshold = mn + (b + 1.0) * (mx - mn) / bins;
      out.low_fraction = w0 / total;
      out.separation = std::abs(mu1 - mu0) / std::sqrt(std::max(var_total, 1e-300));
    }
  }
  out.ok = best > 0.0;
  return out;
}

// Marching squares on the indicator grid: emits segments of the iso-line
// z = threshold over cells whose four corners are all valid.
std::vector<std::vector<Vec2>> marching_squares(const IndicatorField& field,
                                                Real threshold) {
  const GridSpec& g = field.grid;
  auto value = [&](int i, int j) -> Real {
    const long q = static_cast<long>(j) * g.nx + i;
    if (field.tags[q] != Region::in_conductor) return std::numeric_limits<Real>::quiet_NaN();
    return std::isfinite(field.density_norm[q])
               ? std::log(std::max(field.density_norm[q], 1e-300))
               : std::numeric_limits<Real>::quiet_NaN();
  };

  struct Seg {
    Vec2 a, b;
  };
  std::vector<Seg> segments;
  auto interp = [&](const Vec2& pa, Real va, const Vec2& pb, Real vb) {
    const Real t = (threshold - va) / (vb - va);
    return Vec2(pa + std::clamp(t, 0.0, 1.0) * (pb - pa));
  };

  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      const Real v00 = value(i, j), v10 = value(i + 1, j);
      const Real v11 = value(i + 1, j + 1), v01 = value(i, j + 1);
      if (!std::isfinite(v00) || !std::isfinite(v10) || !std::isfinite(v11) ||
          !std::isfinite(v01))
        continue;
      const Vec2 p00 = g.point(i, j), p10 = g.point(i + 1, j);
      const Vec2 p11 = g.point(i + 1, j + 1), p01 = g.point(i, j + 1);
      int c = 0;
      if (v00 < threshold) c |= 1;
      if (v10 < threshold) c |= 2;
      if (v11 < threshold) c |= 4;
      if (v01 < threshold) c |= 8;
      if (c == 0 || c == 15) continue;

      const Vec2 bottom = (v00 < threshold) != (v10 < threshold)
                              ? interp(p00, v00, p10, v10)
                              : Vec2::Zero();
      const Vec2 right = (v10 < threshold) != (v11 < threshold)
                             ? interp(p10, v10, p11, v11)
                             : Vec2::Zero();
      const Vec2 top = (v01 < threshold) != (v11 < threshold)
                           ? interp(p01, v01, p11, v11)
                           : Vec2::Zero();
      const Vec2 left = (v00 < threshold) != (v01 < threshold)
                            ? interp(p00, v00, p01, v01)
                            : Vec2::Zero();

      switch (c) {
        case 1: case 14: segments.push_back({left, bottom}); break;
        case 2: case 13: segments.push_back({bottom, right}); break;
        case 3: case 12: segments.push_back({left, right}); break;
        case 4: case 11: segments.push_back({right, top}); break;
        case 6: case 9: segments.push_back({bottom, top}); break;
        case 7: case 8: segments.push_back({left, top}); break;
        case 5: case 10: {
          // ambiguous saddle: split by the cell-center value
          const Real vc = 0.25 * (v00 + v10 + v11 + v01);
          const bool center_low = vc < threshold;
          if ((c == 5) == center_low) {
            segments.push_back({left, top});
            segments.push_back({bottom, right});
          } else {
            segments.push_back({left, bottom});
            segments.push_back({right, top});
          }
          break;
        }
        default: break;
      }
    }
  }

  // stitch segments into polylines by quantized endpoint matching
  const Real qscale = 1.0 / (1e-9 * (std::abs(g.dx) + std::abs(g.dy)));
  auto key = [&](const Vec2& p) {
    return std::pair<long long, long long>(
        static_cast<long long>(std::llround(p[0] * qscale)),
        static_cast<long long>(std::llround(p[1] * qscale)));
  };
  std::map<std::pair<long long, long long>, std::vector<int>> by_endpoint;
  for (size_t s = 0; s < segments.size(); ++s) {
    by_endpoint[key(segments[s].a)].push_back(static_cast<int>(s));
    by_endpoint[key(segments[s].b)].push_back(static_cast<int>(s));
  }
  std::vector<bool> used(segments.size(), false);
  std::vector<std::vector<Vec2>> loops;
  for (size_t s0 = 0; s0 < segments.size(); ++s0) {
    if (used[s0]) continue;
    std::vector<Vec2> chain{segments[s0].a, segments[s0].b};
    used[s0] = true;
    bool grew = true;
    while (grew) {
      grew = false;
      const auto& slots = by_endpoint[key(chain.back())];
      for (int s : slots) {
        if (used[s]) continue;
        if (key(segments[s].a) == key(chain.back())) {
          chain.push_back(segments[s].b);
        } else {
          chain.push_back(segments[s].a);
        }
        used[s] = true;
        grew = true;
        break;
      }
      if (key(chain.back()) == key(chain.front())) break;
    }
    loops.push_back(std::move(chain));
  }
  std::sort(loops.begin(), loops.end(),
            [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return loops;
}

}  // namespace

ContourResult extract_boundary(const IndicatorField& field) {
  ContourResult result;
  std::vector<Real> z;
  for (size_t q = 0; q < field.points.size(); ++q) {
    if (field.tags[q] == Region::in_conductor && std::isfinite(field.density_norm[q]))
      z.push_back(std::log(std::max(field.density_norm[q], 1e-300)));
  }
  if (z.size() < 16) {
    result.diagnostic = "too few valid sampling points";
    return result;
  }
  OtsuResult otsu = otsu_threshold(z);
  if (!otsu.ok) {
    result.diagnostic = "degenerate indicator histogram";
    return result;
  }
  if (otsu.low_fraction < 0.02 || otsu.low_fraction > 0.98 || otsu.separation < 0.3) {
    result.diagnostic = "unimodal indicator histogram, no boundary detected";
    return result;
  }
  result.threshold = otsu.threshold;
  result.loops = marching_squares(field, otsu.threshold);
  if (result.loops.empty() || result.loops[0].size() < 8) {
    result.diagnostic = "no usable level-set contour";
    result.loops.clear();
    return result;
  }
  result.found = true;
  result.diagnostic = "ok";
  return result;
}

Matrix add_noise(const Matrix& data, Real level, std::uint64_t seed) {
  if (!(level >= 0.0)) throw InputDomainError("add_noise: level must be >= 0");
  if (level == 0.0) return data;
  const Real sigma = level * data.norm() / std::sqrt(static_cast<Real>(data.size()));
  std::mt19937_64 rng(seed);
  auto uniform = [&]() {
    return (static_cast<Real>(rng() >> 11) + 0.5) * 0x1.0p-53;  // (0, 1)
  };
  Matrix out = data;
  Real spare = 0.0;
  bool have_spare = false;
  for (long c = 0; c < out.cols(); ++c) {
    for (long r = 0; r < out.rows(); ++r) {
      Real n;
      if (have_spare) {
        n = spare;
        have_spare = false;
      } else {
        const Real u1 = uniform(), u2 = uniform();
        const Real mag = std::sqrt(-2.0 * std::log(u1));
        n = mag * std::cos(2.0 * M_PI * u2);
        spare = mag * std::sin(2.0 * M_PI * u2);
        have_spare = true;
      }
      out(r, c) += sigma * n;
    }
  }
  return out;
}

}  // namespace heatlsm
