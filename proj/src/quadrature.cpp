#include "heatlsm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace heatlsm {

namespace {

GaussRule compute_gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev-based initial guess for the i-th root of P_n.
    Real x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    Real dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      Real p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        Real p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      Real dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    Real w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

struct Panel {
  Real a, b, value, err;
};

Real panel_pair(const std::function<Real(Real)>& f, Real a, Real b, Real& coarse) {
  const GaussRule& g10 = gauss_legendre(10);
  const GaussRule& g20 = gauss_legendre(20);
  const Real mid = 0.5 * (a + b);
  const Real half = 0.5 * (b - a);
  Real s10 = 0.0, s20 = 0.0;
  for (int i = 0; i < 10; ++i) s10 += g10.weights[i] * f(mid + half * g10.nodes[i]);
  for (int i = 0; i < 20; ++i) s20 += g20.weights[i] * f(mid + half * g20.nodes[i]);
  coarse = s10 * half;
  return s20 * half;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
  static std::map<int, GaussRule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, compute_gauss_legendre(order)).first;
  return it->second;
}

Real gauss_panel(const std::function<Real(Real)>& f, Real a, Real b, int order) {
  const GaussRule& g = gauss_legendre(order);
  const Real mid = 0.5 * (a + b);
  const Real half = 0.5 * (b - a);
  Real s = 0.0;
  for (int i = 0; i < order; ++i) s += g.weights[i] * f(mid + half * g.nodes[i]);
  return s * half;
}

QuadResult adaptive_quadrature(const std::function<Real(Real)>& f, Real a, Real b,
                               Real abs_tol, Real rel_tol, int max_depth) {
  QuadResult result;
  if (!(b > a)) {
    result.converged = true;
    return result;
  }

  struct Item {
    Real a, b;
    int depth;
  };
  std::vector<Item> stack{{a, b, 0}};
  Real total = 0.0, total_err = 0.0;
  bool all_ok = true;
  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    Real coarse = 0.0;
    Real fine = panel_pair(f, it.a, it.b, coarse);
    Real err = std::abs(fine - coarse);
    Real local_tol =
        std::max(abs_tol * (it.b - it.a) / (b - a), rel_tol * std::abs(fine));
    if (err <= local_tol || it.depth >= max_depth) {
      if (err > local_tol) all_ok = false;
      total += fine;
      total_err += err;
    } else {
      Real mid = 0.5 * (it.a + it.b);
      stack.push_back({it.a, mid, it.depth + 1});
      stack.push_back({mid, it.b, it.depth + 1});
    }
  }
  result.value = total;
  result.error_estimate = total_err;
  result.converged = all_ok;
  return result;
}

QuadResult tanh_sinh(const std::function<Real(Real)>& f, Real a, Real b, Real abs_tol,
                     int max_level) {
  QuadResult result;
  if (!(b > a)) {
    result.converged = true;
    return result;
  }
  const Real half = 0.5 * (b - a);
  const Real mid = 0.5 * (a + b);
  const Real t_max = 3.8;  // weights are ~1e-29 out here

  // Abscissas are placed via their distance to the nearer endpoint,
  // 1 -+ tanh(sh) = 2 / (1 + e^{+-2 sh}), so they never collapse onto it.
  auto eval_at = [&](Real t, Real& weight) -> Real {
    const Real sh = M_PI_2 * std::sinh(t);
    const Real ch = std::cosh(sh);
    weight = M_PI_2 * std::cosh(t) / (ch * ch);
    const Real d = 2.0 / (1.0 + std::exp(2.0 * std::abs(sh)));
    return t >= 0.0 ? b - half * d : a + half * d;
  };

  Real h = 1.0;
  Real w0 = 0.0;
  Real x0 = eval_at(0.0, w0);
  Real sum = f(x0) * w0;
  Real prev = sum * h * half;
  // level 0 coarse pass over +-k
  for (int k = 1; k * h <= t_max; ++k) {
    Real w = 0.0;
    Real xp = eval_at(k * h, w);
    sum += f(xp) * w;
    Real xm = eval_at(-k * h, w);
    sum += f(xm) * w;
  }
  prev = sum * h * half;

  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    // add the odd points of the refined grid
    for (Real t = h; t <= t_max; t += 2.0 * h) {
      Real w = 0.0;
      Real xp = eval_at(t, w);
      sum += f(xp) * w;
      Real xm = eval_at(-t, w);
      sum += f(xm) * w;
    }
    Real current = sum * h * half;
    Real diff = std::abs(current - prev);
    prev = current;
    if (level >= 3 && diff <= std::max(abs_tol, 4e-15 * std::abs(current))) {
      result.value = current;
      result.error_estimate = diff;
      result.converged = true;
      return result;
    }
    result.error_estimate = diff;
  }
  result.value = prev;
  result.converged = false;
  return result;
}

QuadResult adaptive_quadrature_2d(const std::function<Real(Real, Real)>& f, Real ax,
                                  Real bx, Real ay, Real by, Real tol) {
  bool inner_ok = true;
  auto outer = [&](Real x) {
    QuadResult inner = adaptive_quadrature([&](Real y) { return f(x, y); }, ay, by,
                                           tol * 0.05, 1e-12, 40);
    inner_ok = inner_ok && inner.converged;
    return inner.value;
  };
  QuadResult result = adaptive_quadrature(outer, ax, bx, tol, 1e-12, 40);
  result.converged = result.converged && inner_ok;
  return result;
}

}  // namespace heatlsm
