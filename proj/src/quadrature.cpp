#include "graphstab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

#include "graphstab/errors.hpp"
#include "graphstab/io.hpp"

namespace gs {

namespace {

std::vector<GLNode> compute_gauss_legendre(int order) {
  // Newton on P_order with the three-term recurrence; nodes are symmetric.
  std::vector<GLNode> nodes(static_cast<size_t>(order));
  const int m = (order + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = order * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    nodes[static_cast<size_t>(i)] = {-x, w};
    nodes[static_cast<size_t>(order - 1 - i)] = {x, w};
  }
  return nodes;
}

std::mutex gl_cache_mutex;
std::map<int, std::vector<GLNode>>& gl_cache() {
  static std::map<int, std::vector<GLNode>> cache;
  return cache;
}

// One product-rule pass at fixed per-angle order q.
double sphere_pass(int n, double radius,
                   const std::function<double(const VecN&)>& fn, int q) {
  const int n_polar = n - 2;  // theta_1..theta_{n-2} in [0,pi]
  const auto& gl = gauss_legendre(q);

  // Per polar angle k (0-based): nodes theta, weight includes the
  // sin^(n-2-k) theta factor of the surface measure. Each angle's weights
  // are rescaled to hit the exact integral of its sin power, so the rule
  // integrates constants exactly at every order; otherwise the Jacobian
  // error alone forces high orders on near-constant integrands.
  std::vector<std::vector<double>> cos_t(static_cast<size_t>(n_polar)),
      sin_t(static_cast<size_t>(n_polar)), wt(static_cast<size_t>(n_polar));
  for (int k = 0; k < n_polar; ++k) {
    auto& ck = cos_t[static_cast<size_t>(k)];
    auto& sk = sin_t[static_cast<size_t>(k)];
    auto& wk = wt[static_cast<size_t>(k)];
    ck.resize(static_cast<size_t>(q));
    sk.resize(static_cast<size_t>(q));
    wk.resize(static_cast<size_t>(q));
    const int sin_pow = n - 2 - k;
    double weight_total = 0.0;
    for (int i = 0; i < q; ++i) {
      double theta = 0.5 * std::numbers::pi * (gl[static_cast<size_t>(i)].x + 1.0);
      double s = std::sin(theta);
      ck[static_cast<size_t>(i)] = std::cos(theta);
      sk[static_cast<size_t>(i)] = s;
      wk[static_cast<size_t>(i)] = 0.5 * std::numbers::pi *
                                   gl[static_cast<size_t>(i)].w *
                                   std::pow(s, sin_pow);
      weight_total += wk[static_cast<size_t>(i)];
    }
    double exact = std::numbers::pi;  // int_0^pi sin^p, p = 0
    for (int p = (sin_pow % 2 == 0) ? 2 : 1; p <= sin_pow; p += 2)
      exact *= (p == 1) ? (2.0 / std::numbers::pi) : (p - 1.0) / p;
    for (int i = 0; i < q; ++i)
      wk[static_cast<size_t>(i)] *= exact / weight_total;
  }
  // Periodic angle: q equispaced nodes, exact for trigonometric degree < q.
  std::vector<double> cos_p(static_cast<size_t>(q)), sin_p(static_cast<size_t>(q));
  for (int j = 0; j < q; ++j) {
    double phi = 2.0 * std::numbers::pi * j / q;
    cos_p[static_cast<size_t>(j)] = std::cos(phi);
    sin_p[static_cast<size_t>(j)] = std::sin(phi);
  }
  const double w_phi = 2.0 * std::numbers::pi / q;

  std::vector<int> idx(static_cast<size_t>(n_polar), 0);
  VecN x(n);
  KahanSum sum;
  bool done = false;
  while (!done) {
    double w_ang = 1.0;
    double sprod = 1.0;
    for (int k = 0; k < n_polar; ++k) {
      int i = idx[static_cast<size_t>(k)];
      x[k] = radius * sprod * cos_t[static_cast<size_t>(k)][static_cast<size_t>(i)];
      sprod *= sin_t[static_cast<size_t>(k)][static_cast<size_t>(i)];
      w_ang *= wt[static_cast<size_t>(k)][static_cast<size_t>(i)];
    }
    for (int j = 0; j < q; ++j) {
      x[n - 2] = radius * sprod * cos_p[static_cast<size_t>(j)];
      x[n - 1] = radius * sprod * sin_p[static_cast<size_t>(j)];
      sum.add(w_ang * w_phi * fn(x));
    }
    // odometer
    int k = n_polar - 1;
    while (k >= 0 && ++idx[static_cast<size_t>(k)] == q) {
      idx[static_cast<size_t>(k)] = 0;
      --k;
    }
    done = (k < 0);
  }
  return sum.value() * std::pow(radius, n - 1);
}

double simpson_rule(double fa, double fm, double fb, double h) {
  return h / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson_rec(const std::function<double(double)>& fn, double a,
                            double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = fn(lm), frm = fn(rm);
  double left = simpson_rule(fa, flm, fm, m - a);
  double right = simpson_rule(fm, frm, fb, b - m);
  double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  // Roundoff floor: once the refinement delta is dominated by rounding of
  // the panel sums (or the interval is unresolvable in doubles), further
  // splitting cannot help. Accept rather than recurse to the depth cap.
  const double floor = 32.0 * 2.220446049250313e-16 *
                       (std::abs(left) + std::abs(right) + std::abs(whole));
  if (std::abs(delta) <= floor ||
      b - a <= 8.0 * 2.220446049250313e-16 * std::max(std::abs(a), std::abs(b)))
    return left + right + delta / 15.0;
  if (depth <= 0)
    throw ConvergenceError("adaptive_simpson: depth budget exhausted on [" +
                           format_double(a) + ", " + format_double(b) +
                           "], delta " + format_double(delta) + ", tol " +
                           format_double(tol));
  return adaptive_simpson_rec(fn, a, m, fa, flm, fm, left, 0.5 * tol,
                              depth - 1) +
         adaptive_simpson_rec(fn, m, b, fm, frm, fb, right, 0.5 * tol,
                              depth - 1);
}

}  // namespace

const std::vector<GLNode>& gauss_legendre(int order) {
  std::lock_guard<std::mutex> lock(gl_cache_mutex);
  auto& cache = gl_cache();
  auto it = cache.find(order);
  if (it == cache.end())
    it = cache.emplace(order, compute_gauss_legendre(order)).first;
  return it->second;
}

SphereQuadratureResult integrate_sphere(
    Dimension dim, double radius,
    const std::function<double(const VecN&)>& fn, double abs_tol,
    double rel_tol, int max_order, int min_order) {
  const int n = dim.n();
  int q = std::max(4, min_order);
  double prev = sphere_pass(n, radius, fn, q);
  while (true) {
    int q2 = 2 * q;
    if (q2 > max_order)
      throw ConvergenceError(
          "integrate_sphere: node doubling exceeded max order " +
          std::to_string(max_order));
    double cur = sphere_pass(n, radius, fn, q2);
    double delta = std::abs(cur - prev);
    if (delta <= std::max(abs_tol, rel_tol * std::abs(cur)))
      return {cur, delta, q2};
    prev = cur;
    q = q2;
  }
}

double adaptive_simpson(const std::function<double(double)>& fn, double a,
                        double b, double abs_tol, double rel_tol,
                        int max_depth) {
  if (a == b) return 0.0;
  double fa = fn(a), fb = fn(b), fm = fn(0.5 * (a + b));
  double whole = simpson_rule(fa, fm, fb, b - a);
  double tol = std::max(abs_tol, rel_tol * std::abs(whole));
  return adaptive_simpson_rec(fn, a, b, fa, fm, fb, whole, tol, max_depth);
}

double integrate_gl(const std::function<double(double)>& fn, double a,
                    double b, int order, int panels) {
  const auto& gl = gauss_legendre(order);
  const double h = (b - a) / panels;
  KahanSum sum;
  for (int p = 0; p < panels; ++p) {
    double lo = a + p * h;
    for (const auto& node : gl)
      sum.add(0.5 * h * node.w * fn(lo + 0.5 * h * (node.x + 1.0)));
  }
  return sum.value();
}

double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    KahanSum s;
    for (double x : xs) s.add(x);
    return s.value();
  }
  size_t half = xs.size() / 2;
  return pairwise_sum(xs.subspan(0, half)) + pairwise_sum(xs.subspan(half));
}

PowerFit power_extrapolate(double a1, double a2, double a3) {
  const double d12 = a1 - a2;
  const double d23 = a2 - a3;
  const double scale = std::fabs(a1) + std::fabs(a2) + std::fabs(a3) + 1.0;
  if (std::fabs(d12) < 1e-13 * scale && std::fabs(d23) < 1e-13 * scale) {
    return {a3, std::numeric_limits<double>::infinity()};
  }
  const double s = d23 / d12;
  if (!(s > 0.0) || !(s < 1.0)) return {a3, 0.0};
  return {a3 - s * d23 / (1.0 - s), -std::log2(s)};
}

}  // namespace gs
