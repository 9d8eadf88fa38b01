#include "graphstab/curvature.hpp"

#include <cmath>

#include "graphstab/errors.hpp"
#include "graphstab/sampling.hpp"

namespace gs {

double scalar_curvature_reilly(const Jet& j) {
  const double Q = 1.0 + norm2(j.grad);
  const double L = trace(j.hess);
  const VecN v = matvec(j.hess, j.grad);  // Hess * Df
  double div_P;
  if (j.has_third) {
    // Literal expansion of sum_j d_j P_j: the two <D(lap f), Df> terms
    // cancel; keeping them exercises the third-order jet slot.
    const double third = dot(j.grad_laplacian, j.grad);
    div_P = third + L * L - third - frobenius2(j.hess);
  } else {
    div_P = L * L - frobenius2(j.hess);
  }
  // d_j Q = 2 v_j, P_j = L f_j - v_j.
  return div_P / Q - 2.0 * (L * dot(j.grad, v) - dot(v, v)) / (Q * Q);
}

double scalar_curvature_gauss(const Jet& j) {
  const int n = j.grad.n;
  const double Q = 1.0 + norm2(j.grad);
  const double W = std::sqrt(Q);
  const VecN v = matvec(j.hess, j.grad);
  // Shape operator S = g^{-1} A with g^{-1} = I - Df Df^T / Q and
  // A = Hess / W:  S_ij = (hess_ij - grad_i v_j / Q) / W.
  MatN S(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      S.at(i, k) = (j.hess.at(i, k) - j.grad[i] * v[k] / Q) / W;
  double H = trace(S);
  double tr_S2 = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) tr_S2 += S.at(i, k) * S.at(k, i);
  return H * H - tr_S2;
}

double graph_mean_curvature(const Jet& j) {
  const double Q = 1.0 + norm2(j.grad);
  const VecN v = matvec(j.hess, j.grad);
  return (trace(j.hess) - dot(j.grad, v) / Q) / std::sqrt(Q);
}

double levelset_mean_curvature(const Jet& j) {
  const double g2 = norm2(j.grad);
  const double g = std::sqrt(g2);
  if (g < kRegularityFloor)
    throw PreconditionError(
        "levelset_mean_curvature: |Df| below regularity floor");
  const VecN v = matvec(j.hess, j.grad);
  return (trace(j.hess) - dot(j.grad, v) / g2) / g;
}

double scalar_curvature_reilly(const GraphFunction& f, const VecN& x) {
  return scalar_curvature_reilly(f.jet(x));
}
double scalar_curvature_gauss(const GraphFunction& f, const VecN& x) {
  return scalar_curvature_gauss(f.jet(x));
}
double graph_mean_curvature(const GraphFunction& f, const VecN& x) {
  return graph_mean_curvature(f.jet(x));
}
double levelset_mean_curvature(const GraphFunction& f, const VecN& x) {
  return levelset_mean_curvature(f.jet(x));
}

MeanCurvatureDirection detect_mean_curvature_direction(const GraphFunction& f,
                                                       double r_lo,
                                                       double r_hi,
                                                       int samples,
                                                       double tol) {
  const int n = f.dim().n();
  bool any_pos = false, any_neg = false;
  for (int i = 0; i < samples; ++i) {
    VecN x = halton_annulus_point(n, static_cast<uint64_t>(i), r_lo, r_hi);
    if (!f.in_domain(x)) continue;
    double H = graph_mean_curvature(f, x);
    if (H > tol) any_pos = true;
    if (H < -tol) any_neg = true;
  }
  if (any_pos && !any_neg) return MeanCurvatureDirection::upward;
  if (any_neg && !any_pos) return MeanCurvatureDirection::downward;
  return MeanCurvatureDirection::undetermined;
}

}  // namespace gs
