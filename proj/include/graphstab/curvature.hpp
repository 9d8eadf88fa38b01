#pragma once

#include "graphstab/graph_function.hpp"

namespace gs {

// Levels whose minimum |Df| on the level set falls below this floor are
// treated as non-regular and rejected by level-set operations.
inline constexpr double kRegularityFloor = 1e-6;

// Scalar curvature of the induced metric on the graph of f, evaluated from
// the divergence-form identity
//   R = sum_j d_j [ (sum_i f_ii f_j - f_ij f_i) / (1+|Df|^2) ].
// Expanded analytically the third-derivative contractions cancel in pairs,
// leaving a second-order expression; when the jet carries the third-order
// slot the literal expansion (with the canceling pair spelled out) is used.
double scalar_curvature_reilly(const Jet& j);

// Same quantity through the Gauss equation R = H^2 - |A|^2 with the shape
// operator of the graph. Independent algebraic route; the two must agree.
double scalar_curvature_gauss(const Jet& j);

// Mean curvature of the graph with respect to the upward normal
// (-Df,1)/sqrt(1+|Df|^2). Positive for the lower unit hemisphere (= n).
double graph_mean_curvature(const Jet& j);

// Mean curvature of the level set {f = f(x)} inside R^n with respect to
// the inward normal -Df/|Df| (positive (n-1)/r on round spheres of radius r
// cut from f = |x|). Throws PreconditionError when |Df| < kRegularityFloor.
double levelset_mean_curvature(const Jet& j);

double scalar_curvature_reilly(const GraphFunction& f, const VecN& x);
double scalar_curvature_gauss(const GraphFunction& f, const VecN& x);
double graph_mean_curvature(const GraphFunction& f, const VecN& x);
double levelset_mean_curvature(const GraphFunction& f, const VecN& x);

enum class MeanCurvatureDirection { upward, downward, undetermined };

// Classifies the sign of the graph mean curvature on deterministic sample
// points in the annulus [r_lo, r_hi]. All samples within tolerance of zero,
// or mixed significant signs, classify as undetermined.
MeanCurvatureDirection detect_mean_curvature_direction(const GraphFunction& f,
                                                       double r_lo,
                                                       double r_hi,
                                                       int samples = 64,
                                                       double tol = 1e-8);

}  // namespace gs
