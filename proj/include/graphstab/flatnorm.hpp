#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "graphstab/comparison.hpp"
#include "graphstab/graph_function.hpp"

namespace gs {

// Ball U in R^(n+1), split into the horizontal center in R^n and the
// height of the center. Slicing U at height h gives the n-ball of radius
// sqrt(rho^2 - (h - center_height)^2) about `center`.
struct Ball {
  VecN center;
  double center_height = 0.0;
  double rho = 0.0;
};

// U centered on the plane x^(n+1) = h0, directly above the origin: the
// default ball of the flat-distance routines.
Ball default_ball(Dimension dim, double h0, double rho);

// Right side of the flat-distance bound with this library's explicit
// constants, split into the three region terms. `height_term` is the
// height bound sup(f_filled - h0) <= height_term that feeds above_plane.
struct FlatBound {
  double value = 0.0;
  double fill_in = 0.0;      // boundary fill-ins: isoperimetric x horizon area
  double below_plane = 0.0;  // rho x isoperimetric volume at the h0 area
  double above_plane = 0.0;  // beta_n rho^n x height_term
  double height_term = 0.0;
};

// Upper bound for the flat distance in U between the graph of f and the
// plane x^(n+1) = h0, realized by an explicit decomposition
// graph - plane = A + boundary(B): A the filled planar regions of the
// graph's boundary components (downward oriented), B = B_plus + B_minus
// the regions between the filled graph and the plane, above and below h0.
// All masses are Lebesgue volumes of the intersections with U, so
// total = mass_A + mass_B_plus + mass_B_minus dominates the flat distance
// by construction.
struct FlatDecomposition {
  double mass_A = 0.0;
  double mass_B_plus = 0.0;
  double mass_B_minus = 0.0;
  double total = 0.0;
  double mass = 0.0;               // ADM mass of the graph
  std::optional<FlatBound> bound;  // set when computable in the dimension
};

// Volume of the intersection of two n-balls whose centers are distance d
// apart. Closed form: two spherical caps, their volumes from the exact
// antiderivative of cos^n.
double ball_intersection_volume(Dimension dim, double r1, double r2, double d);

// Computes the decomposition above. Region volumes integrate the exact
// sphere-ball intersection over horizontal slices when the graph is
// rotational with a nondecreasing profile; otherwise (dimension 3 only)
// slice volumes are counted on a cached midpoint grid at two resolutions
// and Richardson-extrapolated. The theorem-side bound is attached for
// n >= 5 always and for n = 3, 4 when the asymptotic profile is supplied.
// Throws ConvergenceError when the graph's mass does not converge and
// PreconditionError on negative mass or an unsupported general graph.
FlatDecomposition flat_distance_upper(
    const GraphFunction& f, double h0, const Ball& U,
    const std::optional<AsymptoticProfile>& ap = std::nullopt);

// Evaluates the bound's right side: fill_in from the sharp isoperimetric
// inequality applied to the horizon-area bound omega_(n-1) (2m)^((n-1)/(n-2)),
// below_plane = rho x the isoperimetric volume at twice that area (the
// area defining h0), above_plane = beta_n rho^n x the height bound from
// the comparison module (dimensions >= 5) or the low-dimension bound built
// on the asymptotic profile (dimensions 3 and 4, ap required).
FlatBound theorem_bound(Dimension dim, double mass, double rho,
                        const std::optional<AsymptoticProfile>& ap =
                            std::nullopt);

// The same B_plus / B_minus volumes computed in the opposite slicing
// order: vertical column lengths integrated over the horizontal disk.
// Rotational graphs with the ball centered on the symmetry axis only;
// used to cross-check the horizontal-slice quadrature.
struct ColumnMasses {
  double mass_B_plus = 0.0;
  double mass_B_minus = 0.0;
};

ColumnMasses masses_by_columns(const GraphFunction& f, double h0,
                               const Ball& U);

// Pairing of graph - plane against the rotationally symmetric test n-form
// eta(|X - X0|) dx^1 ^ ... ^ dx^n with the polynomial bump
// eta(s) = (1 - (s/R)^2)^4, X0 = (0, center_height) on the symmetry axis.
// The decomposition gives |pairing| <= mass_A sup|eta| + mass_B sup|eta'|
// whenever the form's support lies in the ball the masses were computed
// in; `bound` is that right side and `pass` records the comparison.
struct PairingCheck {
  double center_height = 0.0;
  double radius = 0.0;
  double pairing = 0.0;
  double bound = 0.0;
  bool pass = false;
};

PairingCheck pairing_check(const GraphFunction& f, double h0,
                           const FlatDecomposition& dec, double center_height,
                           double radius);

// One member of a convergence study: its mass and decomposition (with the
// bound attached), plus the pairing battery when requested.
struct StudyRow {
  double mass = 0.0;
  FlatDecomposition dec;
  std::vector<PairingCheck> pairings;
};

struct StudyTable {
  Dimension dim;
  double rho = 0.0;
  std::vector<StudyRow> rows;
};

// Runs flat_distance_upper and theorem_bound across a family of graphs
// whose masses decrease strictly toward zero, each normalized so its h_0
// is zero (both are verified; violations throw). Asserts every upper
// bound is at most its theorem bound and, for families of two or more
// members, that the final upper bound is below the initial one. When
// with_pairing is set, each member is paired against the bump forms at
// three support centers on and off the plane (support radius rho/2,
// centers at heights 0 and +-rho/4). Family members run in parallel.
StudyTable convergence_study(const std::vector<GraphPtr>& family, double rho,
                             const std::optional<AsymptoticProfile>& ap =
                                 std::nullopt,
                             bool with_pairing = false, int threads = 1);

// CSV table (m, d_flat_upper, bound, mass_A, mass_B_plus, mass_B_minus).
void write_flat_study_csv(const StudyTable& table,
                          const std::filesystem::path& path);

// JSON document with the same rows plus the pairing battery results.
std::string flat_study_json(const StudyTable& table);

}  // namespace gs
