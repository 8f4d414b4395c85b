#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mtebounds/bernstein.hpp"
#include "mtebounds/sample.hpp"
#include "mtebounds/types.hpp"

// Nonparametric outer set: instead of committing to one fitted curve pair,
// collect every coefficient vector that reproduces a family of IV-like
// moments exactly, then report the extremes of the bound formulas over that
// set. Each moment E[g(D, Z) * A] is linear in the stacked coefficients, so
// the extremes are linear programs over a polytope.

namespace mtebounds {

struct IVLikeSpec {
  std::string name;
  std::function<double(int d, int z)> g;
  double beta = 0.0;  // the moment value the curve set must reproduce
};

// One indicator moment per observed (d, z) cell; beta is the unconditional
// weighted sample mean of 1{D=d, Z=z} * A with A chosen by the variable.
std::vector<IVLikeSpec> saturated_ivlike_family(const Sample&, Variable);

// Row of the moment map: coefficients of beta_spec as a linear function of
// the stacked vector (theta0, theta1), using L basis functions per arm.
Eigen::RowVectorXd build_gamma_row(const IVLikeSpec&, const PropensityTable&,
                                   int L);

// Replaces each beta with the value implied by a fitted curve, i.e. the
// gamma row applied to the curve's coefficients. Use when the polytope
// should be anchored at a fitted model rather than at raw sample moments.
std::vector<IVLikeSpec> model_implied_ivlike_family(
    std::vector<IVLikeSpec> family, const BernsteinMTR&,
    const PropensityTable&);

struct MTRPolytope {
  int L = 0;
  double box_lo = 0.0;
  double box_hi = kInf;
  // Cross-arm per-index ordering: +1 keeps theta1[l] >= theta0[l], -1 the
  // reverse, 0 unordered.
  int ordering = 0;
  Eigen::MatrixXd eq_rows;  // n_specs x 2L
  Eigen::VectorXd eq_rhs;
  std::vector<std::string> eq_names;
};

MTRPolytope build_polytope(const std::vector<IVLikeSpec>&,
                           const PropensityTable&, int L, FeasibleSet);

struct ExtremeResult {
  double min_value = 0.0;
  double max_value = 0.0;
  Eigen::VectorXd argmin;  // stacked (theta0, theta1) attaining the minimum
  Eigen::VectorXd argmax;
  double duality_gap = 0.0;  // worse of the two optimality certificates
};

// Extremes of the curve value M_arm(u) over the polytope. Throws
// numeric_error when the polytope is empty (the moments are mutually
// inconsistent) or the optimality certificate fails.
ExtremeResult extremize_value(const MTRPolytope&, int arm, double u);

// Extremes of the cross-arm contrast M_1(u) - M_0(u) over the polytope.
ExtremeResult extremize_contrast(const MTRPolytope&, double u);

// Envelope of the always-observed effect bounds over the outer set: the
// component brackets at each u are propagated through the bound formulas by
// corner enumeration, which is exact because every formula is monotone along
// each component axis. Guards propagate whenever any corner is guarded;
// point identification survives only when every corner collapses.
BoundCurve outer_set_mte_oo(const MTRPolytope& outcome,
                            const MTRPolytope& selection, const SupportSpec&,
                            const AssumptionProfile&,
                            const std::vector<double>& grid);

}  // namespace mtebounds
