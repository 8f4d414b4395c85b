#pragma once

#include <cstdint>
#include <vector>

#include "mtebounds/bernstein.hpp"
#include "mtebounds/types.hpp"

// Sharp bounds on the marginal treatment effect for the always-observed
// stratum, from the outcome-scale and selection-scale response curves. All
// formulas are evaluated per support case; infinite endpoints are returned as
// infinities, never computed through indeterminate arithmetic.

namespace mtebounds {

struct PointBounds {
  double lower = -kInf;
  double upper = kInf;
  std::uint8_t flags = 0;
};

// Scalar core shared by the parametric curve evaluation and the outer-set
// corner enumeration. Inputs are the component values at one u. When a
// required denominator is below the guard threshold the flags carry
// kFlagDenominatorGuard and the endpoints are NaN. A selection contrast of
// zero (within the guard threshold) point-identifies the effect under any
// profile and sets kFlagPointIdentified.
PointBounds mte_oo_point_bounds(double m0y, double m1y, double m0s, double m1s,
                                const SupportSpec&, const AssumptionProfile&);

// Always-observed untreated mean at u, m0Y(u)/m0S(u). Throws numeric_error
// when the selection denominator is guarded.
double untreated_component(const MTRSet&, double u);

// Bracket for the always-observed treated mean at u under increasing
// selection with no dominance assumption.
PointBounds treated_component_bounds(const MTRSet&, const SupportSpec&,
                                     double u);

// Bound curve for the always-observed marginal treatment effect over a grid.
// Preconditions: grid values in [0,1]; dominance assumptions require the
// increasing direction; under the increasing direction the selection curves
// must satisfy m1S >= m0S on the grid (guard tolerance).
BoundCurve mte_oo_bounds(const MTRSet&, const SupportSpec&,
                         const AssumptionProfile&,
                         const std::vector<double>& grid);

// Bracket curve for the treated-arm mean of the stratum observed only under
// treatment. Requires a positive selection contrast pointwise (guard flag
// otherwise). Dominance may be None or GreaterEqual; GreaterEqual caps the
// upper envelope at m1Y/m1S.
BoundCurve m1_no_bounds(const MTRSet&, const SupportSpec&, MeanDominance,
                        const std::vector<double>& grid);

}  // namespace mtebounds
