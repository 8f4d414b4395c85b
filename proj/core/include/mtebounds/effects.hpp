#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mtebounds/sample.hpp"
#include "mtebounds/types.hpp"

// Weighted aggregation of a bound curve into summary treatment effects. The
// built-in weights are step functions of u driven by the propensity
// distribution, so integrals are computed exactly by splitting the curve grid
// at every weight breakpoint instead of sampling the product on the grid.

namespace mtebounds {

enum class EffectKind { ATE, ATT, ATU, LATE, Custom };

std::string to_string(EffectKind);

struct EffectWeight {
  EffectKind kind = EffectKind::ATE;
  std::string name = "ate";
  // LATE window; ignored for the other kinds.
  double u_lo = 0.0;
  double u_hi = 1.0;
  // Pointwise weight for Custom, treated as piecewise linear between grid
  // points when integrating.
  std::function<double(double)> fn;

  static EffectWeight ate();
  static EffectWeight att();
  static EffectWeight atu();
  static EffectWeight late(double u_lo, double u_hi);
  static EffectWeight custom(std::string name, std::function<double(double)>);
};

// Weight value at one u. Treated-share weights count an atom exactly at u as
// still treated (P >= u); untreated-share weights use the strict complement.
double weight_eval(const EffectWeight&, double u, const PropensityTable&);

// Exact integral of the weight over [a, b] under the same conventions used
// by effect_bounds. The built-in weights integrate to one over [0, 1].
double weight_integral(const EffectWeight&, double a, double b,
                       const PropensityTable&);

struct EffectBounds {
  EffectKind kind = EffectKind::ATE;
  std::string name = "ate";
  double lower = 0.0;
  double upper = 0.0;
  bool lower_unbounded = false;
  bool upper_unbounded = false;
};

// Integrates the curve envelope against the weight. Preconditions: the curve
// grid is strictly increasing and covers the support of the weight; no grid
// point carrying a denominator-guard or empty-interval flag may lie where the
// weight is nonzero. Signed custom weights pair the lower envelope with
// positive weight and the upper envelope with negative weight.
EffectBounds effect_bounds(const BoundCurve&, const EffectWeight&,
                           const PropensityTable&);

}  // namespace mtebounds
