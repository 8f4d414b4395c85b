#pragma once

#include <vector>

#include "mtebounds/types.hpp"

// Local-linear estimation of conditional means given the propensity score,
// and the inversion that turns those means into marginal response values.
// Within arm d, the regression target a is the observed outcome level or the
// selection indicator, and the data are (propensity, target, weight) triples.
//
// The inversion uses the integral form of the observed conditional means:
//   E[A | P = p, D = 0] averages the untreated response over u in (p, 1],
//   E[A | P = p, D = 1] averages the treated response over u in [0, p],
// so the response value at u = p is recovered from the level and the slope
// of the conditional mean at p.

namespace mtebounds {

struct WeightedPoint {
  double p = 0.0;  // propensity score
  double a = 0.0;  // regression target
  double w = 1.0;  // sampling weight, must be positive
};

struct LocalLinearFit {
  double value = 0.0;
  double slope = 0.0;
  double n_effective = 0.0;  // points with positive kernel weight
};

// Weighted local-linear fit at p0 with an Epanechnikov kernel of half-width
// h. Throws numeric_error when fewer than two distinct propensity values
// fall inside the window.
LocalLinearFit local_linear(const std::vector<WeightedPoint>& obs, double p0,
                            double h);

struct ConditionalMeanCurve {
  int arm = 0;
  double bandwidth = 0.0;
  std::vector<double> grid;
  std::vector<double> value;
  std::vector<double> derivative;
};

// Local-linear fits of the conditional mean over a grid of propensity values.
ConditionalMeanCurve estimate_conditional_means(
    const std::vector<WeightedPoint>& obs, int arm,
    const std::vector<double>& grid, double h);

// Marginal response value at u = p from the fitted conditional mean curve,
// using the arm-specific inversion. The query point must lie inside the
// fitted grid; level and slope are interpolated linearly.
double mtr_from_liv(const ConditionalMeanCurve& curve, double p);

// Rule-of-thumb bandwidth for the propensity regressor: 1.5 times the normal
// reference rule on the weighted dispersion of p.
double silverman_bandwidth(const std::vector<WeightedPoint>& obs);

// Marks grid points whose full kernel window [p - h, p + h] lies inside the
// observed propensity range, where the local-linear fit carries no boundary
// extrapolation.
std::vector<bool> interior_points(const std::vector<double>& grid,
                                  double p_min, double p_max, double h);

}  // namespace mtebounds
