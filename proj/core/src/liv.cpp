#include "mtebounds/liv.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "mtebounds/errors.hpp"

namespace mtebounds {

namespace {

double epanechnikov(double t) {
  const double a = std::abs(t);
  return a < 1.0 ? 0.75 * (1.0 - a * a) : 0.0;
}

void validate_obs(const std::vector<WeightedPoint>& obs) {
  if (obs.empty()) throw validation_error("no observations");
  for (const auto& pt : obs) {
    if (!std::isfinite(pt.p) || !std::isfinite(pt.a))
      throw validation_error("observation has a non-finite value");
    if (!(pt.w > 0.0) || !std::isfinite(pt.w))
      throw validation_error("observation weight must be positive");
  }
}

}  // namespace

LocalLinearFit local_linear(const std::vector<WeightedPoint>& obs, double p0,
                            double h) {
  validate_obs(obs);
  if (!(h > 0.0) || !std::isfinite(h))
    throw validation_error("bandwidth must be positive");

  double s0 = 0.0, s1 = 0.0, s2 = 0.0, t0 = 0.0, t1 = 0.0;
  double n_eff = 0.0;
  double p_lo = kInf, p_hi = -kInf;
  for (const auto& pt : obs) {
    const double k = epanechnikov((pt.p - p0) / h);
    if (k <= 0.0) continue;
    const double kw = k * pt.w;
    const double dx = pt.p - p0;
    s0 += kw;
    s1 += kw * dx;
    s2 += kw * dx * dx;
    t0 += kw * pt.a;
    t1 += kw * pt.a * dx;
    n_eff += 1.0;
    p_lo = std::min(p_lo, pt.p);
    p_hi = std::max(p_hi, pt.p);
  }

  if (n_eff < 2.0 || !(p_hi - p_lo > 0.0)) {
    throw numeric_error(fmt::format(
        "local linear fit at p={:.6g} has fewer than two distinct "
        "propensity values within bandwidth {:.6g}",
        p0, h));
  }
  const double det = s0 * s2 - s1 * s1;
  const double scale = std::max(s0 * s2, s1 * s1);
  if (!(det > 1e-14 * std::max(scale, 1e-300))) {
    throw numeric_error(fmt::format(
        "local linear design at p={:.6g} is numerically singular", p0));
  }

  LocalLinearFit fit;
  fit.value = (s2 * t0 - s1 * t1) / det;
  fit.slope = (s0 * t1 - s1 * t0) / det;
  fit.n_effective = n_eff;
  return fit;
}

ConditionalMeanCurve estimate_conditional_means(
    const std::vector<WeightedPoint>& obs, int arm,
    const std::vector<double>& grid, double h) {
  if (arm != 0 && arm != 1)
    throw validation_error(fmt::format("arm must be 0 or 1, got {}", arm));
  if (grid.size() < 2)
    throw validation_error("conditional mean grid needs at least 2 points");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw validation_error("conditional mean grid must be increasing");

  ConditionalMeanCurve curve;
  curve.arm = arm;
  curve.bandwidth = h;
  curve.grid = grid;
  curve.value.reserve(grid.size());
  curve.derivative.reserve(grid.size());
  for (double p : grid) {
    const LocalLinearFit fit = local_linear(obs, p, h);
    curve.value.push_back(fit.value);
    curve.derivative.push_back(fit.slope);
  }
  return curve;
}

double mtr_from_liv(const ConditionalMeanCurve& curve, double p) {
  if (curve.grid.size() < 2)
    throw validation_error("conditional mean curve is empty");
  if (!(p >= curve.grid.front() && p <= curve.grid.back()))
    throw validation_error(fmt::format(
        "query point {:.6g} lies outside the fitted grid [{:.6g}, {:.6g}]", p,
        curve.grid.front(), curve.grid.back()));

  const auto it =
      std::upper_bound(curve.grid.begin(), curve.grid.end(), p);
  std::size_t i = static_cast<std::size_t>(it - curve.grid.begin());
  if (i == 0) i = 1;
  if (i == curve.grid.size()) i = curve.grid.size() - 1;
  const double u0 = curve.grid[i - 1];
  const double u1 = curve.grid[i];
  const double t = (p - u0) / (u1 - u0);
  const double value =
      curve.value[i - 1] * (1.0 - t) + curve.value[i] * t;
  const double slope =
      curve.derivative[i - 1] * (1.0 - t) + curve.derivative[i] * t;

  // Level plus slope inversion of the integral form of the conditional mean.
  if (curve.arm == 0) return value - slope * (1.0 - p);
  return value + slope * p;
}

double silverman_bandwidth(const std::vector<WeightedPoint>& obs) {
  validate_obs(obs);
  double sw = 0.0, sw2 = 0.0, sx = 0.0, sxx = 0.0;
  for (const auto& pt : obs) {
    sw += pt.w;
    sw2 += pt.w * pt.w;
    sx += pt.w * pt.p;
    sxx += pt.w * pt.p * pt.p;
  }
  const double mean = sx / sw;
  const double var = std::max(sxx / sw - mean * mean, 0.0);
  const double n_eff = sw * sw / sw2;
  if (!(var > 0.0))
    throw numeric_error("propensity values have zero dispersion");
  return 1.5 * 1.06 * std::sqrt(var) * std::pow(n_eff, -0.2);
}

std::vector<bool> interior_points(const std::vector<double>& grid,
                                  double p_min, double p_max, double h) {
  std::vector<bool> mask;
  mask.reserve(grid.size());
  for (double p : grid)
    mask.push_back(p - h >= p_min && p + h <= p_max);
  return mask;
}

}  // namespace mtebounds
