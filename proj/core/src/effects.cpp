#include "mtebounds/effects.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "mtebounds/errors.hpp"

namespace mtebounds {

namespace {

constexpr double kEdgeTol = 1e-9;

void validate_weight(const EffectWeight& w, const PropensityTable& prop) {
  if (w.kind == EffectKind::ATT || w.kind == EffectKind::ATU) {
    if (prop.entries.empty())
      throw validation_error("propensity table is empty");
    const double m = prop.mean_p();
    if (w.kind == EffectKind::ATT && m <= kGuardEps)
      throw validation_error("treated share is zero; att weight is undefined");
    if (w.kind == EffectKind::ATU && m >= 1.0 - kGuardEps)
      throw validation_error(
          "untreated share is zero; atu weight is undefined");
  }
  if (w.kind == EffectKind::Custom && !w.fn)
    throw validation_error("custom weight has no evaluation function");
}

double raw_weight(const EffectWeight& w, double u,
                  const PropensityTable& prop) {
  switch (w.kind) {
    case EffectKind::ATE:
      return 1.0;
    case EffectKind::ATT: {
      double share = 0.0;
      for (const auto& atom : prop.p_atoms())
        if (atom.p >= u) share += atom.mass;
      return share / prop.mean_p();
    }
    case EffectKind::ATU: {
      double share = 0.0;
      for (const auto& atom : prop.p_atoms())
        if (atom.p < u) share += atom.mass;
      return share / (1.0 - prop.mean_p());
    }
    case EffectKind::LATE:
      return (u >= w.u_lo && u <= w.u_hi) ? 1.0 / (w.u_hi - w.u_lo) : 0.0;
    case EffectKind::Custom:
      return w.fn(u);
  }
  return 0.0;
}

// Points where a step weight changes value. The curve grid is split here so
// every subinterval sees a constant (or linear, for custom) weight.
std::vector<double> weight_breakpoints(const EffectWeight& w,
                                       const PropensityTable& prop) {
  std::vector<double> pts;
  if (w.kind == EffectKind::ATT || w.kind == EffectKind::ATU) {
    for (const auto& atom : prop.p_atoms()) pts.push_back(atom.p);
  } else if (w.kind == EffectKind::LATE) {
    pts.push_back(w.u_lo);
    pts.push_back(w.u_hi);
  }
  return pts;
}

struct SubInterval {
  double a = 0.0;
  double b = 0.0;
  double wa = 0.0;  // weight at a (for step weights, the constant value)
  double wb = 0.0;
  std::size_t cell = 0;  // index of the containing grid interval
};

// Splits [a, b] into weight-resolved subintervals. Step weights get their
// constant value from the midpoint, which sidesteps the one-sided conventions
// at atoms; custom weights are linearized and additionally split where the
// linear interpolant crosses zero so sign pairing stays exact.
void append_subintervals(const EffectWeight& w, const PropensityTable& prop,
                         double a, double b, std::size_t cell,
                         const std::vector<double>& breaks,
                         std::vector<SubInterval>& out) {
  std::vector<double> cuts{a};
  for (double x : breaks)
    if (x > a + kEdgeTol && x < b - kEdgeTol) cuts.push_back(x);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());

  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    SubInterval s;
    s.a = cuts[i];
    s.b = cuts[i + 1];
    s.cell = cell;
    if (w.kind == EffectKind::Custom) {
      s.wa = w.fn(s.a);
      s.wb = w.fn(s.b);
      if ((s.wa > 0.0 && s.wb < 0.0) || (s.wa < 0.0 && s.wb > 0.0)) {
        const double t = s.wa / (s.wa - s.wb);
        const double mid = s.a + (s.b - s.a) * t;
        SubInterval left{s.a, mid, s.wa, 0.0, cell};
        SubInterval right{mid, s.b, 0.0, s.wb, cell};
        out.push_back(left);
        out.push_back(right);
        continue;
      }
    } else {
      const double value = raw_weight(w, 0.5 * (s.a + s.b), prop);
      s.wa = value;
      s.wb = value;
    }
    out.push_back(s);
  }
}

// Integral over [a, b] of the product of two linear functions given by their
// endpoint values.
double linear_product_integral(double h, double fa, double fb, double wa,
                               double wb) {
  return h / 6.0 * (fa * (2.0 * wa + wb) + fb * (wa + 2.0 * wb));
}

void check_grid(const BoundCurve& curve) {
  if (curve.u.size() < 2)
    throw validation_error("bound curve needs at least 2 grid points");
  for (std::size_t i = 0; i < curve.u.size(); ++i) {
    if (!(curve.u[i] >= 0.0 && curve.u[i] <= 1.0))
      throw validation_error(
          fmt::format("grid point {:.6g} is outside [0, 1]", curve.u[i]));
    if (i > 0 && !(curve.u[i] > curve.u[i - 1]))
      throw validation_error("bound curve grid must be strictly increasing");
  }
}

void check_coverage(const BoundCurve& curve, const EffectWeight& w) {
  double need_lo = 0.0;
  double need_hi = 1.0;
  if (w.kind == EffectKind::LATE) {
    need_lo = w.u_lo;
    need_hi = w.u_hi;
  }
  if (curve.u.front() > need_lo + kEdgeTol ||
      curve.u.back() < need_hi - kEdgeTol) {
    throw validation_error(fmt::format(
        "curve grid [{:.6g}, {:.6g}] does not cover the {} weight support "
        "[{:.6g}, {:.6g}]",
        curve.u.front(), curve.u.back(), w.name, need_lo, need_hi));
  }
}

}  // namespace

std::string to_string(EffectKind k) {
  switch (k) {
    case EffectKind::ATE:
      return "ate";
    case EffectKind::ATT:
      return "att";
    case EffectKind::ATU:
      return "atu";
    case EffectKind::LATE:
      return "late";
    case EffectKind::Custom:
      return "custom";
  }
  return "unknown";
}

EffectWeight EffectWeight::ate() {
  EffectWeight w;
  w.kind = EffectKind::ATE;
  w.name = "ate";
  return w;
}

EffectWeight EffectWeight::att() {
  EffectWeight w;
  w.kind = EffectKind::ATT;
  w.name = "att";
  return w;
}

EffectWeight EffectWeight::atu() {
  EffectWeight w;
  w.kind = EffectKind::ATU;
  w.name = "atu";
  return w;
}

EffectWeight EffectWeight::late(double u_lo, double u_hi) {
  if (!(u_lo >= 0.0 && u_hi <= 1.0 && u_lo < u_hi))
    throw validation_error(fmt::format(
        "late window [{:.6g}, {:.6g}] must satisfy 0 <= lo < hi <= 1", u_lo,
        u_hi));
  EffectWeight w;
  w.kind = EffectKind::LATE;
  w.name = fmt::format("late({:.6g},{:.6g})", u_lo, u_hi);
  w.u_lo = u_lo;
  w.u_hi = u_hi;
  return w;
}

EffectWeight EffectWeight::custom(std::string name,
                                  std::function<double(double)> fn) {
  if (!fn) throw validation_error("custom weight has no evaluation function");
  EffectWeight w;
  w.kind = EffectKind::Custom;
  w.name = std::move(name);
  w.fn = std::move(fn);
  return w;
}

double weight_eval(const EffectWeight& w, double u,
                   const PropensityTable& prop) {
  validate_weight(w, prop);
  if (!(u >= 0.0 && u <= 1.0))
    throw validation_error(
        fmt::format("weight argument {:.6g} is outside [0, 1]", u));
  return raw_weight(w, u, prop);
}

double weight_integral(const EffectWeight& w, double a, double b,
                       const PropensityTable& prop) {
  validate_weight(w, prop);
  if (!(a >= 0.0 && b <= 1.0 && a <= b))
    throw validation_error(fmt::format(
        "integration range [{:.6g}, {:.6g}] must lie inside [0, 1]", a, b));
  if (a == b) return 0.0;
  const std::vector<double> breaks = weight_breakpoints(w, prop);
  std::vector<SubInterval> subs;
  append_subintervals(w, prop, a, b, 0, breaks, subs);
  double total = 0.0;
  for (const auto& s : subs) total += (s.b - s.a) * 0.5 * (s.wa + s.wb);
  return total;
}

EffectBounds effect_bounds(const BoundCurve& curve, const EffectWeight& w,
                           const PropensityTable& prop) {
  validate_weight(w, prop);
  check_grid(curve);
  check_coverage(curve, w);

  const std::vector<double> breaks = weight_breakpoints(w, prop);
  std::vector<SubInterval> subs;
  for (std::size_t i = 0; i + 1 < curve.u.size(); ++i)
    append_subintervals(w, prop, curve.u[i], curve.u[i + 1], i, breaks, subs);

  // A grid point with a guard or empty flag poisons the effect only when the
  // weight actually touches it.
  std::vector<bool> active(curve.u.size(), false);
  for (const auto& s : subs) {
    if (s.wa != 0.0 || s.wb != 0.0) {
      active[s.cell] = true;
      active[s.cell + 1] = true;
    }
  }
  for (std::size_t i = 0; i < curve.u.size(); ++i) {
    if (!active[i]) continue;
    if (curve.flags[i] & kFlagDenominatorGuard)
      throw numeric_error(fmt::format(
          "bound curve has a denominator guard at u={:.6g} inside the {} "
          "weight support",
          curve.u[i], w.name));
    if (curve.flags[i] & kFlagEmptyInterval)
      throw numeric_error(fmt::format(
          "bound curve has an empty interval at u={:.6g} inside the {} "
          "weight support",
          curve.u[i], w.name));
  }

  EffectBounds out;
  out.kind = w.kind;
  out.name = w.name;
  double lo_acc = 0.0;
  double hi_acc = 0.0;
  bool lo_unbounded = false;
  bool hi_unbounded = false;

  for (const auto& s : subs) {
    if (s.wa == 0.0 && s.wb == 0.0) continue;
    const std::size_t i = s.cell;
    const double u0 = curve.u[i];
    const double u1 = curve.u[i + 1];
    const double span = u1 - u0;
    const double t0 = (s.a - u0) / span;
    const double t1 = (s.b - u0) / span;
    const double h = s.b - s.a;

    // The curve endpoint columns are interpolated linearly inside the grid
    // interval; an infinite node makes the whole interval unbounded on that
    // side wherever the weight is nonzero.
    const bool lower_finite =
        std::isfinite(curve.lower[i]) && std::isfinite(curve.lower[i + 1]);
    const bool upper_finite =
        std::isfinite(curve.upper[i]) && std::isfinite(curve.upper[i + 1]);
    const bool positive = s.wa > 0.0 || s.wb > 0.0;
    const bool negative = s.wa < 0.0 || s.wb < 0.0;

    if (positive) {
      if (!lower_finite) lo_unbounded = true;
      if (!upper_finite) hi_unbounded = true;
    }
    if (negative) {
      if (!upper_finite) lo_unbounded = true;
      if (!lower_finite) hi_unbounded = true;
    }

    if (lower_finite) {
      const double fa = curve.lower[i] * (1.0 - t0) + curve.lower[i + 1] * t0;
      const double fb = curve.lower[i] * (1.0 - t1) + curve.lower[i + 1] * t1;
      const double v = linear_product_integral(h, fa, fb, s.wa, s.wb);
      if (positive && !negative)
        lo_acc += v;
      else if (negative && !positive)
        hi_acc += v;
    }
    if (upper_finite) {
      const double fa = curve.upper[i] * (1.0 - t0) + curve.upper[i + 1] * t0;
      const double fb = curve.upper[i] * (1.0 - t1) + curve.upper[i + 1] * t1;
      const double v = linear_product_integral(h, fa, fb, s.wa, s.wb);
      if (positive && !negative)
        hi_acc += v;
      else if (negative && !positive)
        lo_acc += v;
    }
  }

  out.lower_unbounded = lo_unbounded;
  out.upper_unbounded = hi_unbounded;
  out.lower = lo_unbounded ? -kInf : lo_acc;
  out.upper = hi_unbounded ? kInf : hi_acc;
  return out;
}

}  // namespace mtebounds
