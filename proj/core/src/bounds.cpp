#include "mtebounds/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "mtebounds/errors.hpp"

namespace mtebounds {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

PointBounds guarded_result() {
  return PointBounds{kNaN, kNaN, kFlagDenominatorGuard};
}

void mark_empty(PointBounds& b) {
  if (b.lower > b.upper) b.flags |= kFlagEmptyInterval;
}

// Both directions collapse to the same identified value when the selection
// contrast vanishes: the observed arms then condition on the same stratum.
PointBounds point_identified(double m0y, double m1y, double m0s) {
  if (m0s < kGuardEps) return guarded_result();
  const double value = (m1y - m0y) / m0s;
  return PointBounds{value, value, kFlagPointIdentified};
}

// Increasing selection: everyone observed untreated is also observed
// treated. The treated-arm moment mixes the always-observed stratum with the
// treated-only stratum, whose mean is bracketed by the outcome support.
PointBounds increasing_bounds(double m0y, double m1y, double m0s, double m1s,
                              const SupportSpec& support, MeanDominance md) {
  const double ds = m1s - m0s;
  if (std::abs(ds) <= kGuardEps) return point_identified(m0y, m1y, m0s);
  if (m0s < kGuardEps) return guarded_result();
  if (md != MeanDominance::None && m1s < kGuardEps) return guarded_result();

  const double r0 = m0y / m0s;
  const double lo = support.y_lower;
  const double hi = support.y_upper;

  // Treated always-observed mean bracket per support case.
  double t_lower = -kInf;
  double t_upper = kInf;
  switch (support.kind) {
    case SupportCase::BelowBounded:
      t_lower = lo;
      t_upper = (m1y - lo * ds) / m0s;
      break;
    case SupportCase::AboveBounded:
      t_lower = (m1y - hi * ds) / m0s;
      t_upper = hi;
      break;
    case SupportCase::TwoSided:
      t_lower = std::max((m1y - hi * ds) / m0s, lo);
      t_upper = std::min((m1y - lo * ds) / m0s, hi);
      break;
    case SupportCase::RealLine:
      break;
  }

  PointBounds out;
  out.lower = std::isinf(t_lower) ? -kInf : t_lower - r0;
  out.upper = std::isinf(t_upper) ? kInf : t_upper - r0;

  // Dominance between the treated-only stratum and the always-observed
  // stratum pins one side at the observable ratio contrast.
  if (md == MeanDominance::GreaterEqual) {
    out.lower = m1y / m1s - r0;
  } else if (md == MeanDominance::LessEqual) {
    out.upper = m1y / m1s - r0;
  }
  mark_empty(out);
  return out;
}

// Decreasing selection: the roles of the arms swap. The untreated moment
// mixes the always-observed stratum with an untreated-only stratum.
PointBounds decreasing_bounds(double m0y, double m1y, double m0s, double m1s,
                              const SupportSpec& support) {
  const double ds = m1s - m0s;
  if (std::abs(ds) <= kGuardEps) return point_identified(m0y, m1y, m0s);
  if (m1s < kGuardEps) return guarded_result();

  const double r1 = m1y / m1s;
  const double neg = -ds;  // positive mass of the untreated-only stratum
  const double lo = support.y_lower;
  const double hi = support.y_upper;

  // Untreated always-observed mean bracket per support case.
  double t_lower = -kInf;
  double t_upper = kInf;
  switch (support.kind) {
    case SupportCase::BelowBounded:
      t_lower = lo;
      t_upper = (m0y - lo * neg) / m1s;
      break;
    case SupportCase::AboveBounded:
      t_lower = (m0y - hi * neg) / m1s;
      t_upper = hi;
      break;
    case SupportCase::TwoSided:
      t_lower = std::max((m0y - hi * neg) / m1s, lo);
      t_upper = std::min((m0y - lo * neg) / m1s, hi);
      break;
    case SupportCase::RealLine:
      break;
  }

  PointBounds out;
  out.lower = std::isinf(t_upper) ? -kInf : r1 - t_upper;
  out.upper = std::isinf(t_lower) ? kInf : r1 - t_lower;
  mark_empty(out);
  return out;
}

}  // namespace

PointBounds mte_oo_point_bounds(double m0y, double m1y, double m0s, double m1s,
                                const SupportSpec& support,
                                const AssumptionProfile& profile) {
  if (profile.dominance != MeanDominance::None &&
      profile.direction != SelectionDirection::Increasing) {
    throw validation_error(
        "mean dominance requires the increasing selection direction");
  }
  switch (profile.direction) {
    case SelectionDirection::Increasing:
      return increasing_bounds(m0y, m1y, m0s, m1s, support, profile.dominance);
    case SelectionDirection::Decreasing:
      return decreasing_bounds(m0y, m1y, m0s, m1s, support);
    case SelectionDirection::Agnostic:
      break;
  }
  // Direction-agnostic: the identified set is the union over both
  // directions, so take the envelope of the directional intervals.
  const PointBounds up =
      increasing_bounds(m0y, m1y, m0s, m1s, support, MeanDominance::None);
  const PointBounds down = decreasing_bounds(m0y, m1y, m0s, m1s, support);
  PointBounds out;
  out.flags = static_cast<std::uint8_t>(up.flags | down.flags);
  if ((up.flags & kFlagDenominatorGuard) ||
      (down.flags & kFlagDenominatorGuard)) {
    out.lower = kNaN;
    out.upper = kNaN;
    out.flags |= kFlagDenominatorGuard;
    return out;
  }
  out.lower = std::min(up.lower, down.lower);
  out.upper = std::max(up.upper, down.upper);
  out.flags &= static_cast<std::uint8_t>(~kFlagEmptyInterval);
  // Point identification only survives if both directions collapse.
  if (!((up.flags & kFlagPointIdentified) && (down.flags & kFlagPointIdentified)))
    out.flags &= static_cast<std::uint8_t>(~kFlagPointIdentified);
  mark_empty(out);
  return out;
}

double untreated_component(const MTRSet& mtr, double u) {
  const double m0s = mtr.selection.eval(0, u);
  if (m0s < kGuardEps) {
    throw numeric_error(fmt::format(
        "untreated selection response {:.3g} at u={:.6g} is below the "
        "denominator guard",
        m0s, u));
  }
  return mtr.outcome.eval(0, u) / m0s;
}

PointBounds treated_component_bounds(const MTRSet& mtr,
                                     const SupportSpec& support, double u) {
  const double m1y = mtr.outcome.eval(1, u);
  const double m0s = mtr.selection.eval(0, u);
  const double m1s = mtr.selection.eval(1, u);
  const double ds = m1s - m0s;
  if (std::abs(ds) <= kGuardEps) {
    if (m0s < kGuardEps) return guarded_result();
    const double value = m1y / m0s;
    return PointBounds{value, value, kFlagPointIdentified};
  }
  if (m0s < kGuardEps) return guarded_result();

  PointBounds out;
  const double lo = support.y_lower;
  const double hi = support.y_upper;
  switch (support.kind) {
    case SupportCase::BelowBounded:
      out.lower = lo;
      out.upper = (m1y - lo * ds) / m0s;
      break;
    case SupportCase::AboveBounded:
      out.lower = (m1y - hi * ds) / m0s;
      out.upper = hi;
      break;
    case SupportCase::TwoSided:
      out.lower = std::max((m1y - hi * ds) / m0s, lo);
      out.upper = std::min((m1y - lo * ds) / m0s, hi);
      break;
    case SupportCase::RealLine:
      break;
  }
  mark_empty(out);
  return out;
}

BoundCurve mte_oo_bounds(const MTRSet& mtr, const SupportSpec& support,
                         const AssumptionProfile& profile,
                         const std::vector<double>& grid) {
  if (grid.empty()) throw validation_error("evaluation grid is empty");
  if (profile.dominance != MeanDominance::None &&
      profile.direction != SelectionDirection::Increasing) {
    throw validation_error(
        "mean dominance requires the increasing selection direction");
  }
  for (double u : grid) {
    if (!(u >= 0.0 && u <= 1.0))
      throw validation_error(
          fmt::format("grid point {:.6g} is outside [0, 1]", u));
  }
  if (profile.direction == SelectionDirection::Increasing) {
    for (double u : grid) {
      const double ds = mtr.selection.eval(1, u) - mtr.selection.eval(0, u);
      if (ds < -kGuardEps) {
        throw validation_error(fmt::format(
            "selection contrast {:.3g} at u={:.6g} contradicts the "
            "increasing direction",
            ds, u));
      }
    }
  }

  BoundCurve curve;
  curve.profile = profile;
  curve.support = support;
  curve.u = grid;
  curve.lower.reserve(grid.size());
  curve.upper.reserve(grid.size());
  curve.flags.reserve(grid.size());
  for (double u : grid) {
    const PointBounds b = mte_oo_point_bounds(
        mtr.outcome.eval(0, u), mtr.outcome.eval(1, u),
        mtr.selection.eval(0, u), mtr.selection.eval(1, u), support, profile);
    curve.lower.push_back(b.lower);
    curve.upper.push_back(b.upper);
    curve.flags.push_back(b.flags);
  }
  return curve;
}

BoundCurve m1_no_bounds(const MTRSet& mtr, const SupportSpec& support,
                        MeanDominance md, const std::vector<double>& grid) {
  if (grid.empty()) throw validation_error("evaluation grid is empty");
  if (md == MeanDominance::LessEqual) {
    throw validation_error(
        "the treated-only stratum bracket supports dominance none or ge");
  }
  for (double u : grid) {
    if (!(u >= 0.0 && u <= 1.0))
      throw validation_error(
          fmt::format("grid point {:.6g} is outside [0, 1]", u));
  }

  BoundCurve curve;
  curve.profile =
      AssumptionProfile{SelectionDirection::Increasing, md};
  curve.support = support;
  curve.u = grid;
  const double lo = support.y_lower;
  const double hi = support.y_upper;
  for (double u : grid) {
    const double m1y = mtr.outcome.eval(1, u);
    const double m0s = mtr.selection.eval(0, u);
    const double m1s = mtr.selection.eval(1, u);
    const double ds = m1s - m0s;
    if (ds <= kGuardEps || (md == MeanDominance::GreaterEqual &&
                            m1s < kGuardEps)) {
      curve.lower.push_back(kNaN);
      curve.upper.push_back(kNaN);
      curve.flags.push_back(kFlagDenominatorGuard);
      continue;
    }
    double b_lower = -kInf;
    double b_upper = kInf;
    switch (support.kind) {
      case SupportCase::BelowBounded:
        b_lower = lo;
        b_upper = (m1y - lo * m0s) / ds;
        break;
      case SupportCase::AboveBounded:
        b_lower = (m1y - hi * m0s) / ds;
        b_upper = hi;
        break;
      case SupportCase::TwoSided:
        b_lower = std::max((m1y - hi * m0s) / ds, lo);
        b_upper = std::min((m1y - lo * m0s) / ds, hi);
        break;
      case SupportCase::RealLine:
        break;
    }
    std::uint8_t flags = 0;
    if (md == MeanDominance::GreaterEqual) {
      const double cap = m1y / m1s;
      if (std::isinf(b_upper))
        b_upper = cap;
      else
        b_upper = std::min(b_upper, cap);
    }
    if (b_lower > b_upper) flags |= kFlagEmptyInterval;
    curve.lower.push_back(b_lower);
    curve.upper.push_back(b_upper);
    curve.flags.push_back(flags);
  }
  return curve;
}

}  // namespace mtebounds
