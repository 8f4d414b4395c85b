#include "mtebounds/witness.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "mtebounds/errors.hpp"
#include "mtebounds/rng.hpp"

namespace mtebounds {

namespace {

constexpr double kFeasTol = 1e-9;

bool in_support(double y, const SupportSpec& support) {
  return y >= support.y_lower - kFeasTol && y <= support.y_upper + kFeasTol;
}

// Dirac mass, or a two-point mass on the support endpoints with the same
// mean. The two-point variant needs a bounded support.
std::vector<SegmentMass> segment_law(double mean, const SupportSpec& support,
                                     WitnessSupportMode mode) {
  if (mode == WitnessSupportMode::Interval)
    return {SegmentMass{mean, 1.0}};
  const double lo = support.y_lower;
  const double hi = support.y_upper;
  const double p_hi = std::clamp((mean - lo) / (hi - lo), 0.0, 1.0);
  return {SegmentMass{lo, 1.0 - p_hi}, SegmentMass{hi, p_hi}};
}

double law_mean(const std::vector<SegmentMass>& law) {
  double m = 0.0;
  for (const auto& pm : law) m += pm.value * pm.prob;
  return m;
}

double draw_from(const std::vector<SegmentMass>& law, CounterRng& rng) {
  if (law.size() == 1) return law.front().value;
  double w = rng.uniform01();
  for (const auto& pm : law) {
    if (w < pm.prob) return pm.value;
    w -= pm.prob;
  }
  return law.back().value;
}

}  // namespace

WitnessDistribution build_witness(const MTRSet& mtr, double u_bar,
                                  double delta, const SupportSpec& support,
                                  MeanDominance dominance,
                                  WitnessSupportMode mode) {
  if (!(u_bar >= 0.0 && u_bar <= 1.0))
    throw validation_error(
        fmt::format("u_bar={:.6g} is outside [0, 1]", u_bar));
  if (!std::isfinite(delta))
    throw validation_error("delta must be finite");
  if (mode == WitnessSupportMode::TwoPoint &&
      support.kind != SupportCase::TwoSided)
    throw validation_error(
        "the two-point witness needs a bounded outcome support");

  WitnessDistribution w;
  w.u_bar = u_bar;
  w.delta = delta;
  w.support = support;
  w.dominance = dominance;
  w.mode = mode;

  w.q0 = mtr.selection.average(0);
  w.q1 = mtr.selection.average(1);
  if (!(w.q0 > 0.0 && w.q1 < 1.0 && w.q0 < w.q1)) {
    throw validation_error(fmt::format(
        "average selection probabilities q0={:.6g}, q1={:.6g} must satisfy "
        "0 < q0 < q1 < 1",
        w.q0, w.q1));
  }

  w.f_q0 = mtr.selection.eval(0, u_bar);
  w.f_q1 = mtr.selection.eval(1, u_bar);
  const double ds = w.f_q1 - w.f_q0;
  if (w.f_q0 < kGuardEps)
    throw validation_error(fmt::format(
        "untreated selection {:.6g} at u_bar leaves no always-observed "
        "stratum",
        w.f_q0));
  if (ds <= kGuardEps)
    throw validation_error(fmt::format(
        "selection contrast {:.6g} at u_bar is not positive", ds));
  if (w.f_q1 > 1.0 + kFeasTol)
    throw validation_error(fmt::format(
        "treated selection {:.6g} at u_bar exceeds one", w.f_q1));
  w.f_q1 = std::min(w.f_q1, 1.0);

  const double m0y = mtr.outcome.eval(0, u_bar);
  const double m1y = mtr.outcome.eval(1, u_bar);
  w.r0 = m0y / w.f_q0;
  w.alpha = delta + w.r0;
  w.gamma = (m1y - w.alpha * w.f_q0) / ds;

  if (!in_support(w.r0, support))
    throw validation_error(fmt::format(
        "untreated always-observed mean {:.6g} falls outside the outcome "
        "support; the curves are infeasible for this support",
        w.r0));
  if (!in_support(w.alpha, support) || !in_support(w.gamma, support)) {
    throw validation_error(fmt::format(
        "delta={:.6g} implies treated means alpha={:.6g}, gamma={:.6g} "
        "outside the outcome support; delta is outside the identified set",
        delta, w.alpha, w.gamma));
  }
  if (dominance == MeanDominance::GreaterEqual &&
      w.alpha < w.gamma - kFeasTol) {
    throw validation_error(fmt::format(
        "delta={:.6g} violates dominance: alpha={:.6g} < gamma={:.6g}", delta,
        w.alpha, w.gamma));
  }
  if (dominance == MeanDominance::LessEqual && w.gamma < w.alpha - kFeasTol) {
    throw validation_error(fmt::format(
        "delta={:.6g} violates dominance: gamma={:.6g} < alpha={:.6g}", delta,
        w.gamma, w.alpha));
  }

  // Fillers on segments that never contribute to an observed moment reuse
  // in-support levels that are already validated.
  w.segments[0].y0 = segment_law(w.r0, support, mode);
  w.segments[0].y1 = segment_law(w.alpha, support, mode);
  w.segments[1].y0 = segment_law(w.r0, support, mode);
  w.segments[1].y1 = segment_law(w.gamma, support, mode);
  w.segments[2].y0 = segment_law(w.r0, support, mode);
  w.segments[2].y1 = segment_law(w.alpha, support, mode);
  if (mode == WitnessSupportMode::TwoPoint) {
    // The unconstrained fillers take the symmetric two-point law instead.
    const double mid = 0.5 * (support.y_lower + support.y_upper);
    w.segments[1].y0 = segment_law(mid, support, mode);
    w.segments[2].y0 = segment_law(mid, support, mode);
    w.segments[2].y1 = segment_law(mid, support, mode);
  }
  return w;
}

WitnessCheck verify_witness(const WitnessDistribution& w, const MTRSet& mtr,
                            std::size_t n_draws, std::uint64_t seed) {
  if (n_draws < 10000)
    throw validation_error(
        "witness verification needs at least 1e4 simulation draws");

  const double m0y = mtr.outcome.eval(0, w.u_bar);
  const double m1y = mtr.outcome.eval(1, w.u_bar);
  const double m0s = mtr.selection.eval(0, w.u_bar);
  const double m1s = mtr.selection.eval(1, w.u_bar);

  // Exact moments from the segment laws. Segment probabilities come from
  // the piecewise linear CDF: F(q0) = f_q0, F(q1) = f_q1.
  const double p_seg0 = w.f_q0;
  const double p_seg1 = w.f_q1 - w.f_q0;
  const double mean_y0_oo = law_mean(w.segments[0].y0);
  const double mean_y1_oo = law_mean(w.segments[0].y1);
  const double mean_y1_no = law_mean(w.segments[1].y1);

  struct Exact {
    std::string name;
    double target;
    double analytic;
  };
  const std::vector<Exact> exact = {
      {"P[S0=1 | u]", m0s, p_seg0},
      {"P[S1=1 | u]", m1s, p_seg0 + p_seg1},
      {"E[S0 Y0 | u]", m0y, p_seg0 * mean_y0_oo},
      {"E[S1 Y1 | u]", m1y, p_seg0 * mean_y1_oo + p_seg1 * mean_y1_no},
      {"E[Y1 - Y0 | OO, u]", w.delta, mean_y1_oo - mean_y0_oo},
  };

  WitnessCheck check;
  for (const auto& ex : exact)
    check.max_analytic_residual = std::max(check.max_analytic_residual,
                                           std::abs(ex.analytic - ex.target));
  if (check.max_analytic_residual > 1e-10) {
    throw numeric_error(fmt::format(
        "witness arithmetic is off by {:.3g}; the construction has a bug",
        check.max_analytic_residual));
  }

  // Simulation cross-check: draw V from the piecewise linear CDF, then the
  // outcomes from their segment laws.
  CounterRng rng(seed, 0);
  double s0 = 0.0, s1 = 0.0, s0y0 = 0.0, s1y1 = 0.0;
  double oo_count = 0.0, oo_diff = 0.0;
  double ss_s0y0 = 0.0, ss_s1y1 = 0.0, ss_diff = 0.0;
  const double n = static_cast<double>(n_draws);

  for (std::size_t i = 0; i < n_draws; ++i) {
    const double t = rng.uniform01();
    int seg;
    if (t < w.f_q0)
      seg = 0;
    else if (t < w.f_q1)
      seg = 1;
    else
      seg = 2;
    const double y0 = draw_from(w.segments[static_cast<std::size_t>(seg)].y0,
                                rng);
    const double y1 = draw_from(w.segments[static_cast<std::size_t>(seg)].y1,
                                rng);
    if (seg == 0) {
      s0 += 1.0;
      s0y0 += y0;
      ss_s0y0 += y0 * y0;
      oo_count += 1.0;
      oo_diff += y1 - y0;
      ss_diff += (y1 - y0) * (y1 - y0);
    }
    if (seg <= 1) {
      s1 += 1.0;
      s1y1 += y1;
      ss_s1y1 += y1 * y1;
    }
  }

  const auto push_line = [&check](const std::string& name, double target,
                                  double analytic, double sim, double se) {
    WitnessCheckLine line;
    line.name = name;
    line.target = target;
    line.analytic = analytic;
    line.simulated = sim;
    line.z = se > 0.0 ? (sim - target) / se : 0.0;
    check.lines.push_back(line);
  };

  // Binomial and mean standard errors; the indicator sums are Bernoulli.
  const double ph0 = s0 / n;
  const double ph1 = s1 / n;
  push_line(exact[0].name, m0s, p_seg0, ph0,
            std::sqrt(std::max(ph0 * (1.0 - ph0), 1e-12) / n));
  push_line(exact[1].name, m1s, p_seg0 + p_seg1, ph1,
            std::sqrt(std::max(ph1 * (1.0 - ph1), 1e-12) / n));

  const double mean_s0y0 = s0y0 / n;
  const double var_s0y0 =
      std::max(ss_s0y0 / n - mean_s0y0 * mean_s0y0, 1e-12);
  push_line(exact[2].name, m0y, p_seg0 * mean_y0_oo, mean_s0y0,
            std::sqrt(var_s0y0 / n));

  const double mean_s1y1 = s1y1 / n;
  const double var_s1y1 =
      std::max(ss_s1y1 / n - mean_s1y1 * mean_s1y1, 1e-12);
  push_line(exact[3].name, m1y, p_seg0 * mean_y1_oo + p_seg1 * mean_y1_no,
            mean_s1y1, std::sqrt(var_s1y1 / n));

  if (oo_count > 1.0) {
    const double mean_diff = oo_diff / oo_count;
    const double var_diff =
        std::max(ss_diff / oo_count - mean_diff * mean_diff, 1e-12);
    push_line(exact[4].name, w.delta, mean_y1_oo - mean_y0_oo, mean_diff,
              std::sqrt(var_diff / oo_count));
  }
  return check;
}

}  // namespace mtebounds
