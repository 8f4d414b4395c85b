#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mtebounds/bounds.hpp"
#include "mtebounds/errors.hpp"
#include "mtebounds/witness.hpp"
#include "oracles.hpp"

using namespace mtebounds;

namespace {

MTRSet table_model() {
  MTRSet m;
  m.outcome.L = 2;
  m.outcome.theta0 = {2.96, 5.74};
  m.outcome.theta1 = {3.00, 8.39};
  m.outcome.variable = Variable::Outcome;
  m.selection.L = 2;
  m.selection.theta0 = {0.46, 0.66};
  m.selection.theta1 = {0.46, 0.89};
  m.selection.variable = Variable::Selection;
  return m;
}

double segment_mean(const std::vector<SegmentMass>& law) {
  double mean = 0.0;
  for (const auto& mass : law) mean += mass.value * mass.prob;
  return mean;
}

double segment_prob(const std::vector<SegmentMass>& law) {
  double p = 0.0;
  for (const auto& mass : law) p += mass.prob;
  return p;
}

}  // namespace

TEST_CASE("witness geometry at the wage-model midpoint") {
  const MTRSet m = table_model();
  const SupportSpec support = SupportSpec::below_bounded(0.0);
  const WitnessDistribution w =
      build_witness(m, 0.5, 1.0, support, MeanDominance::None,
                    WitnessSupportMode::Interval);

  // Average selection probabilities over [0, u_bar]: the treated threshold
  // integrates 0.46 + 0.43 u, the untreated one 0.46 + 0.20 u.
  CHECK(w.q0 == doctest::Approx(0.56).epsilon(1e-13));
  CHECK(w.q1 == doctest::Approx(0.675).epsilon(1e-13));
  // CDF knots reproduce the pointwise selection curves at u_bar.
  CHECK(w.f_q0 == doctest::Approx(0.56).epsilon(1e-13));
  CHECK(w.f_q1 == doctest::Approx(0.675).epsilon(1e-13));
  // Always-observed untreated mean: m0Y(0.5) / m0S(0.5) = 4.35 / 0.56.
  CHECK(w.r0 == doctest::Approx(7.767857142857143).epsilon(1e-13));
  CHECK(w.alpha == doctest::Approx(8.767857142857143).epsilon(1e-13));
  // Treated-only mean: (m1Y - f_q0 * alpha) / (f_q1 - f_q0) at u_bar.
  CHECK(w.gamma == doctest::Approx(6.826086956521739).epsilon(1e-12));
  CHECK(w.u_bar == 0.5);
  CHECK(w.delta == 1.0);

  SUBCASE("segment laws are proper distributions on the support") {
    for (const auto& seg : w.segments) {
      CHECK(segment_prob(seg.y0) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(segment_prob(seg.y1) == doctest::Approx(1.0).epsilon(1e-12));
      for (const auto& mass : seg.y0) {
        CHECK(mass.value >= support.y_lower - 1e-12);
        CHECK(mass.prob >= 0.0);
      }
      for (const auto& mass : seg.y1) CHECK(mass.value >= -1e-12);
    }
    // Always-observed segment carries the stated means.
    CHECK(segment_mean(w.segments[0].y0) == doctest::Approx(w.r0));
    CHECK(segment_mean(w.segments[0].y1) == doctest::Approx(w.alpha));
    CHECK(segment_mean(w.segments[1].y1) == doctest::Approx(w.gamma));
  }

  SUBCASE("analytic residual is exact and simulation agrees") {
    const WitnessCheck check = verify_witness(w, m, 100000, 4242);
    CHECK(check.max_analytic_residual <= 1e-10);
    REQUIRE(!check.lines.empty());
    for (const auto& line : check.lines) {
      CHECK(std::abs(line.analytic - line.target) <= 1e-10);
      CHECK(std::abs(line.z) <= 4.0);
    }
  }

  SUBCASE("simulation is reproducible") {
    const WitnessCheck a = verify_witness(w, m, 20000, 7);
    const WitnessCheck b = verify_witness(w, m, 20000, 7);
    REQUIRE(a.lines.size() == b.lines.size());
    for (std::size_t i = 0; i < a.lines.size(); ++i)
      CHECK(a.lines[i].simulated == b.lines[i].simulated);
  }
}

TEST_CASE("witness realizes every interior effect value") {
  const MTRSet m = table_model();
  const SupportSpec support = SupportSpec::below_bounded(0.0);
  AssumptionProfile profile;
  profile.direction = SelectionDirection::Increasing;
  profile.dominance = MeanDominance::None;
  const double u_bar = 0.5;
  const BoundCurve curve = mte_oo_bounds(m, support, profile, {u_bar});
  for (double t : {0.05, 0.5, 0.95}) {
    const double delta = curve.lower[0] * (1.0 - t) + curve.upper[0] * t;
    const WitnessDistribution w =
        build_witness(m, u_bar, delta, support, MeanDominance::None,
                      WitnessSupportMode::Interval);
    const WitnessCheck check = verify_witness(w, m, 10000, 99);
    CHECK(check.max_analytic_residual <= 1e-10);
    CHECK(w.alpha - w.r0 == doctest::Approx(delta).epsilon(1e-12));
  }
}

TEST_CASE("dominance constrains which deltas are witnessable") {
  const MTRSet m = table_model();
  const SupportSpec support = SupportSpec::below_bounded(0.0);
  AssumptionProfile profile;
  profile.direction = SelectionDirection::Increasing;
  profile.dominance = MeanDominance::GreaterEqual;
  const double u_bar = 0.75;
  const BoundCurve curve = mte_oo_bounds(m, support, profile, {u_bar});

  SUBCASE("midpoint passes with alpha above gamma") {
    const double delta = 0.5 * (curve.lower[0] + curve.upper[0]);
    const WitnessDistribution w =
        build_witness(m, u_bar, delta, support, MeanDominance::GreaterEqual,
                      WitnessSupportMode::Interval);
    CHECK(w.alpha >= w.gamma - 1e-12);
    const WitnessCheck check = verify_witness(w, m, 10000, 31);
    CHECK(check.max_analytic_residual <= 1e-10);
  }

  SUBCASE("a delta below the dominance-tightened floor is rejected") {
    AssumptionProfile loose = profile;
    loose.dominance = MeanDominance::None;
    const BoundCurve wide = mte_oo_bounds(m, support, loose, {u_bar});
    // Strictly inside the no-dominance interval, strictly below the
    // dominance-tightened lower bound.
    const double delta = 0.5 * (wide.lower[0] + curve.lower[0]);
    REQUIRE(delta < curve.lower[0]);
    REQUIRE(delta > wide.lower[0]);
    CHECK_THROWS_AS(
        build_witness(m, u_bar, delta, support, MeanDominance::GreaterEqual,
                      WitnessSupportMode::Interval),
        validation_error);
    // The same delta is fine without the dominance restriction.
    CHECK_NOTHROW(build_witness(m, u_bar, delta, support,
                                MeanDominance::None,
                                WitnessSupportMode::Interval));
  }
}

TEST_CASE("deltas outside the identified interval are rejected") {
  const MTRSet m = table_model();
  const SupportSpec support = SupportSpec::below_bounded(0.0);
  AssumptionProfile profile;
  profile.direction = SelectionDirection::Increasing;
  profile.dominance = MeanDominance::None;
  const BoundCurve curve = mte_oo_bounds(m, support, profile, {0.5});
  CHECK_THROWS_AS(
      build_witness(m, 0.5, curve.lower[0] - 0.5, support,
                    MeanDominance::None, WitnessSupportMode::Interval),
      validation_error);
  CHECK_THROWS_AS(
      build_witness(m, 0.5, curve.upper[0] + 0.5, support,
                    MeanDominance::None, WitnessSupportMode::Interval),
      validation_error);
}

TEST_CASE("degenerate selection geometry is rejected") {
  const SupportSpec support = SupportSpec::below_bounded(0.0);

  SUBCASE("no selection contrast at u_bar") {
    MTRSet flat = table_model();
    flat.selection.theta1 = flat.selection.theta0;
    CHECK_THROWS_AS(build_witness(flat, 0.5, 0.1, support,
                                  MeanDominance::None,
                                  WitnessSupportMode::Interval),
                    validation_error);
  }

  SUBCASE("saturated untreated selection leaves no room for q1") {
    MTRSet saturated = table_model();
    saturated.selection.theta0 = {1.0, 1.0};
    saturated.selection.theta1 = {1.0, 1.0};
    CHECK_THROWS_AS(build_witness(saturated, 0.5, 0.1, support,
                                  MeanDominance::None,
                                  WitnessSupportMode::Interval),
                    validation_error);
  }

  SUBCASE("u_bar outside the unit interval") {
    CHECK_THROWS_AS(build_witness(table_model(), 1.5, 0.1, support,
                                  MeanDominance::None,
                                  WitnessSupportMode::Interval),
                    validation_error);
  }
}

TEST_CASE("two-point mode spreads mass onto the support endpoints") {
  MTRSet m = table_model();
  // Rescale the outcome curves into a comfortably interior range of [0, 30].
  const SupportSpec support = SupportSpec::two_sided(0.0, 30.0);
  const WitnessDistribution w =
      build_witness(m, 0.5, 1.0, support, MeanDominance::None,
                    WitnessSupportMode::TwoPoint);
  bool saw_two_masses = false;
  for (const auto& seg : w.segments) {
    for (const auto& law : {seg.y0, seg.y1}) {
      CHECK(segment_prob(law) == doctest::Approx(1.0).epsilon(1e-12));
      for (const auto& mass : law) {
        const bool at_edge = mass.value == doctest::Approx(0.0).scale(1.0) ||
                             mass.value == doctest::Approx(30.0);
        CHECK(at_edge);
      }
      if (law.size() == 2) saw_two_masses = true;
    }
  }
  CHECK(saw_two_masses);
  const WitnessCheck check = verify_witness(w, m, 20000, 55);
  CHECK(check.max_analytic_residual <= 1e-10);

  SUBCASE("two-point mode needs a two-sided support") {
    CHECK_THROWS_AS(
        build_witness(m, 0.5, 1.0, SupportSpec::below_bounded(0.0),
                      MeanDominance::None, WitnessSupportMode::TwoPoint),
        validation_error);
  }
}

TEST_CASE("random feasible models admit witnesses at interior deltas") {
  std::mt19937_64 gen(61);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const SupportSpec support = SupportSpec::below_bounded(0.0);
  AssumptionProfile profile;
  profile.direction = SelectionDirection::Increasing;
  profile.dominance = MeanDominance::None;

  int built = 0;
  for (int rep = 0; rep < 40; ++rep) {
    MTRSet m;
    m.selection.L = 2;
    m.selection.variable = Variable::Selection;
    const double base = 0.2 + 0.5 * u01(gen);
    const double gap = 0.05 + 0.2 * u01(gen);
    m.selection.theta0 = {base, std::min(base + 0.3 * u01(gen), 0.95)};
    m.selection.theta1 = {m.selection.theta0[0] + gap,
                          std::min(m.selection.theta0[1] + gap, 0.98)};
    m.outcome.L = 2;
    m.outcome.variable = Variable::Outcome;
    m.outcome.theta0 = {(1.0 + 8.0 * u01(gen)) * m.selection.theta0[0],
                        (1.0 + 8.0 * u01(gen)) * m.selection.theta0[1]};
    m.outcome.theta1 = {(1.0 + 8.0 * u01(gen)) * m.selection.theta1[0],
                        (1.0 + 8.0 * u01(gen)) * m.selection.theta1[1]};

    const double u_bar = 0.3 + 0.4 * u01(gen);
    const BoundCurve curve = mte_oo_bounds(m, support, profile, {u_bar});
    if (curve.flags[0] != 0) continue;
    const double delta = 0.5 * (curve.lower[0] + curve.upper[0]);
    const WitnessDistribution w =
        build_witness(m, u_bar, delta, support, MeanDominance::None,
                      WitnessSupportMode::Interval);
    const WitnessCheck check =
        verify_witness(w, m, 10000, 1000 + static_cast<std::uint64_t>(rep));
    CHECK(check.max_analytic_residual <= 1e-10);
    for (const auto& line : check.lines) CHECK(std::abs(line.z) <= 5.0);
    ++built;
  }
  // The generator keeps the selection contrast positive, so nearly every
  // draw should produce a usable geometry.
  CHECK(built >= 30);
}
