#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mtebounds/bernstein.hpp"
#include "mtebounds/bounds.hpp"
#include "mtebounds/errors.hpp"
#include "mtebounds/outer_set.hpp"
#include "mtebounds/sample.hpp"
#include "oracles.hpp"
#include "simplex.hpp"

using namespace mtebounds;

namespace {

PropensityTable two_point_table() {
  PropensityTable prop;
  prop.entries = {{0, 0.047, 0.395}, {1, 0.737, 0.605}};
  return prop;
}

MTRSet table_model() {
  MTRSet m;
  m.outcome.L = 2;
  m.outcome.theta0 = {2.96, 5.74};
  m.outcome.theta1 = {3.00, 8.39};
  m.outcome.variable = Variable::Outcome;
  m.outcome.feasible_set = FeasibleSet::Nonnegative;
  m.selection.L = 2;
  m.selection.theta0 = {0.46, 0.66};
  m.selection.theta1 = {0.46, 0.89};
  m.selection.variable = Variable::Selection;
  m.selection.feasible_set = FeasibleSet::UnitBoxIncreasing;
  return m;
}

// Indicator moment per (d, z) cell, beta left for the model to fill in.
std::vector<IVLikeSpec> cell_family() {
  std::vector<IVLikeSpec> family;
  for (int d : {0, 1}) {
    for (int z : {0, 1}) {
      IVLikeSpec spec;
      spec.name = "cell(d=" + std::to_string(d) + ",z=" + std::to_string(z) +
                  ")";
      spec.g = [d, z](int dd, int zz) {
        return (dd == d && zz == z) ? 1.0 : 0.0;
      };
      family.push_back(std::move(spec));
    }
  }
  return family;
}

}  // namespace

TEST_CASE("simplex solves small equality-form programs") {
  using namespace mtebounds::lp;

  SUBCASE("single row, free slack") {
    LinearProgram p;
    p.A.resize(1, 3);
    p.A << 1.0, 1.0, 1.0;
    p.b.resize(1);
    p.b << 1.0;
    p.c.resize(3);
    p.c << -1.0, -2.0, 0.0;
    p.lo = Eigen::VectorXd::Zero(3);
    p.hi = Eigen::VectorXd::Constant(3, kInf);
    const LpSolution sol = solve_lp(p);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(sol.x[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sol.max_violation <= 1e-10);
    CHECK(sol.duality_gap <= 1e-9);
  }

  SUBCASE("optimum rests on an upper bound") {
    LinearProgram p;
    p.A.resize(1, 2);
    p.A << 1.0, 1.0;
    p.b.resize(1);
    p.b << 1.2;
    p.c.resize(2);
    p.c << -1.0, -0.5;
    p.lo = Eigen::VectorXd::Zero(2);
    p.hi = Eigen::VectorXd::Ones(2);
    const LpSolution sol = solve_lp(p);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(-1.1).epsilon(1e-12));
    CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sol.x[1] == doctest::Approx(0.2).epsilon(1e-12));
  }

  SUBCASE("infeasible box") {
    LinearProgram p;
    p.A.resize(1, 2);
    p.A << 1.0, 1.0;
    p.b.resize(1);
    p.b << 3.0;
    p.c = Eigen::VectorXd::Zero(2);
    p.lo = Eigen::VectorXd::Zero(2);
    p.hi = Eigen::VectorXd::Ones(2);
    CHECK(solve_lp(p).status == LpStatus::Infeasible);
  }

  SUBCASE("unbounded ray") {
    LinearProgram p;
    p.A.resize(1, 2);
    p.A << 1.0, -1.0;
    p.b.resize(1);
    p.b << 0.0;
    p.c.resize(2);
    p.c << -1.0, 0.0;
    p.lo = Eigen::VectorXd::Zero(2);
    p.hi = Eigen::VectorXd::Constant(2, kInf);
    CHECK(solve_lp(p).status == LpStatus::Unbounded);
  }

  SUBCASE("degenerate vertex") {
    LinearProgram p;
    p.A.resize(2, 3);
    p.A << 1.0, 1.0, 0.0, 0.0, 1.0, 1.0;
    p.b.resize(2);
    p.b << 1.0, 1.0;
    p.c.resize(3);
    p.c << 1.0, 0.0, 1.0;
    p.lo = Eigen::VectorXd::Zero(3);
    p.hi = Eigen::VectorXd::Constant(3, kInf);
    const LpSolution sol = solve_lp(p);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(sol.x[1] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("simplex on random feasible programs") {
  using namespace mtebounds::lp;
  std::mt19937_64 gen(37);
  std::uniform_real_distribution<double> ua(-1.0, 1.0);
  std::uniform_real_distribution<double> ux(0.1, 1.9);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 6, m = 3;
    LinearProgram p;
    p.A.resize(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) p.A(i, j) = ua(gen);
    Eigen::VectorXd x0(n);
    for (int j = 0; j < n; ++j) x0[j] = ux(gen);
    p.b = p.A * x0;
    p.c.resize(n);
    for (int j = 0; j < n; ++j) p.c[j] = ua(gen);
    p.lo = Eigen::VectorXd::Zero(n);
    p.hi = Eigen::VectorXd::Constant(n, 2.0);
    const LpSolution sol = solve_lp(p);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective <= p.c.dot(x0) + 1e-9);
    CHECK(sol.max_violation <= 1e-8);
    CHECK(sol.duality_gap <= 1e-7);
    for (int j = 0; j < n; ++j) {
      CHECK(sol.x[j] >= -1e-9);
      CHECK(sol.x[j] <= 2.0 + 1e-9);
    }
  }
}

TEST_CASE("saturated moment family enumerates observed cells") {
  Sample s;
  s.support_z = {0, 1};
  ObservationRecord r;
  r.y = 2.0; r.s = 1; r.d = 0; r.z = 0; r.w = 1.0;
  s.records.push_back(r);
  r.y = 0.0; r.s = 0; r.d = 0; r.z = 0; r.w = 1.0;
  s.records.push_back(r);
  r.y = 3.0; r.s = 1; r.d = 1; r.z = 1; r.w = 2.0;
  s.records.push_back(r);

  const auto outcome_family = saturated_ivlike_family(s, Variable::Outcome);
  REQUIRE(outcome_family.size() == 2);
  CHECK(outcome_family[0].name == "cell(d=0,z=0)");
  CHECK(outcome_family[0].beta == doctest::Approx(2.0 / 4.0));
  CHECK(outcome_family[1].name == "cell(d=1,z=1)");
  CHECK(outcome_family[1].beta == doctest::Approx(6.0 / 4.0));
  CHECK(outcome_family[0].g(0, 0) == 1.0);
  CHECK(outcome_family[0].g(0, 1) == 0.0);
  CHECK(outcome_family[0].g(1, 0) == 0.0);

  const auto sel_family = saturated_ivlike_family(s, Variable::Selection);
  CHECK(sel_family[0].beta == doctest::Approx(1.0 / 4.0));
  CHECK(sel_family[1].beta == doctest::Approx(2.0 / 4.0));
}

TEST_CASE("gamma rows integrate the basis over the selection regions") {
  const PropensityTable prop = two_point_table();
  auto family = cell_family();

  SUBCASE("against the closed form for degree one") {
    // Basis (1-u, u): the treated arm integrates over [0, p], the untreated
    // arm over (p, 1].
    const Eigen::RowVectorXd row00 = build_gamma_row(family[0], prop, 2);
    const double p = 0.047, m = 0.395;
    CHECK(row00[0] == doctest::Approx(m * (0.5 - (p - p * p / 2))).epsilon(1e-13));
    CHECK(row00[1] == doctest::Approx(m * (0.5 - p * p / 2)).epsilon(1e-13));
    CHECK(row00[2] == 0.0);
    CHECK(row00[3] == 0.0);

    const Eigen::RowVectorXd row11 = build_gamma_row(family[3], prop, 2);
    const double q = 0.737, mm = 0.605;
    CHECK(row11[0] == 0.0);
    CHECK(row11[2] == doctest::Approx(mm * (q - q * q / 2)).epsilon(1e-13));
    CHECK(row11[3] == doctest::Approx(mm * (q * q / 2)).epsilon(1e-13));
  }

  SUBCASE("against quadrature for degree three") {
    const int L = 4;
    const Eigen::RowVectorXd row = build_gamma_row(family[1], prop, L);
    // Cell (d=0, z=1): mass 0.605, integrate each basis over (0.737, 1].
    for (int l = 0; l < L; ++l) {
      std::vector<double> e(L, 0.0);
      e[static_cast<std::size_t>(l)] = 1.0;
      const double want =
          0.605 * oracle::simpson(
                      [&](double u) { return oracle::bernstein_direct(e, u); },
                      0.737, 1.0);
      CHECK(row[l] == doctest::Approx(want).epsilon(1e-9));
      CHECK(row[L + l] == 0.0);
    }
  }

  SUBCASE("row applied to coefficients matches the cell-mean identity") {
    const MTRSet model = table_model();
    Eigen::VectorXd stacked(4);
    stacked << 2.96, 5.74, 3.00, 8.39;
    // beta(cell d=0, z) = mass * (1 - p) * average of m0 over (p, 1].
    const Eigen::RowVectorXd row = build_gamma_row(family[1], prop, 2);
    const double want =
        0.605 * (1.0 - 0.737) *
        bernstein_cell_mean(model.outcome.theta0, 0.737, 0);
    CHECK(row.dot(stacked) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("model-implied betas anchor the family at a fitted curve") {
  const PropensityTable prop = two_point_table();
  const MTRSet model = table_model();
  auto family = model_implied_ivlike_family(cell_family(),
                                            model.outcome, prop);
  REQUIRE(family.size() == 4);
  // Spot value: cell (d=1, z=1) is mass * p * average of m1 over [0, p].
  CHECK(family[3].beta ==
        doctest::Approx(0.605 * 0.737 *
                        bernstein_cell_mean(model.outcome.theta1, 0.737, 1))
            .epsilon(1e-12));
}

TEST_CASE("saturated degree-one polytope pins down the fitted model") {
  const PropensityTable prop = two_point_table();
  const MTRSet model = table_model();
  const auto out_family =
      model_implied_ivlike_family(cell_family(), model.outcome, prop);
  const auto sel_family =
      model_implied_ivlike_family(cell_family(), model.selection, prop);
  const MTRPolytope out_poly =
      build_polytope(out_family, prop, 2, FeasibleSet::Nonnegative);
  const MTRPolytope sel_poly =
      build_polytope(sel_family, prop, 2, FeasibleSet::UnitBoxIncreasing);
  CHECK(out_poly.eq_names.size() == 4);

  for (double u : {0.0, 0.3, 0.7, 1.0}) {
    const ExtremeResult m0 = extremize_value(out_poly, 0, u);
    CHECK(m0.min_value == doctest::Approx(model.outcome.eval(0, u)).epsilon(1e-8));
    CHECK(m0.max_value == doctest::Approx(model.outcome.eval(0, u)).epsilon(1e-8));
    const ExtremeResult ds = extremize_contrast(sel_poly, u);
    const double want =
        model.selection.eval(1, u) - model.selection.eval(0, u);
    CHECK(ds.min_value == doctest::Approx(want).scale(1.0).epsilon(1e-8));
    CHECK(ds.max_value == doctest::Approx(want).scale(1.0).epsilon(1e-8));
    CHECK(ds.duality_gap <= 1e-7);
  }

  SUBCASE("the outer curve collapses onto the parametric one") {
    const SupportSpec support = SupportSpec::below_bounded(0.0);
    AssumptionProfile profile;
    profile.direction = SelectionDirection::Increasing;
    profile.dominance = MeanDominance::GreaterEqual;
    const std::vector<double> grid = {0.0, 0.25, 0.5, 0.75, 1.0};
    const BoundCurve outer =
        outer_set_mte_oo(out_poly, sel_poly, support, profile, grid);
    const BoundCurve param = mte_oo_bounds(model, support, profile, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(outer.lower[i] == doctest::Approx(param.lower[i]).epsilon(1e-7));
      CHECK(outer.upper[i] == doctest::Approx(param.upper[i]).epsilon(1e-7));
    }
    CHECK((outer.flags[0] & kFlagPointIdentified) != 0);
    CHECK((param.flags[0] & kFlagPointIdentified) != 0);
  }
}

TEST_CASE("a looser basis yields an outer set containing the parametric one") {
  const PropensityTable prop = two_point_table();
  const MTRSet model = table_model();
  const auto out_family =
      model_implied_ivlike_family(cell_family(), model.outcome, prop);
  const auto sel_family =
      model_implied_ivlike_family(cell_family(), model.selection, prop);
  const MTRPolytope out_poly =
      build_polytope(out_family, prop, 3, FeasibleSet::Nonnegative);
  const MTRPolytope sel_poly =
      build_polytope(sel_family, prop, 3, FeasibleSet::UnitBoxIncreasing);

  // Degree elevation of the fitted model stays feasible, so the value
  // brackets must contain the parametric values.
  for (double u : {0.1, 0.4, 0.8}) {
    const ExtremeResult m1 = extremize_value(out_poly, 1, u);
    const double v = model.outcome.eval(1, u);
    CHECK(m1.min_value <= v + 1e-8);
    CHECK(m1.max_value >= v - 1e-8);
  }

  const SupportSpec support = SupportSpec::below_bounded(0.0);
  AssumptionProfile profile;
  profile.direction = SelectionDirection::Increasing;
  profile.dominance = MeanDominance::GreaterEqual;
  const std::vector<double> grid = {0.0, 0.25, 0.5, 0.75, 1.0};
  const BoundCurve outer =
      outer_set_mte_oo(out_poly, sel_poly, support, profile, grid);
  const BoundCurve param = mte_oo_bounds(model, support, profile, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(outer.lower[i] <= param.lower[i] + 1e-8);
    CHECK(outer.upper[i] >= param.upper[i] - 1e-8);
  }

  SUBCASE("corner enumeration envelopes interior component samples") {
    for (double u : {0.25, 0.75}) {
      const ExtremeResult m0y = extremize_value(out_poly, 0, u);
      const ExtremeResult m1y = extremize_value(out_poly, 1, u);
      const ExtremeResult m0s = extremize_value(sel_poly, 0, u);
      const ExtremeResult ds = extremize_contrast(sel_poly, u);
      const BoundCurve at_u =
          outer_set_mte_oo(out_poly, sel_poly, support, profile, {u});

      double lo = kInf, hi = -kInf;
      const int k = 5;
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
          for (int c = 0; c < k; ++c)
            for (int d = 0; d < k; ++d) {
              auto lerp = [k](double x0, double x1, int i) {
                return x0 + (x1 - x0) * i / (k - 1);
              };
              const PointBounds pb = mte_oo_point_bounds(
                  lerp(m0y.min_value, m0y.max_value, a),
                  lerp(m1y.min_value, m1y.max_value, b),
                  lerp(m0s.min_value, m0s.max_value, c),
                  lerp(m0s.min_value, m0s.max_value, c) +
                      lerp(ds.min_value, ds.max_value, d),
                  support, profile);
              if (pb.flags & (kFlagDenominatorGuard | kFlagEmptyInterval))
                continue;
              lo = std::min(lo, pb.lower);
              hi = std::max(hi, pb.upper);
            }
      // The sampled envelope hits the corner envelope because the grid
      // includes every corner, and nothing can exceed it.
      CHECK(at_u.lower[0] == doctest::Approx(lo).epsilon(1e-9));
      CHECK(at_u.upper[0] == doctest::Approx(hi).epsilon(1e-9));
    }
  }
}

TEST_CASE("mutually inconsistent moments are reported as misspecification") {
  const PropensityTable prop = two_point_table();
  IVLikeSpec spec;
  spec.name = "untreated-share";
  spec.g = [](int d, int) { return d == 0 ? 1.0 : 0.0; };
  spec.beta = 0.9;  // exceeds 1 - E[P], impossible for a unit-box curve
  const MTRPolytope poly =
      build_polytope({spec}, prop, 2, FeasibleSet::UnitBox);
  CHECK_THROWS_WITH_AS(extremize_value(poly, 0, 0.5),
                       doctest::Contains("misspecified"), numeric_error);

  IVLikeSpec ok = spec;
  ok.beta = 0.3;
  const MTRPolytope feasible =
      build_polytope({ok}, prop, 2, FeasibleSet::UnitBox);
  const ExtremeResult res = extremize_value(feasible, 0, 0.5);
  CHECK(res.min_value <= res.max_value);
  const Eigen::RowVectorXd row = build_gamma_row(ok, prop, 2);
  CHECK(row.dot(res.argmin) == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(row.dot(res.argmax) == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("polytope validation") {
  const PropensityTable prop = two_point_table();
  CHECK_THROWS_AS(build_polytope({}, prop, 2, FeasibleSet::UnitBox),
                  validation_error);
  IVLikeSpec spec;
  spec.name = "x";
  spec.g = [](int, int) { return 1.0; };
  spec.beta = 0.5;
  CHECK_THROWS_AS(build_polytope({spec}, prop, 0, FeasibleSet::UnitBox),
                  validation_error);
  CHECK_THROWS_AS(build_polytope({spec}, prop, 2, FeasibleSet::Unrestricted),
                  validation_error);

  const MTRPolytope poly = build_polytope({spec}, prop, 2, FeasibleSet::UnitBox);
  CHECK_THROWS_AS(extremize_value(poly, 2, 0.5), validation_error);
  CHECK_THROWS_AS(extremize_value(poly, 0, 1.5), validation_error);
  CHECK_THROWS_AS(extremize_contrast(poly, -0.1), validation_error);
}
