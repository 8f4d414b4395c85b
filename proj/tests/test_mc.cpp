#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <vector>

#include "mtebounds/errors.hpp"
#include "mtebounds/montecarlo.hpp"
#include "oracles.hpp"

using namespace mtebounds;

namespace {

struct CellStats {
  double s_mean = 0.0;
  double y_mean = 0.0;
  double s_se = 0.0;
  double y_se = 0.0;
  std::size_t n = 0;
};

CellStats cell_stats(const Sample& sample, int d, int z) {
  CellStats cs;
  double sy = 0.0, syy = 0.0, ss = 0.0;
  for (const auto& r : sample.records) {
    if (r.d != d || r.z != z) continue;
    ++cs.n;
    ss += r.s;
    sy += r.y;
    syy += r.y * r.y;
  }
  const double n = static_cast<double>(cs.n);
  cs.s_mean = ss / n;
  cs.y_mean = sy / n;
  cs.s_se = std::sqrt(cs.s_mean * (1.0 - cs.s_mean) / n);
  const double var_y = syy / n - cs.y_mean * cs.y_mean;
  cs.y_se = std::sqrt(var_y / n);
  return cs;
}

}  // namespace

TEST_CASE("design catalogue") {
  const MonteCarloDesign d1 = make_design(1);
  CHECK(d1.selection == SelectionModel::ConstantThreshold);
  CHECK(d1.q0 == 0.564);
  CHECK(d1.q1 == 0.613);
  CHECK(!d1.linear_effect);
  CHECK(d1.n_default == 7531);
  CHECK(d1.z_prob == 0.605);
  CHECK(d1.p_z0 == 0.047);
  CHECK(d1.p_z1 == 0.737);

  CHECK(make_design(2).linear_effect);
  CHECK(make_design(3).selection == SelectionModel::LinearResponse);
  CHECK(make_design(4).linear_effect);
  const MonteCarloDesign d5 = make_design(5);
  CHECK(d5.selection == SelectionModel::BetaIndex);
  CHECK(d5.q0 == 0.706481);
  CHECK(d5.q1 == 0.873880);
  CHECK(make_design(6).linear_effect);

  CHECK_THROWS_AS(make_design(0), validation_error);
  CHECK_THROWS_AS(make_design(7), validation_error);
}

TEST_CASE("true effect curves") {
  CHECK(true_mte_oo(make_design(1), 0.3) == 0.61);
  CHECK(true_mte_oo(make_design(1), 0.9) == 0.61);
  CHECK(true_mte_oo(make_design(2), 0.5) == doctest::Approx(0.61));
  CHECK(true_mte_oo(make_design(4), 0.25) == doctest::Approx(0.305));
  CHECK_THROWS_AS(true_mte_oo(make_design(1), 1.5), validation_error);
}

TEST_CASE("population selection curves") {
  SUBCASE("constant thresholds") {
    const MonteCarloDesign d = make_design(1);
    for (double u : {0.0, 0.4, 1.0}) {
      CHECK(employment_mtr(d, 0, u) == 0.564);
      CHECK(employment_mtr(d, 1, u) == 0.613);
    }
  }

  SUBCASE("linear response") {
    const MonteCarloDesign d = make_design(3);
    CHECK(employment_mtr(d, 0, 0.5) == doctest::Approx(0.56).epsilon(1e-14));
    CHECK(employment_mtr(d, 1, 0.5) == doctest::Approx(0.675).epsilon(1e-14));
    CHECK(employment_mtr(d, 0, 0.0) == doctest::Approx(0.46).epsilon(1e-14));
    CHECK(employment_mtr(d, 1, 1.0) == doctest::Approx(0.89).epsilon(1e-14));
  }

  SUBCASE("beta index law against quadrature-grade anchors") {
    const MonteCarloDesign d = make_design(5);
    CHECK(employment_mtr(d, 0, 0.25) ==
          doctest::Approx(0.52451499748809098).epsilon(1e-10));
    CHECK(employment_mtr(d, 0, 0.5) ==
          doctest::Approx(0.57301054523118985).epsilon(1e-10));
    CHECK(employment_mtr(d, 0, 0.75) ==
          doctest::Approx(0.60838453824275151).epsilon(1e-10));
    CHECK(employment_mtr(d, 0, 1.0) ==
          doctest::Approx(0.63650331121102134).epsilon(1e-10));
    CHECK(employment_mtr(d, 1, 0.25) ==
          doctest::Approx(0.61494511268688113).epsilon(1e-10));
    CHECK(employment_mtr(d, 1, 0.5) ==
          doctest::Approx(0.71276694821304825).epsilon(1e-10));
    CHECK(employment_mtr(d, 1, 0.75) ==
          doctest::Approx(0.77804642183574712).epsilon(1e-10));
    CHECK(employment_mtr(d, 1, 1.0) ==
          doctest::Approx(0.82486842190281103).epsilon(1e-10));
    // The index law degenerates at u = 0: nobody below the cutoff.
    CHECK(employment_mtr(d, 0, 0.0) == 0.0);
    CHECK(employment_mtr(d, 1, 0.0) == 0.0);
  }

  SUBCASE("argument validation") {
    CHECK_THROWS_AS(employment_mtr(make_design(1), 2, 0.5), validation_error);
    CHECK_THROWS_AS(employment_mtr(make_design(1), 0, -0.1), validation_error);
  }
}

TEST_CASE("population outcome curves scale the selection curves") {
  const MonteCarloDesign d1 = make_design(1);
  CHECK(outcome_mtr(d1, 0, 0.3) ==
        doctest::Approx(0.564 * 7.72).epsilon(1e-14));
  CHECK(outcome_mtr(d1, 1, 0.3) ==
        doctest::Approx(0.613 * 8.33).epsilon(1e-14));
  const MonteCarloDesign d2 = make_design(2);
  CHECK(outcome_mtr(d2, 1, 0.5) ==
        doctest::Approx(0.613 * (7.72 + 0.61)).epsilon(1e-14));
  const MonteCarloDesign d3 = make_design(3);
  CHECK(outcome_mtr(d3, 0, 0.5) ==
        doctest::Approx(0.56 * 7.72).epsilon(1e-14));
}

TEST_CASE("simulation stream is reproducible") {
  const MonteCarloDesign d = make_design(3);
  const Sample a = simulate(d, 2024, 500);
  const Sample b = simulate(d, 2024, 500);
  REQUIRE(a.records.size() == 500);
  REQUIRE(b.records.size() == 500);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].y == b.records[i].y);
    CHECK(a.records[i].s == b.records[i].s);
    CHECK(a.records[i].d == b.records[i].d);
    CHECK(a.records[i].z == b.records[i].z);
    CHECK(a.records[i].w == 1.0);
  }

  SUBCASE("each observation consumes a fixed draw block") {
    const Sample longer = simulate(d, 2024, 800);
    for (std::size_t i = 0; i < 500; ++i) {
      CHECK(longer.records[i].y == a.records[i].y);
      CHECK(longer.records[i].d == a.records[i].d);
    }
  }

  SUBCASE("unobserved rows carry a zero outcome") {
    const Sample big = simulate(make_design(5), 10, 20000);
    for (const auto& r : big.records)
      if (r.s == 0) CHECK(r.y == 0.0);
  }

  SUBCASE("the default size matches the design") {
    CHECK(simulate(d, 1).records.size() == 7531);
  }

  SUBCASE("an uninitialized design is rejected") {
    MonteCarloDesign blank;
    CHECK_THROWS_AS(simulate(blank, 1), validation_error);
  }
}

TEST_CASE("simulated moments match the constant-threshold population") {
  const Sample sample = simulate(make_design(1), 314, 1000000);

  double s0_sum = 0.0, n0 = 0.0;
  double sz1_sum = 0.0, nz1 = 0.0;
  for (const auto& r : sample.records) {
    if (r.d == 0) {
      s0_sum += r.s;
      n0 += 1.0;
    }
    if (r.z == 1) {
      sz1_sum += r.s;
      nz1 += 1.0;
    }
  }
  const double s0 = s0_sum / n0;
  const double se0 = std::sqrt(s0 * (1.0 - s0) / n0);
  CHECK(std::abs(s0 - 0.564) <= 4.0 * se0);

  // E[S | Z = 1] mixes the arms at the treated share 0.737.
  const double want = 0.737 * 0.613 + 0.263 * 0.564;
  const double sz1 = sz1_sum / nz1;
  const double sez1 = std::sqrt(sz1 * (1.0 - sz1) / nz1);
  CHECK(std::abs(sz1 - want) <= 4.0 * sez1);
}

TEST_CASE("simulated cell means match the response-curve integrals") {
  SUBCASE("linear selection design") {
    const MonteCarloDesign d = make_design(3);
    const Sample sample = simulate(d, 2718, 1000000);
    // Treated cell at p = 0.737 averages the treated curve over [0, p].
    const CellStats treated = cell_stats(sample, 1, 1);
    CHECK(std::abs(treated.s_mean - 0.6184550) <= 4.0 * treated.s_se);
    // Untreated cell at the same instrument averages over (p, 1].
    const CellStats untreated = cell_stats(sample, 0, 1);
    CHECK(std::abs(untreated.s_mean - 0.6337) <= 4.0 * untreated.s_se);
    // Outcome scale: selected rows carry the base plus the constant effect.
    const double y_want = (7.72 + 0.61) * 0.6184550;
    CHECK(std::abs(treated.y_mean - y_want) <= 4.0 * treated.y_se);
  }

  SUBCASE("beta index design") {
    const MonteCarloDesign d = make_design(5);
    const Sample sample = simulate(d, 1618, 1000000);
    const CellStats treated = cell_stats(sample, 1, 1);
    const double s_want =
        oracle::simpson([&](double u) { return employment_mtr(d, 1, u); },
                        0.0, 0.737) /
        0.737;
    CHECK(std::abs(treated.s_mean - s_want) <= 4.0 * treated.s_se);
    const CellStats untreated = cell_stats(sample, 0, 0);
    const double s0_want =
        oracle::simpson([&](double u) { return employment_mtr(d, 0, u); },
                        0.047, 1.0) /
        (1.0 - 0.047);
    CHECK(std::abs(untreated.s_mean - s0_want) <= 4.0 * untreated.s_se);
    const double y_want =
        oracle::simpson([&](double u) { return outcome_mtr(d, 1, u); }, 0.0,
                        0.737) /
        0.737;
    CHECK(std::abs(treated.y_mean - y_want) <= 4.0 * treated.y_se);
  }
}

TEST_CASE("coverage experiment bookkeeping") {
  const MonteCarloDesign d = make_design(1);
  const std::vector<double> grid = {0.25, 0.5, 0.75};
  const CoverageTable table =
      coverage_experiment(d, 50, 100, 0.9, grid, 501);

  CHECK(table.design_id == 1);
  CHECK(table.level == 0.9);
  CHECK(table.n_boot == 100);
  CHECK(table.n_requested == 50);
  CHECK(table.n_failed <= 5);
  REQUIRE(table.cells.size() == 4 * grid.size());

  int seen[2][2][3] = {};
  for (const auto& cell : table.cells) {
    const int md = cell.md == MeanDominance::None ? 0 : 1;
    const int method = cell.method == CiMethod::Conservative ? 0 : 1;
    int g = -1;
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (cell.u == grid[i]) g = static_cast<int>(i);
    REQUIRE(g >= 0);
    ++seen[md][method][g];

    CHECK(cell.n_sims == 50 - table.n_failed);
    CHECK(cell.coverage >= 0.0);
    CHECK(cell.coverage <= 1.0);
    // Estimates are success counts over n_sims.
    const double count = cell.coverage * cell.n_sims;
    CHECK(std::abs(count - std::round(count)) <= 1e-9);
    CHECK(cell.mc_se ==
          doctest::Approx(std::sqrt(cell.coverage * (1.0 - cell.coverage) /
                                    cell.n_sims))
              .scale(1.0)
              .epsilon(1e-12));
    // The designs are inside the fitted family, so coverage cannot crater.
    CHECK(cell.coverage >= 0.6);
  }
  for (auto& a : seen)
    for (auto& b : a)
      for (int count : b) CHECK(count == 1);
}

TEST_CASE("coverage experiment is thread-count invariant") {
  const MonteCarloDesign d = make_design(1);
  const std::vector<double> grid = {0.5};
  const CoverageTable serial =
      coverage_experiment(d, 50, 100, 0.9, grid, 733, 1);
  const CoverageTable wide =
      coverage_experiment(d, 50, 100, 0.9, grid, 733, 3);
  REQUIRE(serial.cells.size() == wide.cells.size());
  CHECK(serial.n_failed == wide.n_failed);
  for (std::size_t i = 0; i < serial.cells.size(); ++i)
    CHECK(serial.cells[i].coverage == wide.cells[i].coverage);
}

TEST_CASE("coverage experiment validation") {
  const MonteCarloDesign d = make_design(1);
  const std::vector<double> grid = {0.5};
  CHECK_THROWS_AS(coverage_experiment(d, 10, 100, 0.9, grid, 1),
                  validation_error);
  CHECK_THROWS_AS(coverage_experiment(d, 50, 50, 0.9, grid, 1),
                  validation_error);
  CHECK_THROWS_AS(coverage_experiment(d, 50, 100, 1.0, grid, 1),
                  validation_error);
  CHECK_THROWS_AS(coverage_experiment(d, 50, 100, 0.9, {}, 1),
                  validation_error);
  CHECK_THROWS_AS(coverage_experiment(d, 50, 100, 0.9, {0.5, 0.4}, 1),
                  validation_error);
  CHECK_THROWS_AS(coverage_experiment(d, 50, 100, 0.9, {0.5, 1.4}, 1),
                  validation_error);
}
