#include "mtebounds/montecarlo.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/beta.hpp>
#include <fmt/format.h>

#include "mtebounds/bernstein.hpp"
#include "mtebounds/bounds.hpp"
#include "mtebounds/errors.hpp"
#include "mtebounds/inference.hpp"
#include "mtebounds/parallel.hpp"
#include "mtebounds/rng.hpp"

namespace mtebounds {

namespace {

double effect_at(const MonteCarloDesign& design, double u) {
  return design.linear_effect ? 1.22 * u : 0.61;
}

// P[V <= q | U = u] for the Beta selection law. The b parameter vanishes at
// u = 0, where the law degenerates to a point mass at one.
double beta_selection_prob(const MonteCarloDesign& design, double q,
                           double u) {
  const double a = design.beta_a0 + design.beta_a1 * u;
  const double b = design.beta_b1 * u;
  if (b < 1e-12) return 0.0;
  return boost::math::ibeta(a, b, q);
}

}  // namespace

MonteCarloDesign make_design(int id) {
  if (id < 1 || id > 6)
    throw validation_error(fmt::format("design id {} is not in 1..6", id));
  MonteCarloDesign d;
  d.id = id;
  d.linear_effect = (id % 2 == 0);
  if (id <= 2) {
    d.selection = SelectionModel::ConstantThreshold;
    d.q0 = 0.564;
    d.q1 = 0.613;
  } else if (id <= 4) {
    d.selection = SelectionModel::LinearResponse;
  } else {
    d.selection = SelectionModel::BetaIndex;
    d.q0 = 0.706481;
    d.q1 = 0.873880;
  }
  return d;
}

double true_mte_oo(const MonteCarloDesign& design, double u) {
  if (!(u >= 0.0 && u <= 1.0))
    throw validation_error(fmt::format("u={:.6g} is outside [0, 1]", u));
  return effect_at(design, u);
}

double employment_mtr(const MonteCarloDesign& design, int arm, double u) {
  if (arm != 0 && arm != 1)
    throw validation_error(fmt::format("arm must be 0 or 1, got {}", arm));
  if (!(u >= 0.0 && u <= 1.0))
    throw validation_error(fmt::format("u={:.6g} is outside [0, 1]", u));
  switch (design.selection) {
    case SelectionModel::ConstantThreshold:
      return arm == 0 ? design.q0 : design.q1;
    case SelectionModel::LinearResponse:
      return arm == 0 ? design.sel_intercept0 + design.sel_slope0 * u
                      : design.sel_intercept1 + design.sel_slope1 * u;
    case SelectionModel::BetaIndex:
      return beta_selection_prob(design, arm == 0 ? design.q0 : design.q1, u);
  }
  return 0.0;
}

double outcome_mtr(const MonteCarloDesign& design, int arm, double u) {
  const double mean_outcome =
      design.y_base + (arm == 1 ? effect_at(design, u) : 0.0);
  return employment_mtr(design, arm, u) * mean_outcome;
}

Sample simulate(const MonteCarloDesign& design, std::uint64_t seed,
                std::size_t n) {
  if (design.id < 1) throw validation_error("design is not initialized");
  if (n == 0) n = design.n_default;

  CounterRng rng(seed, static_cast<std::uint64_t>(design.id));
  std::vector<ObservationRecord> records;
  records.reserve(n);

  for (std::size_t i = 0; i < n; ++i) {
    const double zu = rng.uniform01();
    const double u = rng.uniform01();
    const double eta = rng.uniform(-design.eta_half_width,
                                   design.eta_half_width);
    const double vu = rng.uniform01();

    ObservationRecord rec;
    rec.z = zu < design.z_prob ? 1 : 0;
    const double p = rec.z == 1 ? design.p_z1 : design.p_z0;
    rec.d = u <= p ? 1 : 0;

    // One uniform decides selection in every model. For the Beta law,
    // comparing against the conditional CDF at the cutoff is the inverse-CDF
    // draw composed with the selection indicator, with no root finding.
    double keep_prob = 0.0;
    switch (design.selection) {
      case SelectionModel::ConstantThreshold:
        keep_prob = rec.d == 1 ? design.q1 : design.q0;
        break;
      case SelectionModel::LinearResponse:
        keep_prob = rec.d == 1
                        ? design.sel_intercept1 + design.sel_slope1 * u
                        : design.sel_intercept0 + design.sel_slope0 * u;
        break;
      case SelectionModel::BetaIndex:
        keep_prob = beta_selection_prob(
            design, rec.d == 1 ? design.q1 : design.q0, u);
        break;
    }
    rec.s = vu <= keep_prob ? 1 : 0;
    rec.y = rec.s == 1
                ? design.y_base + eta +
                      (rec.d == 1 ? effect_at(design, u) : 0.0)
                : 0.0;
    rec.w = 1.0;
    records.push_back(rec);
  }
  return make_sample(std::move(records));
}

std::string to_string(CiMethod method) {
  return method == CiMethod::Conservative ? "conservative"
                                          : "interval_parameter";
}

namespace {

struct SimOutcome {
  // Cover flags laid out as [md][method][grid], md in {none, ge}, method in
  // {conservative, interval_parameter}.
  std::vector<std::uint8_t> cover;
  bool ok = false;
  std::string error;
};

struct BoundsAtGrid {
  std::vector<double> lower_none, upper_none, lower_ge, upper_ge;
  bool constraints_active = false;
};

BoundsAtGrid fit_and_bound(const Sample& sample,
                           const std::vector<double>& grid) {
  const PropensityTable prop = estimate_propensity(sample);
  const FitResult outcome =
      fit_constrained(sample, prop, Variable::Outcome, 2,
                      FeasibleSet::Nonnegative);
  const FitResult selection =
      fit_constrained(sample, prop, Variable::Selection, 2,
                      FeasibleSet::UnitBoxIncreasing);
  const MTRSet mtr{outcome.mtr, selection.mtr};
  const SupportSpec support = SupportSpec::below_bounded(0.0);

  BoundsAtGrid out;
  out.constraints_active = outcome.n_active + selection.n_active > 0;
  const BoundCurve none = mte_oo_bounds(
      mtr, support,
      AssumptionProfile{SelectionDirection::Increasing, MeanDominance::None},
      grid);
  const BoundCurve ge = mte_oo_bounds(
      mtr, support,
      AssumptionProfile{SelectionDirection::Increasing,
                        MeanDominance::GreaterEqual},
      grid);
  // A guarded grid point yields NaN endpoints, which no quantile can digest;
  // fail this sample or replicate and let the caller's failure budget decide.
  if (none.any_flag(kFlagDenominatorGuard) || ge.any_flag(kFlagDenominatorGuard))
    throw numeric_error("selection denominator guarded on the grid");
  out.lower_none = none.lower;
  out.upper_none = none.upper;
  out.lower_ge = ge.lower;
  out.upper_ge = ge.upper;
  return out;
}

}  // namespace

CoverageTable coverage_experiment(const MonteCarloDesign& design, int n_sims,
                                  int n_boot, double level,
                                  const std::vector<double>& grid,
                                  std::uint64_t seed, int n_threads) {
  if (n_sims < 50)
    throw validation_error("coverage experiment needs at least 50 simulations");
  if (n_boot < 100)
    throw validation_error(
        "coverage experiment needs at least 100 bootstrap replicates");
  if (!(level > 0.0 && level < 1.0))
    throw validation_error("confidence level must lie in (0, 1)");
  if (grid.empty()) throw validation_error("evaluation grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0 && grid[i] <= 1.0))
      throw validation_error("grid points must lie in [0, 1]");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw validation_error("grid must be strictly increasing");
  }

  const std::size_t n_grid = grid.size();
  const std::size_t n_cells = 4 * n_grid;
  std::vector<SimOutcome> outcomes(static_cast<std::size_t>(n_sims));

  parallel_for(
      static_cast<std::size_t>(n_sims), resolve_threads(n_threads),
      [&](std::size_t sim) {
        SimOutcome& out = outcomes[sim];
        try {
          const std::uint64_t data_seed =
              derive_seed(seed, 2 * static_cast<std::uint64_t>(sim));
          const std::uint64_t boot_seed =
              derive_seed(seed, 2 * static_cast<std::uint64_t>(sim) + 1);

          const Sample sample = simulate(design, data_seed);
          const BoundsAtGrid estimate = fit_and_bound(sample, grid);

          const BootstrapPipeline pipeline =
              [&grid](const Sample& resampled) {
                const BoundsAtGrid b = fit_and_bound(resampled, grid);
                PipelineOutcome po;
                po.stats.reserve(4 * b.lower_none.size());
                po.stats.insert(po.stats.end(), b.lower_none.begin(),
                                b.lower_none.end());
                po.stats.insert(po.stats.end(), b.upper_none.begin(),
                                b.upper_none.end());
                po.stats.insert(po.stats.end(), b.lower_ge.begin(),
                                b.lower_ge.end());
                po.stats.insert(po.stats.end(), b.upper_ge.begin(),
                                b.upper_ge.end());
                po.constraints_active = b.constraints_active;
                return po;
              };
          // The simulations already run in parallel; keep each bootstrap on
          // its own thread.
          const BootstrapResult boot =
              bootstrap(sample, pipeline, n_boot, boot_seed, 1);

          out.cover.assign(4 * grid.size(), 0);
          for (std::size_t g = 0; g < grid.size(); ++g) {
            const double truth = true_mte_oo(design, grid[g]);
            for (int md = 0; md < 2; ++md) {
              const std::size_t lower_col =
                  static_cast<std::size_t>(2 * md) * grid.size() + g;
              const std::size_t upper_col =
                  static_cast<std::size_t>(2 * md + 1) * grid.size() + g;
              const double l_hat = md == 0 ? estimate.lower_none[g]
                                           : estimate.lower_ge[g];
              const double u_hat = md == 0 ? estimate.upper_none[g]
                                           : estimate.upper_ge[g];
              const ConfidenceInterval cons =
                  ci_conservative(boot, lower_col, upper_col, level);
              const ConfidenceInterval imci = ci_interval_parameter(
                  boot, lower_col, upper_col, l_hat, u_hat,
                  sample.records.size(), level);
              const std::size_t base = static_cast<std::size_t>(md) * 2 *
                                       grid.size();
              out.cover[base + g] =
                  truth >= cons.lower && truth <= cons.upper ? 1 : 0;
              out.cover[base + grid.size() + g] =
                  truth >= imci.lower && truth <= imci.upper ? 1 : 0;
            }
          }
          out.ok = true;
        } catch (const std::exception& e) {
          out.ok = false;
          out.error = e.what();
        }
      });

  CoverageTable table;
  table.design_id = design.id;
  table.level = level;
  table.n_boot = n_boot;
  table.n_requested = n_sims;

  std::vector<int> cover_sum(n_cells, 0);
  int n_ok = 0;
  std::string first_error;
  for (const auto& out : outcomes) {
    if (!out.ok) {
      ++table.n_failed;
      if (first_error.empty()) first_error = out.error;
      continue;
    }
    ++n_ok;
    for (std::size_t c = 0; c < n_cells; ++c) cover_sum[c] += out.cover[c];
  }
  if (10 * table.n_failed > n_sims) {
    throw numeric_error(fmt::format(
        "{} of {} simulations failed (first failure: {})", table.n_failed,
        n_sims, first_error));
  }

  for (int md = 0; md < 2; ++md) {
    for (int method = 0; method < 2; ++method) {
      for (std::size_t g = 0; g < n_grid; ++g) {
        CoverageCell cell;
        cell.u = grid[g];
        cell.md = md == 0 ? MeanDominance::None : MeanDominance::GreaterEqual;
        cell.method = method == 0 ? CiMethod::Conservative
                                  : CiMethod::IntervalParameter;
        cell.n_sims = n_ok;
        const std::size_t idx =
            static_cast<std::size_t>(md) * 2 * n_grid +
            static_cast<std::size_t>(method) * n_grid + g;
        cell.coverage =
            n_ok > 0 ? static_cast<double>(cover_sum[idx]) / n_ok : 0.0;
        cell.mc_se = n_ok > 0 ? std::sqrt(std::max(
                                    cell.coverage * (1.0 - cell.coverage),
                                    0.0) /
                                n_ok)
                              : 0.0;
        table.cells.push_back(cell);
      }
    }
  }
  return table;
}

}  // namespace mtebounds
