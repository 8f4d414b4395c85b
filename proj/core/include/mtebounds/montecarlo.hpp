#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mtebounds/sample.hpp"
#include "mtebounds/types.hpp"

// Simulation designs for validating the whole estimation chain, plus the
// coverage experiment that wraps simulation, fitting, bounds, bootstrap and
// confidence intervals. The six designs share one observation layout (binary
// instrument, uniform treatment cost, uniform outcome noise) and differ in
// how latent selection is generated and whether the treatment effect is
// constant or linear in the cost index.

namespace mtebounds {

enum class SelectionModel {
  ConstantThreshold,  // selection chance free of the cost index, both arms
  LinearResponse,     // linear selection curves in the cost index
  BetaIndex,          // latent index with a Beta law conditional on the cost
};

struct MonteCarloDesign {
  int id = 0;
  std::size_t n_default = 7531;
  double z_prob = 0.605;  // P[Z = 1]
  double p_z0 = 0.047;    // treatment probability at Z = 0
  double p_z1 = 0.737;    // treatment probability at Z = 1

  SelectionModel selection = SelectionModel::ConstantThreshold;
  // Selection thresholds: acceptance chances for ConstantThreshold, index
  // cutoffs for BetaIndex; unused by LinearResponse.
  double q0 = 0.0;
  double q1 = 0.0;
  // Linear selection curves (LinearResponse): intercept + slope * u per arm.
  double sel_intercept0 = 0.46, sel_slope0 = 0.20;
  double sel_intercept1 = 0.46, sel_slope1 = 0.43;
  // Beta law parameters (BetaIndex): a(u) = a0 + a1 * u, b(u) = b1 * u.
  double beta_a0 = 0.000468;
  double beta_a1 = 1.079615;
  double beta_b1 = 0.873059;

  bool linear_effect = false;  // false: effect 0.61, true: effect 1.22 * u
  double y_base = 7.72;
  double eta_half_width = 2.0;
};

// Designs 1..6: odd ids carry the constant effect, even ids the linear one;
// ids 1-2 use ConstantThreshold, 3-4 LinearResponse, 5-6 BetaIndex.
MonteCarloDesign make_design(int id);

// True always-observed marginal effect; the designs make the effect
// deterministic given the cost index, so no stratum adjustment appears.
double true_mte_oo(const MonteCarloDesign&, double u);

// Population selection curve P[observed | arm, cost index u].
double employment_mtr(const MonteCarloDesign&, int arm, double u);

// Population outcome-scale curve E[observed outcome | arm, u]; the latent
// index is independent of the outcome noise, so this is the selection curve
// times the mean potential outcome.
double outcome_mtr(const MonteCarloDesign&, int arm, double u);

// Draws n observations (design default when n == 0) with unit weights.
// Each observation consumes a fixed block of four uniforms in the order
// instrument, cost index, outcome noise, selection draw, so results are
// reproducible given (seed, design id).
Sample simulate(const MonteCarloDesign&, std::uint64_t seed,
                std::size_t n = 0);

enum class CiMethod { Conservative, IntervalParameter };

std::string to_string(CiMethod);

struct CoverageCell {
  double u = 0.0;
  CiMethod method = CiMethod::Conservative;
  MeanDominance md = MeanDominance::None;
  int n_sims = 0;       // successful simulations behind this cell
  double coverage = 0.0;
  double mc_se = 0.0;   // binomial standard error of the coverage estimate
};

struct CoverageTable {
  int design_id = 0;
  double level = 0.0;
  int n_boot = 0;
  int n_requested = 0;
  int n_failed = 0;
  std::vector<CoverageCell> cells;
};

// Full-chain coverage: per simulation, fit both curves with L = 2, bound the
// effect under dominance none and ge, bootstrap the bounds, build both
// intervals, and record whether each interval covers the true effect.
// Needs n_sims >= 50 and n_boot >= 100; more than 10 percent simulation
// failures is a numeric_error.
CoverageTable coverage_experiment(const MonteCarloDesign&, int n_sims,
                                  int n_boot, double level,
                                  const std::vector<double>& grid,
                                  std::uint64_t seed, int n_threads = 0);

}  // namespace mtebounds
