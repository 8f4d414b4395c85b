#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mtebounds/sample.hpp"

// Row bootstrap over observation records plus the two confidence interval
// constructions used on partially identified effects: a conservative
// percentile interval for the whole identified set and a tighter interval
// that covers the parameter itself, with a critical value adapted to the
// estimated width of the set.

namespace mtebounds {

struct PipelineOutcome {
  std::vector<double> stats;
  // True when the point estimate sits on the boundary of its feasible set,
  // e.g. a shape-constrained fit with binding constraints.
  bool constraints_active = false;
};

using BootstrapPipeline = std::function<PipelineOutcome(const Sample&)>;

struct BootstrapResult {
  // One row per successful replicate, in replicate order; columns are
  // whatever the pipeline packed into stats.
  std::vector<std::vector<double>> replicates;
  std::uint64_t seed = 0;
  int n_requested = 0;
  int n_failed = 0;
  int n_constraints_active = 0;
  std::vector<std::string> failure_messages;  // one per failed replicate
};

// Resamples records with replacement (weights travel with their rows) and
// runs the pipeline on each replicate. Replicate r draws from a counter
// stream keyed by (seed, r), so results are identical for any thread count.
// Replicates whose resample cannot be assembled or whose pipeline throws are
// recorded as failures; more than 10 percent failures is a numeric_error.
BootstrapResult bootstrap(const Sample&, const BootstrapPipeline&, int n_reps,
                          std::uint64_t seed, int n_threads = 0);

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.0;
  std::string method;
  // Raised when binding constraints were seen in more than half of the
  // successful replicates; the bootstrap distribution is then one-sided and
  // the interval may undercover.
  bool boundary_warning = false;
};

// Percentile interval for the identified set: lower alpha/2 quantile of the
// lower-bound column against the upper 1 - alpha/2 quantile of the
// upper-bound column. Needs at least 100 successful replicates.
ConfidenceInterval ci_conservative(const BootstrapResult&,
                                   std::size_t lower_col,
                                   std::size_t upper_col, double level);

// Interval-parameter construction: [l_hat - C * sd_l, u_hat + C * sd_u]
// where C solves Phi(C + width / max(sd_l, sd_u)) - Phi(-C) = level. The
// interval covers the parameter, not the whole set, so it is narrower than
// the conservative interval whenever the set has positive width. The
// trailing argument is the sample size used upstream; the bootstrap
// deviations are already on the estimate scale, so it does not enter the
// computation and is kept for call-site symmetry with other constructions.
ConfidenceInterval ci_interval_parameter(const BootstrapResult&,
                                         std::size_t lower_col,
                                         std::size_t upper_col, double l_hat,
                                         double u_hat, std::size_t n_obs,
                                         double level);

// Critical value for the interval-parameter construction. At width 0 it is
// the two-sided normal quantile z_{(1+level)/2}; as width grows it falls to
// the one-sided quantile z_level.
double im_critical_value(double width, double sigma_l, double sigma_u,
                         double level);

// Type-7 empirical quantile (linear interpolation between order statistics).
double empirical_quantile(std::vector<double> values, double q);

double normal_cdf(double x);
double normal_quantile(double p);

}  // namespace mtebounds
