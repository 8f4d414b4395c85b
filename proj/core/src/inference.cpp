#include "mtebounds/inference.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include "mtebounds/errors.hpp"
#include "mtebounds/parallel.hpp"
#include "mtebounds/rng.hpp"

namespace mtebounds {

namespace {

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0))
    throw validation_error(
        fmt::format("confidence level {:.6g} must lie in (0, 1)", level));
}

std::vector<double> extract_column(const BootstrapResult& result,
                                   std::size_t col) {
  std::vector<double> out;
  out.reserve(result.replicates.size());
  for (const auto& row : result.replicates) {
    if (col >= row.size())
      throw validation_error(fmt::format(
          "replicate has {} columns, column {} requested", row.size(), col));
    out.push_back(row[col]);
  }
  return out;
}

double column_sd(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1.0));
}

}  // namespace

BootstrapResult bootstrap(const Sample& sample,
                          const BootstrapPipeline& pipeline, int n_reps,
                          std::uint64_t seed, int n_threads) {
  if (!pipeline) throw validation_error("bootstrap pipeline is empty");
  if (n_reps < 1)
    throw validation_error("bootstrap needs at least one replicate");
  if (sample.records.empty()) throw validation_error("sample is empty");

  const std::size_t n = sample.records.size();
  std::vector<std::optional<PipelineOutcome>> outcomes(
      static_cast<std::size_t>(n_reps));
  std::vector<std::string> errors(static_cast<std::size_t>(n_reps));

  parallel_for(static_cast<std::size_t>(n_reps), resolve_threads(n_threads),
               [&](std::size_t rep) {
                 CounterRng rng(seed, static_cast<std::uint64_t>(rep));
                 std::vector<ObservationRecord> draw;
                 draw.reserve(n);
                 for (std::size_t i = 0; i < n; ++i)
                   draw.push_back(sample.records[rng.uniform_index(n)]);
                 try {
                   const Sample resampled = make_sample(std::move(draw));
                   outcomes[rep] = pipeline(resampled);
                 } catch (const std::exception& e) {
                   errors[rep] = e.what();
                 }
               });

  BootstrapResult result;
  result.seed = seed;
  result.n_requested = n_reps;
  std::size_t n_stats = 0;
  for (std::size_t rep = 0; rep < outcomes.size(); ++rep) {
    if (!outcomes[rep].has_value()) {
      ++result.n_failed;
      result.failure_messages.push_back(errors[rep]);
      continue;
    }
    PipelineOutcome& out = *outcomes[rep];
    if (result.replicates.empty()) {
      n_stats = out.stats.size();
    } else if (out.stats.size() != n_stats) {
      throw numeric_error(fmt::format(
          "pipeline returned {} stats on one replicate and {} on another",
          n_stats, out.stats.size()));
    }
    if (out.constraints_active) ++result.n_constraints_active;
    result.replicates.push_back(std::move(out.stats));
  }

  if (10 * result.n_failed > n_reps) {
    throw numeric_error(fmt::format(
        "{} of {} bootstrap replicates failed (first failure: {})",
        result.n_failed, n_reps,
        result.failure_messages.empty() ? "none"
                                        : result.failure_messages.front()));
  }
  return result;
}

ConfidenceInterval ci_conservative(const BootstrapResult& result,
                                   std::size_t lower_col,
                                   std::size_t upper_col, double level) {
  check_level(level);
  if (result.replicates.size() < 100)
    throw validation_error(fmt::format(
        "conservative interval needs at least 100 successful replicates, "
        "have {}",
        result.replicates.size()));

  const double alpha = 1.0 - level;
  ConfidenceInterval ci;
  ci.lower = empirical_quantile(extract_column(result, lower_col),
                                alpha / 2.0);
  ci.upper = empirical_quantile(extract_column(result, upper_col),
                                1.0 - alpha / 2.0);
  ci.level = level;
  ci.method = "conservative";
  ci.boundary_warning =
      2 * result.n_constraints_active >
      static_cast<int>(result.replicates.size());
  return ci;
}

double im_critical_value(double width, double sigma_l, double sigma_u,
                         double level) {
  check_level(level);
  if (width < 0.0)
    throw validation_error("interval width must be nonnegative");
  const double sigma = std::max(sigma_l, sigma_u);
  if (!(sigma > 0.0))
    throw validation_error(
        "interval-parameter critical value needs a positive bound sd");

  const double ratio = width / sigma;
  const auto excess = [&](double c) {
    return normal_cdf(c + ratio) - normal_cdf(-c) - level;
  };
  // The objective is increasing in c; c = 0 gives Phi(ratio) - 1/2 - level
  // which is negative for any level above 1/2, and c = 10 overshoots any
  // usable level.
  double lo = 0.0, hi = 10.0;
  if (excess(lo) >= 0.0) return 0.0;
  for (int iter = 0; iter < 200 && hi - lo > 1e-10; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

ConfidenceInterval ci_interval_parameter(const BootstrapResult& result,
                                         std::size_t lower_col,
                                         std::size_t upper_col, double l_hat,
                                         double u_hat, std::size_t /*n_obs*/,
                                         double level) {
  check_level(level);
  if (result.replicates.size() < 100)
    throw validation_error(fmt::format(
        "interval-parameter interval needs at least 100 successful "
        "replicates, have {}",
        result.replicates.size()));
  if (u_hat < l_hat)
    throw validation_error(fmt::format(
        "estimated upper bound {:.6g} is below the lower bound {:.6g}", u_hat,
        l_hat));

  const double sd_l = column_sd(extract_column(result, lower_col));
  const double sd_u = column_sd(extract_column(result, upper_col));
  const double c = im_critical_value(u_hat - l_hat, sd_l, sd_u, level);

  ConfidenceInterval ci;
  ci.lower = l_hat - c * sd_l;
  ci.upper = u_hat + c * sd_u;
  ci.level = level;
  ci.method = "interval_parameter";
  ci.boundary_warning =
      2 * result.n_constraints_active >
      static_cast<int>(result.replicates.size());
  return ci;
}

double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw validation_error("quantile of an empty vector");
  if (!(q >= 0.0 && q <= 1.0))
    throw validation_error(
        fmt::format("quantile level {:.6g} is outside [0, 1]", q));
  std::sort(values.begin(), values.end());
  const double pos = q * (static_cast<double>(values.size()) - 1.0);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(i);
  return values[i] * (1.0 - frac) + values[i + 1] * frac;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw validation_error(
        fmt::format("normal quantile level {:.6g} must lie in (0, 1)", p));
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

}  // namespace mtebounds
