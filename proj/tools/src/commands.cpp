#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "mtebounds/bounds.hpp"
#include "mtebounds/csv.hpp"
#include "mtebounds/effects.hpp"
#include "mtebounds/errors.hpp"
#include "mtebounds/inference.hpp"
#include "mtebounds/model_io.hpp"
#include "mtebounds/montecarlo.hpp"

namespace fs = std::filesystem;

namespace mtebounds::cli {

namespace {

std::string out_path(const std::string& dir, const std::string& name) {
  const fs::path base = dir.empty() ? fs::path(".") : fs::path(dir);
  fs::create_directories(base);
  return (base / name).string();
}

std::vector<double> make_grid(int n_points) {
  if (n_points < 2) throw validation_error("--grid needs at least 2 points");
  return uniform_grid(static_cast<std::size_t>(n_points));
}

double check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw validation_error("--alpha must lie strictly between 0 and 1");
  return alpha;
}

MeanDominance parse_dominance(const std::string& text) {
  if (text == "none") return MeanDominance::None;
  if (text == "ge") return MeanDominance::GreaterEqual;
  if (text == "le") return MeanDominance::LessEqual;
  throw validation_error(
      fmt::format("unknown dominance '{}' (expected none, ge or le)", text));
}

struct FittedPair {
  MTRSet mtr;
  double outcome_objective = 0.0;
  double selection_objective = 0.0;
  int n_active = 0;
};

FittedPair fit_pair(const Sample& sample, const PropensityTable& prop,
                    int outcome_degree, int selection_degree,
                    SelectionDirection direction, CellWeighting weighting) {
  FitResult fy =
      fit_constrained(sample, prop, Variable::Outcome, outcome_degree,
                      default_feasible_set(Variable::Outcome, direction),
                      weighting);
  FitResult fs =
      fit_constrained(sample, prop, Variable::Selection, selection_degree,
                      default_feasible_set(Variable::Selection, direction),
                      weighting);
  FittedPair out;
  out.mtr = MTRSet{std::move(fy.mtr), std::move(fs.mtr)};
  out.outcome_objective = fy.objective;
  out.selection_objective = fs.objective;
  out.n_active = fy.n_active + fs.n_active;
  return out;
}

int count_flagged(const BoundCurve& curve) {
  int n = 0;
  for (std::uint8_t f : curve.flags) n += f != 0;
  return n;
}

}  // namespace

void run_fit(const FitArgs& args) {
  Sample sample = load_sample(args.sample_path, args.schema);
  if (sample.dropped_missing_d > 0)
    fmt::print(stderr, "note: dropped {} rows with an empty treatment field\n",
               sample.dropped_missing_d);
  PropensityTable prop = estimate_propensity(sample);
  FittedPair fit = fit_pair(sample, prop, args.degree, args.degree,
                            args.direction, args.weighting);

  const std::string model_path = out_path(args.out_dir, "model.csv");
  const std::string prop_path = out_path(args.out_dir, "propensity.csv");
  save_model_csv(fit.mtr, model_path);
  save_propensity_csv(prop, prop_path);

  fmt::print("fit: {} observations, {} instrument values, degree {}\n",
             sample.records.size(), prop.entries.size(), args.degree);
  fmt::print(
      "  objectives: outcome {:.6g}, selection {:.6g}; active constraints: "
      "{}\n",
      fit.outcome_objective, fit.selection_objective, fit.n_active);
  fmt::print("  wrote {}\n  wrote {}\n", model_path, prop_path);
}

void run_bounds(const BoundsArgs& args) {
  MTRSet mtr = load_model_csv(args.model_path);
  const SupportSpec support =
      SupportSpec::from_endpoints(args.y_lower, args.y_upper);
  const std::vector<double> grid = make_grid(args.grid_size);

  BoundCurve curve;
  std::string name;
  if (args.target == "mte-oo") {
    const AssumptionProfile profile{args.direction, args.dominance};
    curve = mte_oo_bounds(mtr, support, profile, grid);
    name = fmt::format("bounds_{}_{}.csv", to_string(args.direction),
                       to_string(args.dominance));
  } else if (args.target == "m1-no") {
    curve = m1_no_bounds(mtr, support, args.dominance, grid);
    name = fmt::format("m1no_{}.csv", to_string(args.dominance));
  } else {
    throw validation_error(fmt::format(
        "unknown target '{}' (expected mte-oo or m1-no)", args.target));
  }

  const std::string path = out_path(args.out_dir, name);
  save_bound_curve_csv(curve, path);
  fmt::print("bounds: target {}, {} grid points, {} flagged\n  wrote {}\n",
             args.target, curve.size(), count_flagged(curve), path);
}

void run_effects(const EffectsArgs& args) {
  MTRSet model = load_model_csv(args.model_path);
  PropensityTable prop = load_propensity_csv(args.propensity_path);
  const SupportSpec support =
      SupportSpec::from_endpoints(args.y_lower, args.y_upper);
  const std::vector<double> grid = make_grid(args.grid_size);
  const double level = 1.0 - check_alpha(args.alpha);

  std::vector<MeanDominance> mds;
  for (const std::string& text : args.dominance)
    mds.push_back(parse_dominance(text));
  if (mds.empty()) throw validation_error("at least one --md value is needed");

  // The LATE window stays fixed across bootstrap replicates: it names the
  // effect being estimated. The treated/untreated share weights re-estimate
  // with each replicate's propensity table.
  double late_lo = 0.0, late_hi = 1.0;
  if (!args.late_window.empty()) {
    if (args.late_window.size() != 2)
      throw validation_error("--late expects exactly two u values");
    late_lo = args.late_window[0];
    late_hi = args.late_window[1];
  } else {
    const std::vector<double> sp = prop.support_p();
    late_lo = sp.front();
    late_hi = sp.back();
  }
  const std::vector<EffectWeight> weights = {
      EffectWeight::ate(), EffectWeight::att(), EffectWeight::atu(),
      EffectWeight::late(late_lo, late_hi)};

  std::vector<std::vector<EffectBounds>> point(mds.size());
  for (std::size_t m = 0; m < mds.size(); ++m) {
    const AssumptionProfile profile{args.direction, mds[m]};
    const BoundCurve curve = mte_oo_bounds(model, support, profile, grid);
    for (const EffectWeight& w : weights)
      point[m].push_back(effect_bounds(curve, w, prop));
  }

  BootstrapResult boot;
  bool have_boot = false;
  std::size_t n_obs = 0;
  if (!args.sample_path.empty() && args.bootstrap > 0) {
    if (args.bootstrap < 100)
      throw validation_error("--bootstrap must be 0 or at least 100");
    Sample sample = load_sample(args.sample_path, args.schema);
    n_obs = sample.records.size();
    const int outcome_degree = model.outcome.L;
    const int selection_degree = model.selection.L;
    auto pipeline = [&](const Sample& rep) {
      const PropensityTable prop_r = estimate_propensity(rep);
      const FittedPair fit =
          fit_pair(rep, prop_r, outcome_degree, selection_degree,
                   args.direction, CellWeighting::SampleShare);
      PipelineOutcome out;
      out.constraints_active = fit.n_active > 0;
      out.stats.reserve(2 * mds.size() * weights.size());
      for (MeanDominance md : mds) {
        const BoundCurve curve = mte_oo_bounds(
            fit.mtr, support, AssumptionProfile{args.direction, md}, grid);
        for (const EffectWeight& w : weights) {
          const EffectBounds eb = effect_bounds(curve, w, prop_r);
          if (std::isnan(eb.lower) || std::isnan(eb.upper))
            throw numeric_error("effect bound is NaN in a replicate");
          out.stats.push_back(eb.lower);
          out.stats.push_back(eb.upper);
        }
      }
      return out;
    };
    boot = bootstrap(sample, pipeline, args.bootstrap, args.seed);
    have_boot = true;
  }

  bool boundary = false;
  std::vector<std::vector<std::string>> rows;
  for (std::size_t m = 0; m < mds.size(); ++m) {
    for (std::size_t k = 0; k < weights.size(); ++k) {
      const EffectBounds& eb = point[m][k];
      std::string cons_lo = "nan", cons_hi = "nan";
      std::string ip_lo = "nan", ip_hi = "nan";
      if (have_boot) {
        const std::size_t col = 2 * (m * weights.size() + k);
        const ConfidenceInterval cons =
            ci_conservative(boot, col, col + 1, level);
        boundary = boundary || cons.boundary_warning;
        cons_lo = format_value(cons.lower);
        cons_hi = format_value(cons.upper);
        // The width-adaptive interval needs a finite estimated width; with an
        // unbounded identified set only the conservative interval is defined.
        if (std::isfinite(eb.upper - eb.lower)) {
          const ConfidenceInterval ip = ci_interval_parameter(
              boot, col, col + 1, eb.lower, eb.upper, n_obs, level);
          boundary = boundary || ip.boundary_warning;
          ip_lo = format_value(ip.lower);
          ip_hi = format_value(ip.upper);
        }
      }
      rows.push_back({eb.name, to_string(mds[m]), format_value(eb.lower),
                      format_value(eb.upper), cons_lo, cons_hi, ip_lo, ip_hi});
      fmt::print("{:<16} md={:<4} [{:>10.6g}, {:>10.6g}]\n", eb.name,
                 to_string(mds[m]), eb.lower, eb.upper);
    }
  }
  if (boundary)
    fmt::print(stderr,
               "note: shape constraints bind in over half of the bootstrap "
               "replicates; intervals may undercover\n");

  const std::string path = out_path(args.out_dir, "effects.csv");
  write_csv(path,
            {"effect", "md", "lower", "upper", "ci_conservative_lower",
             "ci_conservative_upper", "ci_interval_lower", "ci_interval_upper"},
            rows);
  fmt::print("wrote {}\n", path);
}

void run_ci(const CiArgs& args) {
  Sample sample = load_sample(args.sample_path, args.schema);
  PropensityTable prop = estimate_propensity(sample);
  const SupportSpec support =
      SupportSpec::from_endpoints(args.y_lower, args.y_upper);
  const std::vector<double> grid = make_grid(args.grid_size);
  const double level = 1.0 - check_alpha(args.alpha);
  if (args.bootstrap < 100)
    throw validation_error("ci needs at least 100 bootstrap replicates");
  const AssumptionProfile profile{args.direction, args.dominance};

  const FittedPair point_fit =
      fit_pair(sample, prop, args.degree, args.degree, args.direction,
               CellWeighting::SampleShare);
  const BoundCurve point = mte_oo_bounds(point_fit.mtr, support, profile, grid);

  const std::size_t n_grid = grid.size();
  auto pipeline = [&](const Sample& rep) {
    const PropensityTable prop_r = estimate_propensity(rep);
    const FittedPair fit = fit_pair(rep, prop_r, args.degree, args.degree,
                                    args.direction, CellWeighting::SampleShare);
    const BoundCurve curve = mte_oo_bounds(fit.mtr, support, profile, grid);
    PipelineOutcome out;
    out.constraints_active = fit.n_active > 0;
    out.stats.resize(2 * n_grid);
    for (std::size_t g = 0; g < n_grid; ++g) {
      if (curve.flags[g] & kFlagDenominatorGuard)
        throw numeric_error(fmt::format(
            "denominator guard at u = {} in a replicate", curve.u[g]));
      out.stats[g] = curve.lower[g];
      out.stats[n_grid + g] = curve.upper[g];
    }
    return out;
  };
  const BootstrapResult boot =
      bootstrap(sample, pipeline, args.bootstrap, args.seed);

  if (!args.replicates_out.empty()) {
    std::vector<std::string> header{"rep"};
    for (double u : grid) header.push_back(fmt::format("lower_{}", format_value(u)));
    for (double u : grid) header.push_back(fmt::format("upper_{}", format_value(u)));
    std::vector<std::vector<std::string>> rep_rows;
    rep_rows.reserve(boot.replicates.size());
    for (std::size_t r = 0; r < boot.replicates.size(); ++r) {
      std::vector<std::string> row{std::to_string(r)};
      for (double v : boot.replicates[r]) row.push_back(format_value(v));
      rep_rows.push_back(std::move(row));
    }
    write_csv(args.replicates_out, header, rep_rows);
    fmt::print("wrote {} replicate rows to {}\n", rep_rows.size(),
               args.replicates_out);
  }

  bool boundary = false;
  std::vector<std::vector<std::string>> rows;
  for (std::size_t g = 0; g < n_grid; ++g) {
    const ConfidenceInterval cons =
        ci_conservative(boot, g, n_grid + g, level);
    boundary = boundary || cons.boundary_warning;
    rows.push_back({format_value(grid[g]), to_string(args.dominance),
                    cons.method, format_value(cons.lower),
                    format_value(cons.upper), format_value(level)});

    std::string ip_lo = "nan", ip_hi = "nan";
    const double l_hat = point.lower[g];
    const double u_hat = point.upper[g];
    if (std::isfinite(u_hat - l_hat)) {
      const ConfidenceInterval ip = ci_interval_parameter(
          boot, g, n_grid + g, l_hat, u_hat, sample.records.size(), level);
      boundary = boundary || ip.boundary_warning;
      ip_lo = format_value(ip.lower);
      ip_hi = format_value(ip.upper);
    }
    rows.push_back({format_value(grid[g]), to_string(args.dominance),
                    "interval_parameter", ip_lo, ip_hi, format_value(level)});
  }
  if (boundary)
    fmt::print(stderr,
               "note: shape constraints bind in over half of the bootstrap "
               "replicates; intervals may undercover\n");

  const std::string path = out_path(args.out_dir, "ci.csv");
  write_csv(path, {"u", "md", "method", "lower", "upper", "level"}, rows);
  fmt::print("ci: {} grid points, {} replicates requested, {} failed\n",
             n_grid, boot.n_requested, boot.n_failed);
  fmt::print("wrote {}\n", path);
}

void run_simulate(const SimulateArgs& args) {
  const MonteCarloDesign design = make_design(args.design);
  const Sample sample = simulate(design, args.seed, args.n);

  const std::string path = out_path(args.out_dir, "sample.csv");
  save_sample(sample, path);

  double w_sum = 0.0, d_sum = 0.0, s_sum = 0.0;
  for (const ObservationRecord& rec : sample.records) {
    w_sum += rec.w;
    d_sum += rec.w * rec.d;
    s_sum += rec.w * rec.s;
  }
  fmt::print("simulate: design {}, {} observations (seed {})\n", design.id,
             sample.records.size(), args.seed);
  fmt::print("  treated share {:.4f}, observed share {:.4f}\n  wrote {}\n",
             d_sum / w_sum, s_sum / w_sum, path);
}

void run_coverage(const CoverageArgs& args) {
  const MonteCarloDesign design = make_design(args.design);
  int sims = args.sims;
  int boot = args.bootstrap;
  if (args.full_scale) {
    if (!args.sims_given) sims = 1000;
    if (!args.bootstrap_given) boot = 5000;
  }
  const double level = 1.0 - check_alpha(args.alpha);
  const std::vector<double> grid = make_grid(args.grid_size);

  const CoverageTable table = coverage_experiment(design, sims, boot, level,
                                                  grid, args.seed, args.threads);

  std::vector<std::vector<std::string>> rows;
  rows.reserve(table.cells.size());
  for (const CoverageCell& cell : table.cells) {
    rows.push_back({format_value(cell.u), to_string(cell.method),
                    to_string(cell.md), format_value(cell.coverage),
                    format_value(cell.mc_se), std::to_string(cell.n_sims)});
  }
  const std::string path = out_path(args.out_dir, "coverage.csv");
  write_csv(path, {"u", "method", "md", "coverage", "mc_se", "n_sims"}, rows);

  fmt::print(
      "coverage: design {}, {} simulations ({} failed), {} bootstrap "
      "replicates each, level {:.2f}\n",
      table.design_id, table.n_requested, table.n_failed, table.n_boot,
      table.level);
  double worst = 1.0;
  for (const CoverageCell& cell : table.cells)
    worst = std::min(worst, cell.coverage);
  fmt::print("  lowest cell coverage {:.4f}\n  wrote {}\n", worst, path);
}

}  // namespace mtebounds::cli
