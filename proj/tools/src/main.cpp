#include <exception>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "commands.hpp"
#include "mtebounds/errors.hpp"

// Subcommands: fit, bounds, effects, ci, simulate, coverage. Exit codes:
// 0 success, 1 numerical failure, 2 usage or input validation. Flags beat a
// --config key=value file, which beats the built-in defaults.

namespace {

using mtebounds::CellWeighting;
using mtebounds::MeanDominance;
using mtebounds::SelectionDirection;

const std::map<std::string, SelectionDirection> kDirections{
    {"increasing", SelectionDirection::Increasing},
    {"decreasing", SelectionDirection::Decreasing},
    {"agnostic", SelectionDirection::Agnostic}};

const std::map<std::string, MeanDominance> kDominance{
    {"none", MeanDominance::None},
    {"ge", MeanDominance::GreaterEqual},
    {"le", MeanDominance::LessEqual}};

const std::map<std::string, CellWeighting> kWeightings{
    {"sample-share", CellWeighting::SampleShare},
    {"equal", CellWeighting::Equal}};

// Options for a subcommand live in a [subcommand] section of the config
// file as plain key=value lines; flags given on the command line win. The
// option is attached to the main app (that is where config processing runs),
// so subcommands enable fallthrough to keep "fit --config f" working.
void add_config(CLI::App* sub) { sub->fallthrough(); }

void add_schema_options(CLI::App* sub, mtebounds::ColumnSchema* schema) {
  sub->add_option("--col-y", schema->y, "Outcome column name")
      ->capture_default_str();
  sub->add_option("--col-s", schema->s, "Selection column name")
      ->capture_default_str();
  sub->add_option("--col-d", schema->d, "Treatment column name")
      ->capture_default_str();
  sub->add_option("--col-z", schema->z, "Instrument column name")
      ->capture_default_str();
  sub->add_option("--col-w", schema->w, "Weight column name")
      ->capture_default_str();
  sub->add_option("--col-cell", schema->cell, "Stratum column name (optional)");
}

void add_direction_option(CLI::App* sub, SelectionDirection* direction) {
  sub->add_option("--assume", *direction,
                  "Selection direction: increasing, decreasing or agnostic "
                  "(default increasing)")
      ->transform(CLI::CheckedTransformer(kDirections, CLI::ignore_case));
}

void add_md_option(CLI::App* sub, MeanDominance* md) {
  sub->add_option("--md", *md,
                  "Mean dominance across strata: none, ge or le (default "
                  "none)")
      ->transform(CLI::CheckedTransformer(kDominance, CLI::ignore_case));
}

void add_support_options(CLI::App* sub, double* y_lower, double* y_upper) {
  sub->add_option("--y-lower", *y_lower,
                  "Lower end of the outcome support (default -inf)");
  sub->add_option("--y-upper", *y_upper,
                  "Upper end of the outcome support (default +inf)");
}

void add_out_dir_option(CLI::App* sub, std::string* out_dir) {
  sub->add_option("-o,--out-dir", *out_dir, "Output directory")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Bounds on marginal treatment effects when outcomes are observed "
      "selectively"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "key=value file with one [subcommand] section; flags win");

  mtebounds::cli::FitArgs fit_args;
  CLI::App* fit = app.add_subcommand(
      "fit", "Fit outcome and selection curves from a sample CSV");
  add_config(fit);
  fit->add_option("-i,--input", fit_args.sample_path, "Sample CSV path")
      ->required();
  add_schema_options(fit, &fit_args.schema);
  fit->add_option("-L,--degree", fit_args.degree,
                  "Number of basis coefficients per arm")
      ->capture_default_str()
      ->check(CLI::Range(2, 64));
  add_direction_option(fit, &fit_args.direction);
  fit->add_option("--weighting", fit_args.weighting,
                  "Cell weighting: sample-share or equal")
      ->transform(CLI::CheckedTransformer(kWeightings, CLI::ignore_case));
  add_out_dir_option(fit, &fit_args.out_dir);

  mtebounds::cli::BoundsArgs bounds_args;
  CLI::App* bounds = app.add_subcommand(
      "bounds", "Evaluate pointwise bound curves from a fitted model");
  add_config(bounds);
  bounds->add_option("-m,--model", bounds_args.model_path, "Model CSV path")
      ->required();
  bounds
      ->add_option("--target", bounds_args.target,
                   "Curve to bound: mte-oo or m1-no")
      ->capture_default_str();
  bounds->add_option("--grid", bounds_args.grid_size, "Grid points on [0,1]")
      ->capture_default_str();
  add_direction_option(bounds, &bounds_args.direction);
  add_md_option(bounds, &bounds_args.dominance);
  add_support_options(bounds, &bounds_args.y_lower, &bounds_args.y_upper);
  add_out_dir_option(bounds, &bounds_args.out_dir);

  mtebounds::cli::EffectsArgs effects_args;
  CLI::App* effects = app.add_subcommand(
      "effects", "Aggregate bound curves into summary effect intervals");
  add_config(effects);
  effects->add_option("-m,--model", effects_args.model_path, "Model CSV path")
      ->required();
  effects
      ->add_option("-p,--propensity", effects_args.propensity_path,
                   "Propensity CSV path")
      ->required();
  effects->add_option(
      "-i,--sample", effects_args.sample_path,
      "Sample CSV path; enables bootstrap confidence intervals");
  add_schema_options(effects, &effects_args.schema);
  effects
      ->add_option("--md", effects_args.dominance,
                   "Dominance assumptions to evaluate (repeatable; default "
                   "none ge)")
      ->check(CLI::IsMember({"none", "ge", "le"}));
  add_direction_option(effects, &effects_args.direction);
  add_support_options(effects, &effects_args.y_lower, &effects_args.y_upper);
  effects->add_option("--grid", effects_args.grid_size, "Grid points on [0,1]")
      ->capture_default_str();
  effects
      ->add_option("--late", effects_args.late_window,
                   "LATE window as two u values (default: propensity span)")
      ->expected(2);
  effects
      ->add_option("--bootstrap", effects_args.bootstrap,
                   "Bootstrap replicates; 0 skips intervals")
      ->capture_default_str();
  effects->add_option("--alpha", effects_args.alpha, "Interval miss rate")
      ->capture_default_str();
  effects->add_option("--seed", effects_args.seed, "Bootstrap seed")
      ->capture_default_str();
  add_out_dir_option(effects, &effects_args.out_dir);

  mtebounds::cli::CiArgs ci_args;
  CLI::App* ci = app.add_subcommand(
      "ci", "Pointwise confidence intervals for the bound curve");
  add_config(ci);
  ci->add_option("-i,--input", ci_args.sample_path, "Sample CSV path")
      ->required();
  add_schema_options(ci, &ci_args.schema);
  ci->add_option("-L,--degree", ci_args.degree,
                 "Number of basis coefficients per arm")
      ->capture_default_str()
      ->check(CLI::Range(2, 64));
  add_direction_option(ci, &ci_args.direction);
  add_md_option(ci, &ci_args.dominance);
  add_support_options(ci, &ci_args.y_lower, &ci_args.y_upper);
  ci->add_option("--grid", ci_args.grid_size, "Grid points on [0,1]")
      ->capture_default_str();
  ci->add_option("--bootstrap", ci_args.bootstrap, "Bootstrap replicates")
      ->capture_default_str();
  ci->add_option("--alpha", ci_args.alpha, "Interval miss rate")
      ->capture_default_str();
  ci->add_option("--seed", ci_args.seed, "Bootstrap seed")
      ->capture_default_str();
  ci->add_option("--replicates-out", ci_args.replicates_out,
                 "Dump the replicate matrix to this CSV for audit");
  add_out_dir_option(ci, &ci_args.out_dir);

  mtebounds::cli::SimulateArgs sim_args;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Draw a sample from a built-in design");
  add_config(simulate);
  simulate->add_option("--design", sim_args.design, "Design id (1-6)")
      ->required();
  simulate
      ->add_option("--n", sim_args.n, "Observations (0 = design default)")
      ->capture_default_str();
  simulate->add_option("--seed", sim_args.seed, "Simulation seed")
      ->capture_default_str();
  add_out_dir_option(simulate, &sim_args.out_dir);

  mtebounds::cli::CoverageArgs cov_args;
  CLI::App* coverage = app.add_subcommand(
      "coverage", "Monte Carlo coverage of both interval constructions");
  add_config(coverage);
  coverage->add_option("--design", cov_args.design, "Design id (1-6)")
      ->required();
  coverage->add_option("--sims", cov_args.sims, "Simulated samples")
      ->capture_default_str();
  coverage
      ->add_option("--bootstrap", cov_args.bootstrap,
                   "Bootstrap replicates per simulation")
      ->capture_default_str();
  coverage->add_flag("--full-scale", cov_args.full_scale,
                     "Use 1000 simulations x 5000 replicates unless --sims or "
                     "--bootstrap is given");
  coverage->add_option("--grid", cov_args.grid_size, "Grid points on [0,1]")
      ->capture_default_str();
  coverage->add_option("--alpha", cov_args.alpha, "Interval miss rate")
      ->capture_default_str();
  coverage->add_option("--seed", cov_args.seed, "Experiment seed")
      ->capture_default_str();
  coverage
      ->add_option("--threads", cov_args.threads,
                   "Worker threads (0 = hardware)")
      ->capture_default_str();
  add_out_dir_option(coverage, &cov_args.out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  cov_args.sims_given = coverage->count("--sims") > 0;
  cov_args.bootstrap_given = coverage->count("--bootstrap") > 0;

  try {
    if (fit->parsed()) mtebounds::cli::run_fit(fit_args);
    if (bounds->parsed()) mtebounds::cli::run_bounds(bounds_args);
    if (effects->parsed()) mtebounds::cli::run_effects(effects_args);
    if (ci->parsed()) mtebounds::cli::run_ci(ci_args);
    if (simulate->parsed()) mtebounds::cli::run_simulate(sim_args);
    if (coverage->parsed()) mtebounds::cli::run_coverage(cov_args);
  } catch (const mtebounds::validation_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const mtebounds::numeric_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
