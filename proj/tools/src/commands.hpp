#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mtebounds/bernstein.hpp"
#include "mtebounds/sample.hpp"
#include "mtebounds/types.hpp"

// One argument struct and one runner per subcommand. Runners throw
// validation_error / numeric_error; the exit-code mapping lives in main.

namespace mtebounds::cli {

struct FitArgs {
  std::string sample_path;
  ColumnSchema schema;
  int degree = 2;
  SelectionDirection direction = SelectionDirection::Increasing;
  CellWeighting weighting = CellWeighting::SampleShare;
  std::string out_dir = ".";
};
void run_fit(const FitArgs&);

struct BoundsArgs {
  std::string model_path;
  std::string target = "mte-oo";  // or "m1-no"
  int grid_size = 101;
  SelectionDirection direction = SelectionDirection::Increasing;
  MeanDominance dominance = MeanDominance::None;
  double y_lower = -kInf;
  double y_upper = kInf;
  std::string out_dir = ".";
};
void run_bounds(const BoundsArgs&);

struct EffectsArgs {
  std::string model_path;
  std::string propensity_path;
  std::string sample_path;  // optional; enables bootstrap intervals
  ColumnSchema schema;
  std::vector<std::string> dominance = {"none", "ge"};
  SelectionDirection direction = SelectionDirection::Increasing;
  double y_lower = -kInf;
  double y_upper = kInf;
  int grid_size = 101;
  std::vector<double> late_window;  // empty: span of the propensity support
  int bootstrap = 5000;
  double alpha = 0.10;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
};
void run_effects(const EffectsArgs&);

struct CiArgs {
  std::string sample_path;
  ColumnSchema schema;
  int degree = 2;
  SelectionDirection direction = SelectionDirection::Increasing;
  MeanDominance dominance = MeanDominance::None;
  double y_lower = -kInf;
  double y_upper = kInf;
  int grid_size = 21;
  int bootstrap = 5000;
  double alpha = 0.10;
  std::uint64_t seed = 1;
  std::string replicates_out;  // optional audit dump
  std::string out_dir = ".";
};
void run_ci(const CiArgs&);

struct SimulateArgs {
  int design = 1;
  std::size_t n = 0;  // 0: design default
  std::uint64_t seed = 1;
  std::string out_dir = ".";
};
void run_simulate(const SimulateArgs&);

struct CoverageArgs {
  int design = 1;
  int sims = 200;
  int bootstrap = 500;
  bool full_scale = false;
  bool sims_given = false;       // true when the flag was set explicitly
  bool bootstrap_given = false;
  int grid_size = 21;
  double alpha = 0.10;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out_dir = ".";
};
void run_coverage(const CoverageArgs&);

}  // namespace mtebounds::cli
