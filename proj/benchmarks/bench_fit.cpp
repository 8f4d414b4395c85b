// Constrained fitting and the resampling loop layered on top of it, at the
// default simulated sample size.

#include <benchmark/benchmark.h>

#include <cstddef>

#include "mtebounds/bernstein.hpp"
#include "mtebounds/bounds.hpp"
#include "mtebounds/inference.hpp"
#include "mtebounds/montecarlo.hpp"
#include "mtebounds/sample.hpp"
#include "mtebounds/types.hpp"

using namespace mtebounds;

namespace {

const Sample& design_sample() {
  static const Sample sample = simulate(make_design(3), 1234, 0);
  return sample;
}

void BM_CellMoments(benchmark::State& state) {
  const Sample& sample = design_sample();
  const PropensityTable prop = estimate_propensity(sample);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        cell_moments(sample, prop, Variable::Outcome,
                     CellWeighting::SampleShare));
  }
  state.SetItemsProcessed(state.iterations() * sample.records.size());
}
BENCHMARK(BM_CellMoments);

void BM_ConstrainedFit(benchmark::State& state) {
  const Sample& sample = design_sample();
  const PropensityTable prop = estimate_propensity(sample);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_constrained(sample, prop, Variable::Outcome,
                                             2, FeasibleSet::Nonnegative));
    benchmark::DoNotOptimize(
        fit_constrained(sample, prop, Variable::Selection, 2,
                        FeasibleSet::UnitBoxIncreasing));
  }
}
BENCHMARK(BM_ConstrainedFit);

void BM_BootstrapPipeline(benchmark::State& state) {
  const Sample& sample = design_sample();
  const SupportSpec support = SupportSpec::from_endpoints(0.0, 30.0);
  const AssumptionProfile profile{SelectionDirection::Increasing,
                                  MeanDominance::GreaterEqual};
  const std::vector<double> grid = uniform_grid(21);
  auto pipeline = [&](const Sample& rep) {
    const PropensityTable prop = estimate_propensity(rep);
    const FitResult sel = fit_constrained(rep, prop, Variable::Selection, 2,
                                          FeasibleSet::UnitBoxIncreasing);
    const FitResult out = fit_constrained(rep, prop, Variable::Outcome, 2,
                                          FeasibleSet::Nonnegative);
    MTRSet m;
    m.outcome = out.mtr;
    m.selection = sel.mtr;
    const BoundCurve curve = mte_oo_bounds(m, support, profile, grid);
    PipelineOutcome po;
    po.stats.assign(curve.lower.begin(), curve.lower.end());
    po.constraints_active = sel.n_active + out.n_active > 0;
    return po;
  };
  const int reps = static_cast<int>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bootstrap(design_sample(), pipeline, reps,
                                       seed++, 1));
  }
  state.SetItemsProcessed(state.iterations() * reps);
}
BENCHMARK(BM_BootstrapPipeline)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
