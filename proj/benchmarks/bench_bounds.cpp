// Bound evaluation hot paths: the scalar interval core, grid sweeps, and
// weighted aggregation into summary effects.

#include <benchmark/benchmark.h>

#include <vector>

#include "mtebounds/bernstein.hpp"
#include "mtebounds/bounds.hpp"
#include "mtebounds/effects.hpp"
#include "mtebounds/sample.hpp"
#include "mtebounds/types.hpp"

using namespace mtebounds;

namespace {

MTRSet wage_model() {
  MTRSet m;
  m.selection.variable = Variable::Selection;
  m.selection.feasible_set = FeasibleSet::UnitBoxIncreasing;
  m.selection.L = 2;
  m.selection.theta0 = {0.46, 0.66};
  m.selection.theta1 = {0.46, 0.89};
  m.outcome.variable = Variable::Outcome;
  m.outcome.feasible_set = FeasibleSet::Nonnegative;
  m.outcome.L = 2;
  m.outcome.theta0 = {2.96, 5.74};
  m.outcome.theta1 = {3.00, 8.39};
  return m;
}

PropensityTable two_point() {
  PropensityTable t;
  t.entries = {{0, 0.047, 0.395}, {1, 0.737, 0.605}};
  return t;
}

const AssumptionProfile kProfile{SelectionDirection::Increasing,
                                 MeanDominance::GreaterEqual};

void BM_PointBounds(benchmark::State& state) {
  const SupportSpec support = SupportSpec::from_endpoints(0.0, kInf);
  double u = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        mte_oo_point_bounds(2.96 + 2.78 * u, 3.00 + 5.39 * u, 0.46 + 0.20 * u,
                            0.46 + 0.43 * u, support, kProfile));
    u = u < 0.9 ? u + 1e-6 : 0.1;
  }
}
BENCHMARK(BM_PointBounds);

void BM_BoundCurve(benchmark::State& state) {
  const MTRSet model = wage_model();
  const SupportSpec support = SupportSpec::from_endpoints(0.0, kInf);
  const std::vector<double> grid =
      uniform_grid(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mte_oo_bounds(model, support, kProfile, grid));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BoundCurve)->Arg(101)->Arg(1001)->Arg(10001);

void BM_EffectAggregation(benchmark::State& state) {
  const MTRSet model = wage_model();
  const SupportSpec support = SupportSpec::from_endpoints(0.0, kInf);
  const PropensityTable prop = two_point();
  const BoundCurve curve =
      mte_oo_bounds(model, support, kProfile, uniform_grid(2001));
  const EffectWeight weight = EffectWeight::att();
  for (auto _ : state) {
    benchmark::DoNotOptimize(effect_bounds(curve, weight, prop));
  }
}
BENCHMARK(BM_EffectAggregation);

}  // namespace

BENCHMARK_MAIN();
