// Moment polytope assembly and the linear-programming extremes behind the
// nonparametric outer set.

#include <benchmark/benchmark.h>

#include <vector>

#include "mtebounds/bernstein.hpp"
#include "mtebounds/montecarlo.hpp"
#include "mtebounds/outer_set.hpp"
#include "mtebounds/sample.hpp"
#include "mtebounds/types.hpp"

using namespace mtebounds;

namespace {

struct OuterInputs {
  PropensityTable prop;
  std::vector<IVLikeSpec> fam_out;
  std::vector<IVLikeSpec> fam_sel;
  MTRPolytope poly_out;
  MTRPolytope poly_sel;
};

const OuterInputs& inputs() {
  static const OuterInputs in = [] {
    OuterInputs out;
    const Sample sample = simulate(make_design(3), 99, 0);
    out.prop = estimate_propensity(sample);
    const FitResult sel = fit_constrained(sample, out.prop,
                                          Variable::Selection, 2,
                                          FeasibleSet::UnitBoxIncreasing);
    const FitResult fit = fit_constrained(sample, out.prop, Variable::Outcome,
                                          2, FeasibleSet::Nonnegative);
    out.fam_out = model_implied_ivlike_family(
        saturated_ivlike_family(sample, Variable::Outcome), fit.mtr,
        out.prop);
    out.fam_sel = model_implied_ivlike_family(
        saturated_ivlike_family(sample, Variable::Selection), sel.mtr,
        out.prop);
    out.poly_out =
        build_polytope(out.fam_out, out.prop, 3, FeasibleSet::Nonnegative);
    out.poly_sel = build_polytope(out.fam_sel, out.prop, 3,
                                  FeasibleSet::UnitBoxIncreasing);
    return out;
  }();
  return in;
}

void BM_BuildPolytope(benchmark::State& state) {
  const OuterInputs& in = inputs();
  const int L = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        build_polytope(in.fam_out, in.prop, L, FeasibleSet::Nonnegative));
  }
}
BENCHMARK(BM_BuildPolytope)->Arg(3)->Arg(6);

void BM_ExtremizeValue(benchmark::State& state) {
  const OuterInputs& in = inputs();
  double u = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(extremize_value(in.poly_out, 1, u));
    u = u < 0.9 ? u + 0.01 : 0.1;
  }
}
BENCHMARK(BM_ExtremizeValue);

void BM_OuterCurve(benchmark::State& state) {
  const OuterInputs& in = inputs();
  const SupportSpec support = SupportSpec::from_endpoints(0.0, 30.0);
  const AssumptionProfile profile{SelectionDirection::Increasing,
                                  MeanDominance::GreaterEqual};
  const std::vector<double> grid = uniform_grid(11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        outer_set_mte_oo(in.poly_out, in.poly_sel, support, profile, grid));
  }
  state.SetItemsProcessed(state.iterations() * grid.size());
}
BENCHMARK(BM_OuterCurve)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
