#include <benchmark/benchmark.h>

#include "ipw/biascorrect.hpp"
#include "ipw/estimator.hpp"
#include "ipw/nsw.hpp"
#include "ipw/oracle.hpp"
#include "ipw/propensity.hpp"
#include "ipw/resample.hpp"
#include "ipw/stable.hpp"
#include "ipw/trimming.hpp"

using namespace ipw;

namespace {

Dataset design_data(std::size_t n) {
  SimulationDesign d;
  d.n = n;
  return generate(d, 0);
}

}  // namespace

static void BM_LogitFitNsw(benchmark::State& state) {
  const auto data = build_nsw_features(load_nsw(IPW_BENCH_DATA_DIR));
  for (auto _ : state) benchmark::DoNotOptimize(fit(data, ModelKind::logit));
}
BENCHMARK(BM_LogitFitNsw);

static void BM_SelectThreshold(benchmark::State& state) {
  const auto e = oracle_weights(design_data(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(select_threshold(e, 1.0, 3.0, 10.0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SelectThreshold)->RangeMultiplier(10)->Range(1000, 100000)->Complexity();

static void BM_LocalPolyFit(benchmark::State& state) {
  const auto data = design_data(static_cast<std::size_t>(state.range(0)));
  const auto e = oracle_weights(data);
  for (auto _ : state)
    benchmark::DoNotOptimize(local_poly_fit(data, e, 0.2, 1, FitTarget::y, Orientation::lower_tail));
}
BENCHMARK(BM_LocalPolyFit)->RangeMultiplier(10)->Range(1000, 100000);

static void BM_EstimateAutomatic(benchmark::State& state) {
  const auto data = design_data(static_cast<std::size_t>(state.range(0)));
  const auto e = oracle_weights(data);
  PipelineConfig pc;
  pc.trimming = TrimmingSpec::automatic(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(estimate(data, e, pc));
}
BENCHMARK(BM_EstimateAutomatic)->RangeMultiplier(10)->Range(1000, 100000);

static void BM_Subsampling(benchmark::State& state) {
  const auto data = design_data(5000);
  const auto e = oracle_weights(data);
  PipelineConfig pc;
  pc.trimming = TrimmingSpec::automatic(1.0);
  const auto full = estimate(data, e, pc);
  SubsamplingConfig sc;
  sc.replications = 500;
  sc.threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(subsample_statistics(data, WeightSource::fixed(e), pc, full, sc));
}
BENCHMARK(BM_Subsampling)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_StableSample(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(stable_sample(StableParams{}, static_cast<std::size_t>(state.range(0)), 1));
}
BENCHMARK(BM_StableSample)->Arg(100000);

static void BM_LevyCfModerate(benchmark::State& state) {
  const OutcomeLaw law{OutcomeFamily::normal, 1.0, 1.0};
  const auto ap = tail_moment(law, 1.5, true);
  const auto am = tail_moment(law, 1.5, false);
  for (auto _ : state) benchmark::DoNotOptimize(levy_cf_moderate(1.0, 1.0, 1.5, ap, am));
}
BENCHMARK(BM_LevyCfModerate)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
