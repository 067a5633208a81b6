// Serial against OpenMP paths. On a single core the parallel variants only
// measure scheduling overhead; run on a multi-core box for speedups.

#include <benchmark/benchmark.h>

#include "causal_cart/mc.hpp"
#include "causal_cart/splitting.hpp"
#include "causal_cart/tree.hpp"

namespace {

ccart::Dataset sample(std::size_t n, std::size_t p) {
  ccart::DgpConfig cfg;
  cfg.n = n;
  cfg.p = p;
  cfg.c1 = 1.0;
  ccart::RngStream s(1, "bench", 0);
  return ccart::sample_dataset(cfg, s);
}

void BM_ProfileSerial(benchmark::State& state) {
  const auto d = sample(static_cast<std::size_t>(state.range(0)), 4);
  const auto o = ccart::coordinate_orders(d);
  for (auto _ : state)
    benchmark::DoNotOptimize(ccart::criterion_profile(d, o, {ccart::RuleTag::dim_var}));
}

void BM_ProfileParallel(benchmark::State& state) {
  const auto d = sample(static_cast<std::size_t>(state.range(0)), 4);
  const auto o = ccart::coordinate_orders(d);
  for (auto _ : state)
    benchmark::DoNotOptimize(ccart::criterion_profile_parallel(d, o, {ccart::RuleTag::dim_var}));
}

void BM_GrowTree(benchmark::State& state) {
  const auto d = sample(20000, 3);
  const auto exec = state.range(0) ? ccart::Exec::parallel : ccart::Exec::serial;
  for (auto _ : state) benchmark::DoNotOptimize(ccart::grow_tree(d, {ccart::RuleTag::sse_two_means}, 5, exec));
}

void BM_Replications(benchmark::State& state) {
  const auto workers = static_cast<unsigned>(state.range(0));
  ccart::DgpConfig cfg;
  cfg.n = 2000;
  const auto spec = ccart::EstimatorSpec::make(ccart::RuleTag::dim_var, ccart::SchemeTag::nss, 3);
  for (auto _ : state) {
    const double total = ccart::run_replications(
        64, workers, 0.0,
        [&](double& acc, std::size_t rep) {
          ccart::RngStream s(1, "bench-reps", rep);
          acc += ccart::estimate_nss(ccart::sample_dataset(cfg, s), spec)
                     .predict(std::vector<double>{0.5});
        },
        [](double& t, double p) { t += p; });
    benchmark::DoNotOptimize(total);
  }
}

}  // namespace

BENCHMARK(BM_ProfileSerial)->Arg(10000)->Arg(100000);
BENCHMARK(BM_ProfileParallel)->Arg(10000)->Arg(100000);
BENCHMARK(BM_GrowTree)->Arg(0)->Arg(1);
BENCHMARK(BM_Replications)->Arg(1)->Arg(0);
BENCHMARK_MAIN();
