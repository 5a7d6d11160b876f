#include "qro/campaigns.hpp"
#include "qro/scenario.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace qro;

struct BenchFixture {
  Scenario s = builtin_scenario("anti-harmonic");
  UncertaintyBounds bounds{0.38, 0.09, 0.04};
  EpsArray eps = default_epsilons(bounds);
  Vec2 k{1.2, 0.7};
  LinearObserver obs = kalman_observer_realization(s.model, s.weights);
};

const BenchFixture& fixture() {
  static const BenchFixture f;
  return f;
}

void BM_IneqSerial(benchmark::State& state) {
  const BenchFixture& f = fixture();
  const auto n = state.range(0);
  for (auto _ : state) {
    const IneqCampaignResult r = ineq_campaign_serial(f.s.model, f.bounds, f.eps, f.k, n, 10, 42);
    benchmark::DoNotOptimize(r.worst1);
  }
  state.SetItemsProcessed(state.iterations() * n);
}

void BM_IneqParallel(benchmark::State& state) {
  const BenchFixture& f = fixture();
  const auto n = state.range(0);
  for (auto _ : state) {
    const IneqCampaignResult r = ineq_campaign(f.s.model, f.bounds, f.eps, f.k, n, 10, 42);
    benchmark::DoNotOptimize(r.worst1);
  }
  state.SetItemsProcessed(state.iterations() * n);
}

void BM_LemmaSerial(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const LemmaCampaignResult r = lemma_campaign_serial(n, 7, 0.01, 250.0);
    benchmark::DoNotOptimize(r.worst_margin);
  }
  state.SetItemsProcessed(state.iterations() * n);
}

void BM_LemmaParallel(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const LemmaCampaignResult r = lemma_campaign(n, 7, 0.01, 250.0);
    benchmark::DoNotOptimize(r.worst_margin);
  }
  state.SetItemsProcessed(state.iterations() * n);
}

void BM_TrajectorySerial(benchmark::State& state) {
  const BenchFixture& f = fixture();
  const auto n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const TrajectoryCampaignResult r =
        trajectory_campaign_serial(f.s.model, f.obs, true, n, 42, Vec2(1, 0));
    benchmark::DoNotOptimize(r.bounded);
  }
  state.SetItemsProcessed(state.iterations() * n);
}

void BM_TrajectoryParallel(benchmark::State& state) {
  const BenchFixture& f = fixture();
  const auto n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const TrajectoryCampaignResult r =
        trajectory_campaign(f.s.model, f.obs, true, n, 42, Vec2(1, 0));
    benchmark::DoNotOptimize(r.bounded);
  }
  state.SetItemsProcessed(state.iterations() * n);
}

BENCHMARK(BM_IneqSerial)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IneqParallel)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LemmaSerial)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LemmaParallel)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrajectorySerial)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrajectoryParallel)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
