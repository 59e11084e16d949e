#include <benchmark/benchmark.h>

#include "ssi/data_model.hpp"
#include "ssi/imputer.hpp"
#include "ssi/kernel_weights.hpp"
#include "ssi/simulation.hpp"
#include "ssi/tuning.hpp"

namespace {

ssi::SimDraw make_draw(ssi::Index n) {
  ssi::SimScenario sc;
  sc.n = n;
  sc.rho = 0.5;
  sc.r2 = 0.6;
  sc.seed = 12345;
  return ssi::draw(sc);
}

void BM_BuildGraph(benchmark::State& state) {
  auto d = make_draw(state.range(0));
  auto idx = ssi::validate(d.dataset);
  auto params = ssi::ScaleParams::from_tau(0.5, d.dataset.n(), idx.d0);
  ssi::GraphOptions opt;
  opt.threads = static_cast<int>(state.range(1));
  for (auto _ : state) {
    auto graph = ssi::build_graph(d.dataset, params, opt);
    benchmark::DoNotOptimize(graph.w.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BuildGraph)
    ->Args({250, 1})
    ->Args({500, 1})
    ->Args({1000, 1})
    ->Args({2000, 1})
    ->Args({2000, 4})
    ->Complexity(benchmark::oNSquared);

void BM_ImputeAll(benchmark::State& state) {
  auto d = make_draw(state.range(0));
  auto idx = ssi::validate(d.dataset);
  auto params = ssi::ScaleParams::from_tau(0.5, d.dataset.n(), idx.d0);
  for (auto _ : state) {
    auto result = ssi::impute_all(d.dataset, params);
    benchmark::DoNotOptimize(result.x_hat.data());
  }
}
BENCHMARK(BM_ImputeAll)->Arg(250)->Arg(500)->Arg(1000);

void BM_QCriterion(benchmark::State& state) {
  auto d = make_draw(state.range(0));
  for (auto _ : state) {
    double q = ssi::q_criterion(d.dataset, 0.5);
    benchmark::DoNotOptimize(q);
  }
}
BENCHMARK(BM_QCriterion)->Arg(250)->Arg(500);

void BM_Sssi(benchmark::State& state) {
  auto d = make_draw(state.range(0));
  auto idx = ssi::validate(d.dataset);
  auto params = ssi::ScaleParams::from_tau(0.5, d.dataset.n(), idx.d0);
  for (auto _ : state) {
    auto result = ssi::impute_sssi(d.dataset, params, 2);
    benchmark::DoNotOptimize(result.x_hat.data());
  }
}
BENCHMARK(BM_Sssi)->Arg(250)->Arg(500);

}  // namespace

BENCHMARK_MAIN();
