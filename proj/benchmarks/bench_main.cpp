#include <benchmark/benchmark.h>

#include "treemax/roots.hpp"
#include "treemax/simulate.hpp"
#include "treemax/tails.hpp"

using namespace treemax;

namespace {

ModelSpec binary_uniform() {
  ModelSpec s;
  s.q = law::Uniform{0.0, 1.0};
  s.n = law::CountConstant{2};
  s.c = law::Uniform{0.0, 1.0};
  return s;
}

ModelSpec walk() {
  ModelSpec s;
  s.c = law::ExpDiffExp{2.0, 1.0};
  return s;
}

void BM_CounterStreamUniform(benchmark::State& state) {
  CounterStream s{0x1234};
  for (auto _ : state) benchmark::DoNotOptimize(s.uniform());
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CounterStreamUniform);

void BM_ChildKey(benchmark::State& state) {
  NodeKey k = NodeKey::root(1, 0);
  for (auto _ : state) {
    k = k.child(1);
    benchmark::DoNotOptimize(k);
  }
}
BENCHMARK(BM_ChildKey);

void BM_BinaryTreeTraversal(benchmark::State& state) {
  const ModelSpec s = binary_uniform();
  TraversalConfig cfg;
  cfg.depth = static_cast<std::uint32_t>(state.range(0));
  cfg.mode = static_cast<Functional>(state.range(1));
  std::uint64_t replica = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_functional(s, cfg, replica_root(1, replica++)));
  state.SetItemsProcessed(state.iterations() * ((std::int64_t{2} << cfg.depth) - 1));
}
BENCHMARK(BM_BinaryTreeTraversal)
    ->ArgsProduct({{8, 12, 16}, {static_cast<int>(Functional::max), static_cast<int>(Functional::both_coupled)}})
    ->ArgNames({"depth", "mode"});

void BM_WalkReplicas(benchmark::State& state) {
  const ModelSpec s = walk();
  TraversalConfig cfg;
  cfg.depth = 78;
  for (auto _ : state) benchmark::DoNotOptimize(run_replicas(s, cfg, 1000, 5));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_WalkReplicas)->Unit(benchmark::kMillisecond);

void BM_SolveAlphaClosedForm(benchmark::State& state) {
  const ModelSpec s = walk();
  for (auto _ : state) benchmark::DoNotOptimize(solve_alpha(s));
}
BENCHMARK(BM_SolveAlphaClosedForm)->Unit(benchmark::kMicrosecond);

void BM_SolveAlphaMonteCarlo(benchmark::State& state) {
  ModelSpec s;
  s.custom = [](CounterStream& st) {
    RootVectorSample v;
    v.q = 1.0;
    v.n = 2;
    v.c = {1.2 * st.uniform(), 1.2 * st.uniform()};
    return v;
  };
  RootSolveOptions opt;
  opt.n_mc = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_alpha(s, opt));
}
BENCHMARK(BM_SolveAlphaMonteCarlo)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_Hill(benchmark::State& state) {
  const SampleSet set = run_replicas(walk(), TraversalConfig{40}, 100000, 9);
  for (auto _ : state) benchmark::DoNotOptimize(hill_estimator(set.values, 1000));
}
BENCHMARK(BM_Hill)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
