#include <benchmark/benchmark.h>

#include <mgverify/dense.hpp>
#include <mgverify/experiments.hpp>
#include <mgverify/gaussian.hpp>
#include <mgverify/noise.hpp>
#include <mgverify/stats.hpp>

#include "oracles.hpp"

using namespace mgv;

namespace {

ErrorModelConfig noiseless() {
  ErrorModelConfig m;
  m.p_c = 0.0;
  m.gamma = 0.0;
  return m;
}

// Weak sampling of a depth-200 random matchgate brickwork; args: n, noisy.
void BM_WeakSample(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const bool noisy = state.range(1) != 0;
  Rng rng = make_stream(1, {static_cast<std::uint64_t>(n)});
  const Circuit c = testing::random_mg_circuit(n, 200, rng);
  const WeakSampler sampler(c, build_bindings(c, noisy ? ErrorModelConfig{} : noiseless()));
  for (auto _ : state) benchmark::DoNotOptimize(sampler.sample_bits(rng));
  state.SetItemsProcessed(state.iterations());
  state.SetLabel(noisy ? "noisy" : "noiseless");
}
BENCHMARK(BM_WeakSample)
    ->ArgsProduct({{16, 32, 64, 128}, {0, 1}})
    ->ArgNames({"n", "noisy"})
    ->Unit(benchmark::kMillisecond);

void BM_SamplerBuild(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng = make_stream(2);
  const Circuit c = testing::random_mg_circuit(n, 200, rng);
  for (auto _ : state) benchmark::DoNotOptimize(WeakSampler(c, build_bindings(c, ErrorModelConfig{})));
}
BENCHMARK(BM_SamplerBuild)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_RcOutputStateFig2(benchmark::State& state) {
  const Circuit c = fig2_circuit();
  const NoiseBindings b = build_bindings(c, ErrorModelConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(rc_output_state(c, b).trace());
}
BENCHMARK(BM_RcOutputStateFig2)->Unit(benchmark::kMillisecond);

void BM_TwoSampleTest(benchmark::State& state) {
  const auto kind = state.range(0) == 0 ? TestKind::KS : TestKind::ES;
  const auto m = static_cast<std::size_t>(state.range(1));
  Rng rng = make_stream(3);
  std::vector<double> xs(m), ys(m);
  for (auto& x : xs) x = static_cast<double>(rng() % 1024);
  for (auto& y : ys) y = static_cast<double>(rng() % 1024);
  for (auto _ : state) benchmark::DoNotOptimize(run_test(kind, xs, ys, 0.05).p_value);
  state.SetLabel(kind == TestKind::KS ? "ks" : "es");
}
BENCHMARK(BM_TwoSampleTest)->ArgsProduct({{0, 1}, {400, 4000}})->ArgNames({"es", "M"});

}  // namespace

BENCHMARK_MAIN();
