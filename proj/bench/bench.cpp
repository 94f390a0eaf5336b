// OpenMP kernels against their serial references.

#include <random>

#include <benchmark/benchmark.h>

#include "klrhop/dynamics.hpp"
#include "klrhop/experiments.hpp"

using namespace klrhop;

namespace {

PatternSet patterns(std::size_t n, std::size_t p) {
  std::mt19937_64 rng(1);
  return PatternSet::random(n, p, rng);
}

void BM_GramParallel(benchmark::State& state) {
  const auto ps = patterns(50, std::size_t(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gram_matrix(ps, KernelParams(0.1)));
}

void BM_GramSerial(benchmark::State& state) {
  const auto ps = patterns(50, std::size_t(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gram_matrix_serial(ps, KernelParams(0.1)));
}

void BM_TrainParallel(benchmark::State& state) {
  const auto ps = patterns(std::size_t(state.range(0)), std::size_t(state.range(1)));
  const TrainConfig cfg{0.1, 0.01, 50};
  for (auto _ : state) benchmark::DoNotOptimize(train_network(ps, KernelParams(0.1), cfg).alpha);
}

void BM_TrainSerial(benchmark::State& state) {
  const auto ps = patterns(std::size_t(state.range(0)), std::size_t(state.range(1)));
  const TrainConfig cfg{0.1, 0.01, 50};
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_network_serial(ps, KernelParams(0.1), cfg).alpha);
  }
}

// Incremental O(P) cache update per flip against a full O(NP) rebuild.
void BM_FlipIncremental(benchmark::State& state) {
  const auto ps = patterns(50, std::size_t(state.range(0)));
  const DualWeights w{ps, Eigen::MatrixXd::Zero(Eigen::Index(ps.size()), 50), KernelParams(0.1)};
  NetworkState st(w, ps[0]);
  std::size_t i = 0;
  for (auto _ : state) {
    st.flip(i);
    i = (i + 7) % 50;
  }
}

void BM_FlipRebuild(benchmark::State& state) {
  const auto ps = patterns(50, std::size_t(state.range(0)));
  const DualWeights w{ps, Eigen::MatrixXd::Zero(Eigen::Index(ps.size()), 50), KernelParams(0.1)};
  NetworkState st(w, ps[0]);
  BipolarVector s = ps[0];
  std::size_t i = 0;
  for (auto _ : state) {
    s.flip(i);
    st.assign(s);
    i = (i + 7) % 50;
  }
}

void BM_Trials(benchmark::State& state) {
  ExperimentConfig cfg;
  cfg.trials = 8;
  cfg.train.iterations = 100;
  cfg.threads = int(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_condition(cfg).schemes);
}

}  // namespace

BENCHMARK(BM_GramParallel)->Arg(150)->Arg(1500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GramSerial)->Arg(150)->Arg(1500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainParallel)->Args({50, 150})->Args({200, 600})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainSerial)->Args({50, 150})->Args({200, 600})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FlipIncremental)->Arg(150)->Arg(1500);
BENCHMARK(BM_FlipRebuild)->Arg(150)->Arg(1500);
BENCHMARK(BM_Trials)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
