#include <benchmark/benchmark.h>

#include <limits>

#include "npthresh/npthresh.hpp"

namespace {

using namespace npthresh;

const double kInf = std::numeric_limits<double>::infinity();

Sample make_sample(Eigen::Index n) {
  RngStream rng(1234, 0);
  return dgp_three_thresholds(n, rng);
}

void BM_nw_hat(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Sample s = make_sample(n);
  const KernelConfig config = KernelConfig::resolved(n, 1, 1.0, 4.25, 1.0);
  Eigen::VectorXd at(1);
  at << 0.2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(nw_hat(s, {-kInf, kInf}, at, config));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_nw_hat)->Range(256, 4096)->Complexity(benchmark::oN);

void BM_ssr(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Sample s = make_sample(n);
  const KernelConfig config = KernelConfig::resolved(n, 1, 1.0, 4.25, 1.0);
  const RegimePartition partition({-0.7, 0.15, 0.5});
  for (auto _ : state) {
    benchmark::DoNotOptimize(ssr(s, partition, config));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_ssr)->Range(256, 4096)->Complexity(benchmark::oNSquared);

void BM_regime_test(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Sample s = make_sample(n);
  const KernelConfig config = KernelConfig::resolved(n, 1, 1.0, 4.25, 1.0);
  const WeightBox box = default_sim_box();
  for (auto _ : state) {
    benchmark::DoNotOptimize(regime_test(s, {-kInf, kInf}, 7, config, box));
  }
}
BENCHMARK(BM_regime_test)->Range(256, 2048);

void BM_estimate_one_threshold(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Sample s = make_sample(n);
  const KernelConfig config = KernelConfig::resolved(n, 1, 1.0, 4.25, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_one_threshold(
        s, RegimePartition(), {-kInf, kInf}, config, SearchConfig{}));
  }
}
BENCHMARK(BM_estimate_one_threshold)->Range(256, 2048);

void BM_detect(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Sample s = make_sample(n);
  const KernelConfig config = KernelConfig::resolved(n, 1, 1.0, 4.25, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(detect(s, config, SearchConfig{}, default_sim_box()));
  }
}
BENCHMARK(BM_detect)->Arg(512)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
