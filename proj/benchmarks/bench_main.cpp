#include <random>

#include <benchmark/benchmark.h>

#include "ddasr/btas.hpp"
#include "ddasr/light_field.hpp"
#include "ddasr/network.hpp"

namespace {

using namespace ddasr;

LightField noise_lf(int A, int H, int W) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  LightField lf(A, A, H, W);
  for (float& x : lf.data()) {
    x = u(rng);
  }
  return lf;
}

void BM_MacpiFromSai(benchmark::State& state) {
  const int A = static_cast<int>(state.range(0));
  const LightField lf = noise_lf(A, 128, 128);
  for (auto _ : state) {
    benchmark::DoNotOptimize(macpi_from_sai(lf));
  }
  state.SetBytesProcessed(state.iterations() * static_cast<int64_t>(lf.size() * sizeof(float)));
}
BENCHMARK(BM_MacpiFromSai)->Arg(2)->Arg(5)->Arg(9);

void BM_SaiFromMacpi(benchmark::State& state) {
  const int A = static_cast<int>(state.range(0));
  const MacPI m = macpi_from_sai(noise_lf(A, 128, 128));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sai_from_macpi(m));
  }
}
BENCHMARK(BM_SaiFromMacpi)->Arg(2)->Arg(5)->Arg(9);

void BM_BtasShiftOracle(benchmark::State& state) {
  const BlockSchedule s = make_schedule(5, 2, 3, 9);
  const LightField in = noise_lf(5, 64, 64);
  BtasOptions opt;
  if (state.range(0) > 1) {
    opt.execution = Execution::kParallel;
    opt.threads = static_cast<int>(state.range(0));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_btas(in, shift_oracle_lvn(1), s, opt));
  }
}
BENCHMARK(BM_BtasShiftOracle)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_ForwardReduced(benchmark::State& state) {
  NetworkConfig cfg;
  cfg.channels = static_cast<int>(state.range(0));
  cfg.stage_counts = {1, 1, 2, 1};
  torch::manual_seed(0);
  ModelState model(cfg);
  const LightField in = noise_lf(2, 32, 32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ddasr_forward(in, model));
  }
}
BENCHMARK(BM_ForwardReduced)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
