// OpenMP kernels against their serial references, plus multi-chain throughput.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include <omp.h>

#include "lmc/diagnostics.hpp"
#include "lmc/samplers.hpp"

namespace {

std::vector<double> ar1_series(std::size_t n)
{
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z;
    std::vector<double> x(n);
    double prev = 0.0;
    for (double& v : x) {
        prev = 0.9 * prev + z(rng);
        v = prev;
    }
    return x;
}

std::vector<double> box_samples(std::size_t n)
{
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    std::vector<double> x(2 * n);
    for (double& v : x) {
        v = u(rng);
    }
    return x;
}

const lmc::BoxSpec kBox{1.0, 1.0, 2, 2};

void BM_AcfParallel(benchmark::State& state)
{
    const auto x = ar1_series(50000);
    for (auto _ : state) {
        benchmark::DoNotOptimize(lmc::autocorrelation(x, state.range(0)));
    }
}
BENCHMARK(BM_AcfParallel)->Arg(200)->Arg(2000);

void BM_AcfSerial(benchmark::State& state)
{
    const auto x = ar1_series(50000);
    for (auto _ : state) {
        benchmark::DoNotOptimize(lmc::reference::autocorrelation(x, state.range(0)));
    }
}
BENCHMARK(BM_AcfSerial)->Arg(200)->Arg(2000);

void BM_HistogramParallel(benchmark::State& state)
{
    const auto s = box_samples(200000);
    for (auto _ : state) {
        benchmark::DoNotOptimize(lmc::histogram2d(s, kBox, 32));
    }
}
BENCHMARK(BM_HistogramParallel);

void BM_HistogramSerial(benchmark::State& state)
{
    const auto s = box_samples(200000);
    for (auto _ : state) {
        benchmark::DoNotOptimize(lmc::reference::histogram2d(s, kBox, 32));
    }
}
BENCHMARK(BM_HistogramSerial);

void BM_FisherParallel(benchmark::State& state)
{
    const auto s = box_samples(200000);
    const lmc::ParticleBoxTarget box(kBox);
    for (auto _ : state) {
        benchmark::DoNotOptimize(lmc::empirical_fisher(box, s));
    }
}
BENCHMARK(BM_FisherParallel);

void BM_FisherSerial(benchmark::State& state)
{
    const auto s = box_samples(200000);
    const lmc::ParticleBoxTarget box(kBox);
    for (auto _ : state) {
        benchmark::DoNotOptimize(lmc::reference::empirical_fisher(box, s));
    }
}
BENCHMARK(BM_FisherSerial);

// Eight adaptive chains on the box target, distributed over range(0) threads.
void BM_Chains(benchmark::State& state)
{
    const lmc::ParticleBoxTarget box(kBox);
    const int threads = static_cast<int>(state.range(0));
    for (auto _ : state) {
        std::vector<lmc::Chain> chains(8);
#pragma omp parallel for num_threads(threads) schedule(dynamic, 1)
        for (int k = 0; k < 8; ++k) {
            chains[k] = lmc::run_chain(lmc::AdaptiveConfig{}, box, 20000, 0,
                                       {0.25, 0.25}, 7, static_cast<std::uint64_t>(k));
        }
        benchmark::DoNotOptimize(chains);
    }
}
BENCHMARK(BM_Chains)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
