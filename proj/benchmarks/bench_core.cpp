#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ccmap/datasets.hpp"
#include "ccmap/iqp.hpp"
#include "ccmap/mmd.hpp"
#include "ccmap/spectrum.hpp"
#include "ccmap/wht.hpp"

using namespace ccmap;

static void BM_Fwht(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<double> v(std::size_t{1} << n);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& x : v) x = u(rng);
  for (auto _ : state) {
    fwht_inplace(std::span<double>(v));
    benchmark::DoNotOptimize(v.data());
  }
  state.SetComplexityN(static_cast<benchmark::IterationCount>(v.size()));
}
BENCHMARK(BM_Fwht)->DenseRange(10, 20, 5);

static void BM_ExactDistribution(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto c = random_circuit(n, available_subsets(n, 2), 2, 1);
  for (auto _ : state) benchmark::DoNotOptimize(exact_distribution(c).probs.data());
}
BENCHMARK(BM_ExactDistribution)->Arg(8)->Arg(12)->Arg(16);

static void BM_MmdGradient(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto c = random_circuit(n, available_subsets(n, 2), 2, 2);
  const auto target = all_z_expectations(random_circuit(n, available_subsets(n, 2), 2, 3));
  const auto coeffs = pauli_coefficients(n, default_sigma(n));
  for (auto _ : state) benchmark::DoNotOptimize(mmd_loss_and_gradient(c, target, coeffs).loss);
}
BENCHMARK(BM_MmdGradient)->Arg(8)->Arg(12);

static void BM_MmdRaw(benchmark::State& state) {
  const auto a = iid_uniform(16, static_cast<std::size_t>(state.range(0)), 1);
  const auto b = iid_uniform(16, static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(mmd_raw(a, b, {2.0, MmdEstimator::biased}));
}
BENCHMARK(BM_MmdRaw)->Arg(500)->Arg(2000);

static void BM_QcliExact(benchmark::State& state) {
  const auto d = iid_uniform(static_cast<int>(state.range(0)), 10000, 1);
  for (auto _ : state) benchmark::DoNotOptimize(qcli_exact(d).qcli);
}
BENCHMARK(BM_QcliExact)->Arg(12)->Arg(16);

static void BM_QcliMc(benchmark::State& state) {
  const auto d = iid_uniform(static_cast<int>(state.range(0)), 10000, 1);
  for (auto _ : state) benchmark::DoNotOptimize(qcli_mc(d, 20000, 1).qcli);
}
BENCHMARK(BM_QcliMc)->Arg(14)->Arg(40)->Unit(benchmark::kMillisecond);
