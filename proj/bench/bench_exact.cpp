// Serial reference versus OpenMP kernels on the cycle Ising model.
// Sequence length is the benchmark argument; the state space has 2^N states.
#include "fgs/exact.hpp"

#include <benchmark/benchmark.h>

#include <memory>

namespace {

struct Toy {
  explicit Toy(int n)
      : model(fgs::LogQuadraticEnergy::cycle(fgs::EmbeddingTable::binary_spins(), n, 0.42)),
        space(model.table(), n) {}
  fgs::LogQuadraticEnergy model;
  fgs::StateSpace space;
};

const fgs::KernelSpec kSpec{fgs::KernelKind::pncg, true, 1.0};

void BM_BuildParallel(benchmark::State& state) {
  const Toy toy(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fgs::build_transition_matrix(kSpec, toy.model, toy.space));
  }
}

void BM_BuildReference(benchmark::State& state) {
  const Toy toy(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        fgs::reference::build_transition_matrix(kSpec, toy.model, toy.space));
  }
}

void BM_MultiplyParallel(benchmark::State& state) {
  const Toy toy(static_cast<int>(state.range(0)));
  const auto p = fgs::build_transition_matrix(kSpec, toy.model, toy.space);
  for (auto _ : state) benchmark::DoNotOptimize(fgs::multiply(p, p));
}

void BM_MultiplyReference(benchmark::State& state) {
  const Toy toy(static_cast<int>(state.range(0)));
  const auto p = fgs::build_transition_matrix(kSpec, toy.model, toy.space);
  for (auto _ : state) benchmark::DoNotOptimize(fgs::reference::multiply(p, p));
}

void BM_MixingParallel(benchmark::State& state) {
  const Toy toy(static_cast<int>(state.range(0)));
  const auto p = fgs::build_transition_matrix(kSpec, toy.model, toy.space);
  const auto pi = fgs::exact_target(toy.model, toy.space);
  for (auto _ : state) benchmark::DoNotOptimize(fgs::exact_mixing_time(p, pi, 0.25));
}

void BM_MixingReference(benchmark::State& state) {
  const Toy toy(static_cast<int>(state.range(0)));
  const auto p = fgs::build_transition_matrix(kSpec, toy.model, toy.space);
  const auto pi = fgs::exact_target(toy.model, toy.space);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fgs::reference::exact_mixing_time(p, pi, 0.25, 100000));
  }
}

}  // namespace

BENCHMARK(BM_BuildParallel)->DenseRange(6, 10, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildReference)->DenseRange(6, 10, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MultiplyParallel)->DenseRange(6, 9)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MultiplyReference)->DenseRange(6, 9)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MixingParallel)->DenseRange(6, 8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MixingReference)->DenseRange(6, 8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
