#include <benchmark/benchmark.h>

#include "qtc/bell.hpp"
#include "qtc/bundle.hpp"
#include "qtc/histories.hpp"
#include "qtc/linalg.hpp"
#include "qtc/mixtures.hpp"

namespace {

using namespace qtc;

HistoryVector random_history(int n_times, int terms, Rng& rng) {
  const TimeGrid grid = TimeGrid::uniform(static_cast<std::size_t>(n_times), 2);
  std::vector<Matrix> steps;
  for (int i = 0; i + 1 < n_times; ++i) steps.push_back(random_unitary(2, rng));
  std::vector<HistoryVector::Term> term_list;
  for (int t = 0; t < terms; ++t) {
    std::vector<Matrix> ops;
    for (int i = 0; i < n_times; ++i) ops.push_back(projector(random_state(2, rng)));
    term_list.push_back({Complex(rng.gaussian(), rng.gaussian()), std::move(ops)});
  }
  return HistoryVector(grid, BridgingSet(std::move(steps)), std::move(term_list));
}

void BM_ChainOperator(benchmark::State& state) {
  Rng rng(17);
  const HistoryVector h =
      random_history(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(chain_operator(h));
  }
}
BENCHMARK(BM_ChainOperator)->Args({4, 2})->Args({6, 4})->Args({6, 8});

void BM_Weight(benchmark::State& state) {
  Rng rng(19);
  const HistoryVector h = random_history(5, 4, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(weight(h));
  }
}
BENCHMARK(BM_Weight);

void BM_TemporalCorrelator(benchmark::State& state) {
  const Matrix rho = identity(2) / 2.0;
  const Matrix a = pauli_z();
  const Matrix b = (pauli_z() + pauli_x()) / std::sqrt(2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(temporal_correlator(rho, a, b));
  }
}
BENCHMARK(BM_TemporalCorrelator);

void BM_ChshEvaluation(benchmark::State& state) {
  const Matrix rho = identity(2) / 2.0;
  const SettingsPair s = canonical_chsh_settings();
  for (auto _ : state) {
    benchmark::DoNotOptimize(chsh_temporal(rho, s));
  }
}
BENCHMARK(BM_ChshEvaluation);

void BM_TemporalPartialTrace(benchmark::State& state) {
  Rng rng(23);
  const TimeGrid grid = TimeGrid::uniform(4, 2);
  const BridgingSet bridging = BridgingSet::trivial(3, 2);
  const Matrix p0 = projector(ket_z_plus());
  const Matrix p1 = projector(ket_z_minus());
  const Matrix anchor = projector(ket_x_plus());
  const Complex amp = 1.0 / std::sqrt(2.0);
  const HistoryVector h(grid, bridging,
                        {{amp, {anchor, p0, p0, p0}}, {amp, {anchor, p1, p1, p1}}});
  for (auto _ : state) {
    benchmark::DoNotOptimize(temporal_partial_trace(h, {"t1", "t3"}));
  }
}
BENCHMARK(BM_TemporalPartialTrace);

void BM_FiberFamily(benchmark::State& state) {
  const TimeGrid grid = TimeGrid::uniform(4, 2);
  const BridgingSet bridging = BridgingSet::trivial(3, 2);
  const HistoryBundle bundle(grid, bridging, ket_z_plus(), std::optional<Vector>(ket_z_plus()));
  const std::vector<NamedObservable> settings = {{"X", pauli_x()}, {"X", pauli_x()}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(fibers_for_settings(bundle, settings));
  }
}
BENCHMARK(BM_FiberFamily);

}  // namespace

BENCHMARK_MAIN();
