#include <benchmark/benchmark.h>

#include <vector>

#include "stablab/config.hpp"
#include "stablab/entropic.hpp"
#include "stablab/harness.hpp"
#include "stablab/positive.hpp"
#include "stablab/pricing.hpp"

using namespace stablab;

namespace {

ScenarioTree lattice(int steps, bool trinomial) {
  LatticeSpec spec = trinomial ? LatticeSpec{1.0, {2.0, 1.0, 0.5}, {0.3, 0.4, 0.3}, steps}
                               : LatticeSpec::binomial(1.0, 2.0, 0.5, 0.5, steps);
  return ScenarioTree::from_lattice(spec);
}

std::vector<double> call(const ScenarioTree& t) {
  std::vector<double> b;
  for (int leaf : t.leaves()) b.push_back(std::max(t.node(leaf).price[0] - 1.0, 0.0));
  return b;
}

void BM_PrimalExponential(benchmark::State& state) {
  ScenarioTree t = lattice(static_cast<int>(state.range(0)), true);
  std::vector<double> xi = call(t);
  UtilityOnR u = make_exponential(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_primal(t, u, xi).value);
  state.counters["leaves"] = static_cast<double>(t.leaf_count());
}
BENCHMARK(BM_PrimalExponential)->DenseRange(1, 5)->Unit(benchmark::kMillisecond);

void BM_PrimalSine(benchmark::State& state) {
  ScenarioTree t = lattice(static_cast<int>(state.range(0)), true);
  std::vector<double> xi = call(t);
  UtilityOnR u = make_perturbed_exponential(0.1, 1.0, RatioSpec{RatioKind::sine, 0.2, 1.0});
  for (auto _ : state) benchmark::DoNotOptimize(solve_primal(t, u, xi).value);
}
BENCHMARK(BM_PrimalSine)->DenseRange(1, 3)->Unit(benchmark::kMillisecond);

void BM_MinimalEntropy(benchmark::State& state) {
  ScenarioTree t = lattice(static_cast<int>(state.range(0)), true);
  UtilityOnR u = make_exponential(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(minimal_entropy_measure(t, u).multiplier);
}
BENCHMARK(BM_MinimalEntropy)->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

void BM_PowerSolve(benchmark::State& state) {
  ScenarioTree t = lattice(static_cast<int>(state.range(0)), true);
  UtilityOnRPlus u = make_power_family_member(make_log_sine_power(-3.0, 0.2, 1.0), -15.0, inverse_linear_mix(-3.0));
  UtilityField field = UtilityField::make(u, std::vector<double>(t.leaf_count(), 1.0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_power_field(t, field, 1.0).value);
}
BENCHMARK(BM_PowerSolve)->DenseRange(1, 3)->Unit(benchmark::kMillisecond);

void BM_IndifferencePrice(benchmark::State& state) {
  ScenarioTree t = lattice(2, true);
  std::vector<double> b = call(t);
  UtilityOnR u = make_exponential(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(indifference_price(t, u, 0.0, b).price);
}
BENCHMARK(BM_IndifferencePrice)->Unit(benchmark::kMillisecond);

void BM_SweepDelta(benchmark::State& state) {
  SweepSpec spec = load_spec(STABLAB_CONFIG_DIR "/binomial_sine.json");
  for (auto _ : state) benchmark::DoNotOptimize(sweep_delta(spec).rows.size());
}
BENCHMARK(BM_SweepDelta)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
