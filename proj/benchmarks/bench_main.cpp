// Microbenchmarks for the hot paths: equilibrium solving, single rounds,
// whole trials, pmf evaluation, and kernel range extraction.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "coalesce/analysis.h"
#include "coalesce/dynamics.h"
#include "coalesce/game.h"
#include "coalesce/payoff.h"
#include "coalesce/rng.h"

namespace {

using namespace coalesce;

const PayoffSpec& reference_spec() {
  static const PayoffSpec spec = PayoffSpec::power_law(0.8, 1.0, 0.75);
  return spec;
}

std::vector<std::vector<double>> reference_states(std::int64_t n) {
  rng::Stream stream = rng::init_stream(42);
  return generate_states(n, 2, InitRule::box(0.0, 10.0), stream);
}

void BM_SolveNe2x2(benchmark::State& state) {
  const StageGame game = build_game(reference_spec(), 4.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_ne_2x2(game.payoff_a, game.payoff_b));
}
BENCHMARK(BM_SolveNe2x2);

void BM_ClosedFormNe(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(closed_form_ne(reference_spec(), 4.0));
}
BENCHMARK(BM_ClosedFormNe);

void BM_PlayRound(benchmark::State& state) {
  rng::Stream stream(7);
  for (auto _ : state) {
    Population pop;
    pop.groups = {{0, 1, {0.0, 0.0}}, {1, 1, {3.0, 4.0}}};
    pop.next_id = 2;
    benchmark::DoNotOptimize(
        play_round(pop, {0, 1}, reference_spec(), 1e-12, stream));
  }
}
BENCHMARK(BM_PlayRound);

void BM_RunTrial(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  const auto states = reference_states(n);
  const auto [xi_lo, xi_hi] = xi_range(states);
  const ProbBounds bounds = kernel_bounds(reference_spec(), xi_lo, xi_hi);
  const TrialSetup setup{reference_spec(), states, PairPolicy::Uniform,
                         1e-12, step_cap(n, 50.0, bounds), false};
  std::uint64_t trial = 0;
  for (auto _ : state) {
    rng::Stream stream = rng::trial_stream(42, trial++);
    benchmark::DoNotOptimize(run_trial(setup, stream));
  }
}
BENCHMARK(BM_RunTrial)->Arg(5)->Arg(20)->Arg(50);

void BM_TheoryPmf(benchmark::State& state) {
  const TheoreticalDist law(20, 0.64);
  for (auto _ : state) {
    double total = 0.0;
    for (std::int64_t t = 19; t < 119; ++t) total += law.pmf(t);
    benchmark::DoNotOptimize(total);
  }
}
BENCHMARK(BM_TheoryPmf);

void BM_KernelBounds(benchmark::State& state) {
  const PayoffSpec spec = PayoffSpec::polynomial({1.0, 1.0}, {0.5});
  for (auto _ : state)
    benchmark::DoNotOptimize(kernel_bounds(spec, 1.0, 2.0));
}
BENCHMARK(BM_KernelBounds);

}  // namespace

BENCHMARK_MAIN();
