#include <benchmark/benchmark.h>

#include "scla/lagrangian.hpp"
#include "scla/lp.hpp"
#include "scla/parallel.hpp"
#include "scla/queueing.hpp"
#include "scla/random.hpp"
#include "scla/rounding.hpp"
#include "scla/subproblem.hpp"

namespace {

using namespace scla;

void BM_ErlangC(benchmark::State& state) {
  const int servers = static_cast<int>(state.range(0));
  double rho = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(queueing::erlang_c_probability(rho, servers));
    rho = rho < 0.98 ? rho + 0.0137 : 0.01;
  }
}
BENCHMARK(BM_ErlangC)->Arg(1)->Arg(8)->Arg(64)->Arg(512);

void BM_CutAt(benchmark::State& state) {
  const int servers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(queueing::cut_at(0.7, servers));
}
BENCHMARK(BM_CutAt)->Arg(1)->Arg(16);

// Random feasible packing LP: max c.x s.t. A x <= b, 0 <= x <= 1.
lp::LinearProgram random_lp(std::size_t vars, std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  lp::LinearProgram p(vars);
  for (std::size_t v = 0; v < vars; ++v) {
    p.objective[v] = -rng.uniform(0.0, 10.0);
    p.upper[v] = 1.0;
  }
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<double> a(vars);
    for (double& c : a) c = rng.uniform(0.0, 5.0);
    p.add_row(std::move(a), lp::Relation::less_equal, rng.uniform(5.0, 20.0));
  }
  return p;
}

void BM_SolveLp(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const lp::LinearProgram p = random_lp(n, n / 2, 7);
  for (auto _ : state) benchmark::DoNotOptimize(lp::solve_lp(p));
}
BENCHMARK(BM_SolveLp)->Arg(20)->Arg(80)->Arg(200)->Unit(benchmark::kMicrosecond);

Instance bench_instance(int households) {
  ScenarioConfig sc;
  sc.seed = 3;
  sc.n_households = households;
  sc.n_taz = 16;
  sc.n_depots = 4;
  sc.params.k_c = 3;
  return Instance(generate_scenario(sc));
}

void BM_StationSubproblem(benchmark::State& state) {
  const Instance inst = bench_instance(static_cast<int>(state.range(0)));
  Multipliers m(inst.num_households());
  for (double& z : m.zeta) z = 150.0;
  std::size_t busiest = 0;
  for (std::size_t j = 0; j < inst.num_stations(); ++j) {
    if (inst.households_of(j).size() > inst.households_of(busiest).size()) busiest = j;
  }
  const SubproblemInput input = make_subproblem_input(inst, busiest, m);
  state.counters["households"] = static_cast<double>(inst.households_of(busiest).size());
  for (auto _ : state) benchmark::DoNotOptimize(solve_station_subproblem(input));
}
BENCHMARK(BM_StationSubproblem)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_PrimalHeuristic(benchmark::State& state) {
  const Instance inst = bench_instance(static_cast<int>(state.range(0)));
  const FractionalPoint point = FractionalPoint::empty(inst);
  for (auto _ : state) {
    Rng rng(1);
    benchmark::DoNotOptimize(primal_heuristic(inst, point, rng));
  }
}
BENCHMARK(BM_PrimalHeuristic)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_DualIteration(benchmark::State& state) {
  const Instance inst = bench_instance(100);
  ExecutionOptions opt;
  opt.partitions = {{"group", static_cast<int>(state.range(0)), std::nullopt}};
  opt.max_threads = static_cast<unsigned>(state.range(0));
  Multipliers m(inst.num_households());
  for (double& z : m.zeta) z = 150.0;
  for (auto _ : state) benchmark::DoNotOptimize(execute_iteration(inst, m, opt));
}
BENCHMARK(BM_DualIteration)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
