// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include "evtol/discharge_prediction.hpp"
#include "evtol/dqn.hpp"
#include "evtol/flight_profile.hpp"
#include "evtol/oracle.hpp"

using namespace evtol;

namespace {

prediction::Observation observation() {
  battery::BatteryParams p;
  p.q_max = 6100.0;
  p.r0 = 0.27;
  const auto leg = flight::make_leg({0, 0}, {30, 0}, 500, -13);
  Rng rng(1);
  return prediction::observe(p, flight::build_leg_profile(leg, flight::calibrated_kappa()), 1.0, 0.005, rng);
}

void BM_GridScan(benchmark::State& state) {
  const auto obs = observation();
  for (auto _ : state) benchmark::DoNotOptimize(prediction::grid_scan(obs));
}

void BM_GridScanSerial(benchmark::State& state) {
  const auto obs = observation();
  for (auto _ : state) benchmark::DoNotOptimize(prediction::grid_scan_serial(obs));
}

struct OracleCase {
  mission::MissionMap map = mission::generate_map(5, 4, 12.0);
  mission::ScenarioConfig cfg;
  battery::BatteryParams params;
  OracleCase() {
    params.q_max = 5800.0;
    params.r0 = 0.3;
  }
};

void BM_OracleSolve(benchmark::State& state) {
  const OracleCase c;
  for (auto _ : state) benchmark::DoNotOptimize(oracle::solve(c.map, c.cfg, c.params).value);
}

void BM_OracleSolveSerial(benchmark::State& state) {
  const OracleCase c;
  for (auto _ : state) benchmark::DoNotOptimize(oracle::solve_serial(c.map, c.cfg, c.params).value);
}

struct EvalCase {
  mission::MissionMap map = mission::generate_map(5, 4, 12.0);
  dqn::TaskFactory factory;
  dqn::Mlp net;
  EvalCase() {
    mission::EnvConfig env;
    env.radius_nm = 12.0;
    factory = dqn::mission_task_factory(map, {}, env);
    Rng rng(3);
    net = dqn::Mlp({dqn::state_dim(map.size()), 64, 64, mission::action_count(map.size())}, rng);
  }
};

void BM_Evaluate(benchmark::State& state) {
  const EvalCase c;
  for (auto _ : state) {
    benchmark::DoNotOptimize(dqn::evaluate(dqn::greedy_policy(c.net), c.factory, 64, 7).mean_reward);
  }
}

void BM_EvaluateSerial(benchmark::State& state) {
  const EvalCase c;
  for (auto _ : state) {
    benchmark::DoNotOptimize(dqn::evaluate_serial(dqn::greedy_policy(c.net), c.factory, 64, 7).mean_reward);
  }
}

}  // namespace

BENCHMARK(BM_GridScan)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_GridScanSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_OracleSolve)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_OracleSolveSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Evaluate)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_EvaluateSerial)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
