#include <benchmark/benchmark.h>

#include "ghpctrl/agents.hpp"
#include "ghpctrl/integrate.hpp"
#include "ghpctrl/plant.hpp"
#include "ghpctrl/reference_solver.hpp"
#include "ghpctrl/simulation.hpp"

using namespace ghpctrl;

namespace {

Scenario bench_scenario(ScenarioKind kind) {
  Scenario sc;
  sc.graph = reference_building();
  sc.ghp = reference_ghp();
  sc.kind = kind;
  sc.gains = CtrlGains::defaults(4);
  sc.disturbances.T_out = PiecewiseProfile::constant(5.0);
  for (int i = 0; i < 4; ++i) sc.disturbances.Q.push_back(PiecewiseProfile::constant(0.1));
  sc.T_supply_profile = PiecewiseProfile::constant(40.0);
  sc.s_schedule = PiecewiseProfile::constant(10.0);
  sc.dt = 0.25;
  sc.horizon = 3600.0;
  sc.output_stride = 240;
  return sc;
}

void bm_plant_rhs(benchmark::State& state) {
  const BuildingGraph g = reference_building();
  const GhpParams ghp = reference_ghp();
  const PlantState s = PlantState::uniform(g, 18.0);
  PlantInputs in;
  in.q = 0.5 * g.q_max_vector();
  in.T_supply = 40.0;
  const VectorXd Q = VectorXd::Constant(4, 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(plant_rhs(s, in, 5.0, Q, g, ghp));
  }
}
BENCHMARK(bm_plant_rhs);

void bm_zone_rhs(benchmark::State& state) {
  const Scenario sc = bench_scenario(ScenarioKind::flow_only);
  const FlowController ctrl(sc.graph, sc.ghp, sc.gains);
  ZoneCtrl1State x = ctrl.initial_state(0, {18.0, 18.0});
  x.u = 0.9;
  std::vector<NeighborMsg> msgs;
  for (const auto& [j, R] : sc.graph.neighbors(0)) {
    NeighborMsg m;
    m.sender = j;
    m.zeta = -2.0;
    m.T_minus_Z = 0.1;
    msgs.push_back(m);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(ctrl.zone_rhs(0, x, {18.0, 17.5}, msgs, 40.0, 21.0, 10.0));
  }
}
BENCHMARK(bm_zone_rhs);

void bm_closed_loop_hour(benchmark::State& state) {
  const Scenario sc = bench_scenario(ScenarioKind::flow_only);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_closed_loop(sc));
  }
  state.SetItemsProcessed(state.iterations() * sc.steps());
}
BENCHMARK(bm_closed_loop_hour)->Unit(benchmark::kMillisecond);

void bm_closed_loop_hour_agents(benchmark::State& state) {
  const Scenario sc = bench_scenario(ScenarioKind::flow_only);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_closed_loop_agents(sc));
  }
  state.SetItemsProcessed(state.iterations() * sc.steps());
}
BENCHMARK(bm_closed_loop_hour_agents)->Unit(benchmark::kMillisecond);

void bm_closed_loop_hour_supply(benchmark::State& state) {
  const Scenario sc = bench_scenario(ScenarioKind::flow_and_supply);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_closed_loop(sc));
  }
  state.SetItemsProcessed(state.iterations() * sc.steps());
}
BENCHMARK(bm_closed_loop_hour_supply)->Unit(benchmark::kMillisecond);

void bm_solve_reference(benchmark::State& state) {
  SteadyStateProblem p;
  p.kind = ScenarioKind::flow_only;
  p.graph = reference_building();
  p.ghp = reference_ghp();
  p.T_out = 5.0;
  p.Q = VectorXd::Zero(4);
  p.s = 10.0;
  p.T_supply_fixed = 40.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_reference(p));
  }
}
BENCHMARK(bm_solve_reference)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
