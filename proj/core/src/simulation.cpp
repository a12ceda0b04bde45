#include "ghpctrl/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "coupled.hpp"

namespace ghpctrl {

void Scenario::validate() const {
  const int n = graph.size();
  ghp.validate();
  disturbances.validate(n);
  gains.validate(n, /*allow_zero_extra=*/!extra_dynamics);
  if (!(dt > 0.0)) throw StructuralError("scenario: dt must be > 0");
  if (!(horizon >= dt)) throw StructuralError("scenario: horizon must be >= dt");
  if (output_stride < 1) throw StructuralError("scenario: output_stride must be >= 1");
  if (!T_set_profiles.empty() && static_cast<int>(T_set_profiles.size()) != n) {
    throw StructuralError("scenario: T_set profile count must match zones");
  }
  if (tv_burn_in < 0.0 || tv_burn_in > horizon) {
    throw StructuralError("scenario: tv_burn_in must lie within the horizon");
  }
  if (s_schedule.min_value() < 0.0) {
    throw StructuralError("scenario: energy weight schedule must be >= 0");
  }
  if (initial_joint_state && initial_joint_state->size() != joint_size()) {
    throw StructuralError("scenario: initial joint state has wrong dimension");
  }
  if (kind == ScenarioKind::flow_only) {
    // the fixed supply profile must keep the COP positive throughout
    for (double v : T_supply_profile.values()) cop(ghp, v);
  }
}

int Scenario::steps() const {
  const int k = static_cast<int>(std::llround(horizon / dt));
  return std::max(1, k);
}

double Scenario::T_set_at(int zone, double t) const {
  if (T_set_profiles.empty()) return graph.zones[static_cast<std::size_t>(zone)].T_set;
  return T_set_profiles[static_cast<std::size_t>(zone)](t);
}

int Scenario::plant_block_size() const {
  return 3 * graph.size() + (graph.wall_states ? graph.edge_count() : 0);
}

int Scenario::joint_size() const {
  const int n = graph.size();
  int size = plant_block_size() + n * zone_block_size();
  if (kind == ScenarioKind::flow_and_supply) size += CompressorState::kCount;
  return size;
}

namespace {

struct MonolithicStepper {
  detail::CoupledSystem sys;
  VectorXd x;

  explicit MonolithicStepper(const Scenario& sc)
      : sys(sc), x(detail::default_initial_state(sc)) {}

  const VectorXd& state() const { return x; }
  void advance(double t, double dt) {
    const Scenario& sc = sys.scenario();
    x = rk4_step([this](double tq, const VectorXd& xq) { return sys.rhs(tq, xq); }, t, x,
                 dt, [&sc](VectorXd& xq) { detail::clamp_duals(sc, xq); });
  }
};

}  // namespace

SimulationTrace run_closed_loop(const Scenario& scenario) {
  scenario.validate();
  MonolithicStepper stepper(scenario);
  return detail::drive_run(scenario, stepper);
}

SettlingReport detect_settling(const Scenario& scenario, const SimulationTrace& trace,
                               double tol_state, double window) {
  if (!(window < scenario.horizon)) {
    throw StructuralError("detect_settling: window must be smaller than the horizon");
  }
  const int m = trace.samples();
  if (m < 2) throw StructuralError("detect_settling: trace too short");

  const auto sample = [&](int row) {
    const int nz = static_cast<int>(trace.T_zone.cols());
    VectorXd v(3 * nz + trace.ctrl_states.cols());
    v.segment(0, nz) = trace.T_zone.row(row).transpose();
    v.segment(nz, nz) = trace.T_floor.row(row).transpose();
    v.segment(2 * nz, nz) = trace.T_water.row(row).transpose();
    v.segment(3 * nz, trace.ctrl_states.cols()) = trace.ctrl_states.row(row).transpose();
    return v;
  };

  const double t_end = trace.times[m - 1];
  const VectorXd terminal = sample(m - 1);
  SettlingReport rep;
  bool state_quiet = true;
  double settle_from = trace.times[0];
  for (int row = m - 1; row >= 0; --row) {
    const double gap = (sample(row) - terminal).cwiseAbs().maxCoeff();
    if (gap >= tol_state) {
      settle_from = row + 1 < m ? trace.times[row + 1] : t_end;
      if (trace.times[row] >= t_end - window) state_quiet = false;
      break;
    }
    settle_from = trace.times[row];
  }
  rep.settling_time = settle_from;

  const SteadyStateProblem prob = terminal_problem(scenario, trace);
  const PrimalDualPoint point = terminal_point(scenario, trace);
  rep.terminal_kkt = kkt_residual(prob, point).summary;

  const int plant_size = scenario.plant_block_size();
  const PlantState ps = unpack_state(scenario.graph, trace.terminal_state.head(plant_size));
  PlantInputs inputs;
  inputs.q = detail::applied_flows(scenario, t_end, trace.terminal_state);
  inputs.T_supply = detail::supply_at(scenario, t_end, trace.terminal_state);
  const PlantState pd = plant_rhs(ps, inputs, scenario.disturbances.T_out(t_end),
                                  scenario.disturbances.Q_at(t_end), scenario.graph,
                                  scenario.ghp);
  rep.terminal_plant_residual = pack_state(pd).cwiseAbs().maxCoeff();
  rep.settled = state_quiet && trace.completed &&
                rep.terminal_kkt <= scenario.settle_kkt_tol &&
                rep.terminal_plant_residual <= scenario.settle_plant_tol;
  return rep;
}

ComparisonReport compare_runs(const SimulationTrace& a, const SimulationTrace& b) {
  if (a.samples() != b.samples() ||
      (a.samples() > 0 && (a.times - b.times).cwiseAbs().maxCoeff() != 0.0)) {
    throw StructuralError("compare_runs: traces have different time grids");
  }
  ComparisonReport rep;
  rep.max_dT = (a.T_zone - b.T_zone).cwiseAbs().colwise().maxCoeff().transpose();
  rep.d_energy = a.energy_kwh[a.samples() - 1] - b.energy_kwh[b.samples() - 1];
  rep.tv_a = a.tv_q;
  rep.tv_b = b.tv_q;
  return rep;
}

SteadyStateProblem terminal_problem(const Scenario& scenario, const SimulationTrace& trace) {
  const double t_end = trace.times[trace.samples() - 1];
  SteadyStateProblem prob;
  prob.kind = scenario.kind;
  prob.ghp = scenario.ghp;
  prob.T_out = scenario.disturbances.T_out(t_end);
  prob.Q = scenario.disturbances.Q_at(t_end);
  prob.s = scenario.s_schedule(t_end);
  prob.T_supply_fixed = scenario.kind == ScenarioKind::flow_only
                            ? scenario.T_supply_profile(t_end)
                            : 0.0;

  BuildingGraph g = scenario.graph;
  if (g.wall_states) {
    // steady-state reduction of the wall model: doubled edge resistances
    g = g.with_scaled_edge_resistance(2.0);
  }
  if (!scenario.T_set_profiles.empty()) {
    for (int i = 0; i < g.size(); ++i) {
      g.zones[static_cast<std::size_t>(i)].T_set = scenario.T_set_at(i, t_end);
    }
  }
  if (scenario.drop_zone_links) {
    // the decoupled controller optimizes against the realized inter-zone flux
    const int last = trace.samples() - 1;
    for (int i = 0; i < g.size(); ++i) {
      double flux = 0.0;
      for (const auto& [j, R] : g.neighbors(i)) {
        flux += (trace.T_zone(last, j) - trace.T_zone(last, i)) / R;
      }
      prob.Q[i] += flux;
    }
    g = g.without_edges();
  } else {
    g.finalize();
  }
  prob.graph = g;
  return prob;
}

PrimalDualPoint terminal_point(const Scenario& scenario, const SimulationTrace& trace) {
  const VectorXd& x = trace.terminal_state;
  const double t_end = trace.times[trace.samples() - 1];
  const int n = scenario.graph.size();
  PrimalDualPoint p;
  p.Z.resize(n);
  p.u.resize(n);
  p.Zf.resize(n);
  p.zeta.resize(n);
  p.lambda.resize(n);
  p.mu_up.resize(n);
  p.mu_lo.resize(n);
  const PlantState ps =
      unpack_state(scenario.graph, x.head(scenario.plant_block_size()));
  for (int i = 0; i < n; ++i) {
    const int off = detail::zone_offset(scenario, i);
    const ZoneParams& z = scenario.graph.zones[static_cast<std::size_t>(i)];
    if (scenario.kind == ScenarioKind::flow_only) {
      const ZoneCtrl1State s = detail::load1(x, off);
      p.Z[i] = s.Z;
      p.u[i] = s.u;
      p.Zf[i] = s.Zf;
      p.zeta[i] = scenario.gains.k_zeta[i] * (s.zeta_t + z.C * ps.T_zone[i]);
      p.lambda[i] = s.lambda;
      p.mu_up[i] = s.mu_up;
      p.mu_lo[i] = s.mu_lo;
    } else {
      const ZoneCtrl2State s = detail::load2(x, off);
      p.Z[i] = s.Z;
      p.u[i] = s.u;
      p.Zf[i] = s.Zf;
      p.zeta[i] = scenario.gains.k_zeta[i] * (s.zeta_t + z.C * ps.T_zone[i]);
      p.lambda[i] = s.lambda;
      p.mu_up[i] = s.mu_up;
      p.mu_lo[i] = s.mu_lo;
    }
  }
  if (scenario.kind == ScenarioKind::flow_and_supply) {
    const int c = detail::compressor_offset(scenario);
    p.T_supply = x[c];
    p.nu_up = x[c + 1];
    p.nu_lo = x[c + 2];
  } else {
    p.T_supply = scenario.T_supply_profile(t_end);
  }
  return p;
}

VectorXd joint_state_from(const Scenario& scenario, const PrimalDualPoint& point) {
  const int n = scenario.graph.size();
  VectorXd x(scenario.joint_size());
  PlantState ps;
  ps.T_zone = point.Z;
  ps.T_floor = point.Zf;
  ps.T_water.resize(n);
  for (int i = 0; i < n; ++i) {
    const ZoneParams& z = scenario.graph.zones[static_cast<std::size_t>(i)];
    ps.T_water[i] = point.Zf[i] + z.R_fw * point.u[i];
  }
  if (scenario.graph.wall_states) {
    ps.T_wall.resize(scenario.graph.edge_count());
    for (int e = 0; e < scenario.graph.edge_count(); ++e) {
      const Edge& ed = scenario.graph.edges[static_cast<std::size_t>(e)];
      ps.T_wall[e] = 0.5 * (point.Z[ed.i] + point.Z[ed.j]);
    }
  }
  x.head(scenario.plant_block_size()) = pack_state(ps);
  for (int i = 0; i < n; ++i) {
    const int off = detail::zone_offset(scenario, i);
    const ZoneParams& z = scenario.graph.zones[static_cast<std::size_t>(i)];
    const double zeta_t = point.zeta[i] / scenario.gains.k_zeta[i] - z.C * point.Z[i];
    if (scenario.kind == ScenarioKind::flow_only) {
      ZoneCtrl1State s;
      s.Z = point.Z[i];
      s.u = point.u[i];
      s.u_hat = point.u[i];
      s.Zf = point.Zf[i];
      s.Zf_hat = point.Zf[i];
      s.zeta_t = zeta_t;
      s.lambda = point.lambda[i];
      s.mu_up = point.mu_up[i];
      s.mu_lo = point.mu_lo[i];
      detail::store1(x, off, s);
    } else {
      ZoneCtrl2State s;
      s.Z = point.Z[i];
      s.u = point.u[i];
      s.Zf = point.Zf[i];
      s.Zf_hat = point.Zf[i];
      s.zeta_t = zeta_t;
      s.lambda = point.lambda[i];
      s.mu_up = point.mu_up[i];
      s.mu_lo = point.mu_lo[i];
      detail::store2(x, off, s);
    }
  }
  if (scenario.kind == ScenarioKind::flow_and_supply) {
    const int c = detail::compressor_offset(scenario);
    x[c] = point.T_supply;
    x[c + 1] = point.nu_up;
    x[c + 2] = point.nu_lo;
  }
  return x;
}

}  // namespace ghpctrl
