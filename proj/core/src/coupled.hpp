// Internal: shared joint-state layout, the monolithic coupled ODE, and the
// trace-recording driver used by both execution paths. The agent path must
// produce bit-identical traces, so every formula that touches the joint state
// lives here or in the controller/plant modules both paths call.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ghpctrl/integrate.hpp"
#include "ghpctrl/simulation.hpp"

namespace ghpctrl::detail {

inline int zone_offset(const Scenario& sc, int i) {
  return sc.plant_block_size() + i * sc.zone_block_size();
}

inline int compressor_offset(const Scenario& sc) {
  return sc.plant_block_size() + sc.graph.size() * sc.zone_block_size();
}

inline double supply_at(const Scenario& sc, double t, const VectorXd& x) {
  return sc.kind == ScenarioKind::flow_only ? sc.T_supply_profile(t)
                                            : x[compressor_offset(sc)];
}

/// Clamped flows commanded by the controller blocks of x at time t.
inline VectorXd applied_flows(const Scenario& sc, double t, const VectorXd& x) {
  const double T_supply = supply_at(sc, t, x);
  const int n = sc.graph.size();
  VectorXd q(n);
  for (int i = 0; i < n; ++i) {
    const int off = zone_offset(sc, i);
    const double u = x[off + 1];
    const double Zf = sc.kind == ScenarioKind::flow_only ? x[off + 3] : x[off + 2];
    const double raw = recover_flow(u, T_supply, Zf, sc.ghp.c_w, sc.ghp.mode);
    q[i] = std::clamp(raw, 0.0, sc.graph.zones[static_cast<std::size_t>(i)].q_max);
  }
  return q;
}

/// Keeps projected multipliers non-negative; applied to every RK4 stage input
/// and to the combined step result in both execution paths.
void clamp_duals(const Scenario& sc, VectorXd& x);

ZoneCtrl1State load1(const VectorXd& x, int off);
void store1(VectorXd& x, int off, const ZoneCtrl1State& s);
ZoneCtrl2State load2(const VectorXd& x, int off);
void store2(VectorXd& x, int off, const ZoneCtrl2State& s);

VectorXd default_initial_state(const Scenario& sc);

/// Monolithic coupled plant + controller ODE.
class CoupledSystem {
 public:
  explicit CoupledSystem(const Scenario& sc);

  VectorXd rhs(double t, const VectorXd& x) const;
  const Scenario& scenario() const { return *sc_; }

 private:
  const Scenario* sc_;
  std::optional<FlowController> flow_ctrl_;
  std::optional<SupplyController> supply_ctrl_;
};

/// Shared closed-loop driver: steps a Stepper over the horizon and records
/// the trace (samples, warnings, energy and flow-variation accumulators).
/// Stepper provides `const VectorXd& state() const` and
/// `void advance(double t, double dt)`.
template <class Stepper>
SimulationTrace drive_run(const Scenario& sc, Stepper& stepper) {
  const int n = sc.graph.size();
  const int steps = sc.steps();
  const int stride = sc.output_stride;
  const double dt = sc.dt;
  const int plant_size = sc.plant_block_size();

  SimulationTrace tr;
  tr.dt = dt;
  tr.stride = stride;
  tr.kind = sc.kind;
  const int cap = steps / stride + 2;
  tr.times.resize(cap);
  tr.T_zone.resize(cap, n);
  tr.T_floor.resize(cap, n);
  tr.T_water.resize(cap, n);
  tr.q_applied.resize(cap, n);
  tr.Q_dist.resize(cap, n);
  tr.T_supply.resize(cap);
  tr.T_out.resize(cap);
  tr.power.resize(cap);
  tr.energy_kwh.resize(cap);
  tr.flags.resize(cap);
  const int ctrl_cols = sc.joint_size() - plant_size;
  tr.ctrl_states.resize(cap, ctrl_cols);
  tr.tv_q = VectorXd::Zero(n);

  double energy = 0.0;
  int rows = 0;
  bool mode_violation_active = false;
  bool box_excursion_active = false;

  const auto flag_bits_of = [&](double t, const VectorXd& state) {
    const PlantState ps = unpack_state(sc.graph, state.head(plant_size));
    const double T_supply = supply_at(sc, t, state);
    const double sgn = sc.ghp.mode == Mode::heating ? 1.0 : -1.0;
    int bits = 0;
    for (int i = 0; i < n; ++i) {
      if (sgn * (T_supply - ps.T_floor[i]) <= 0.0) {
        bits |= kFlagModeViolation;
        break;
      }
    }
    if (sc.kind == ScenarioKind::flow_and_supply &&
        (T_supply > sc.ghp.T_s_max + 1e-12 || T_supply < sc.ghp.T_s_min - 1e-12)) {
      bits |= kFlagSupplyBoxExcursion;
    }
    return bits;
  };

  const auto note_events = [&](double t, int bits) {
    const bool mode_now = (bits & kFlagModeViolation) != 0;
    if (mode_now && !mode_violation_active) {
      tr.warnings.push_back({t, -1, "mode-violation", 0.0});
    }
    mode_violation_active = mode_now;
    const bool box_now = (bits & kFlagSupplyBoxExcursion) != 0;
    if (box_now && !box_excursion_active) {
      tr.warnings.push_back({t, -1, "supply-box-excursion", 0.0});
    }
    box_excursion_active = box_now;
  };

  const auto record = [&](double t, const VectorXd& state, double power_now,
                          int flag_bits) {
    tr.times[rows] = t;
    const PlantState ps = unpack_state(sc.graph, state.head(plant_size));
    tr.T_zone.row(rows) = ps.T_zone.transpose();
    tr.T_floor.row(rows) = ps.T_floor.transpose();
    tr.T_water.row(rows) = ps.T_water.transpose();
    tr.q_applied.row(rows) = applied_flows(sc, t, state).transpose();
    tr.Q_dist.row(rows) = sc.disturbances.Q_at(t).transpose();
    tr.T_supply[rows] = supply_at(sc, t, state);
    tr.T_out[rows] = sc.disturbances.T_out(t);
    tr.power[rows] = power_now;
    tr.energy_kwh[rows] = energy;
    tr.flags[rows] = flag_bits;
    tr.ctrl_states.row(rows) = state.tail(ctrl_cols).transpose();
    ++rows;
  };

  try {
    VectorXd q_prev = applied_flows(sc, 0.0, stepper.state());
    double power_prev = electrical_power(
        q_prev, supply_at(sc, 0.0, stepper.state()),
        unpack_state(sc.graph, stepper.state().head(plant_size)).T_floor, sc.ghp);
    {
      const int bits = flag_bits_of(0.0, stepper.state());
      note_events(0.0, bits);
      record(0.0, stepper.state(), power_prev, bits);
    }
    for (int k = 0; k < steps; ++k) {
      const double t = k * dt;
      stepper.advance(t, dt);
      const VectorXd& x = stepper.state();
      if (!x.allFinite()) {
        throw NumericError("non-finite state at step " + std::to_string(k + 1));
      }
      const double t_next = (k + 1) * dt;
      const VectorXd q_now = applied_flows(sc, t_next, x);
      const double power_now = electrical_power(
          q_now, supply_at(sc, t_next, x),
          unpack_state(sc.graph, x.head(plant_size)).T_floor, sc.ghp);
      energy += 0.5 * (power_prev + power_now) * dt / 3600.0;
      if (t >= sc.tv_burn_in) {
        for (int i = 0; i < n; ++i) tr.tv_q[i] += std::abs(q_now[i] - q_prev[i]);
      }
      q_prev = q_now;
      power_prev = power_now;
      const int bits = flag_bits_of(t_next, x);
      note_events(t_next, bits);
      if ((k + 1) % stride == 0 || k + 1 == steps) record(t_next, x, power_now, bits);
    }
    tr.completed = true;
  } catch (const std::exception& e) {
    tr.completed = false;
    tr.abort_reason = e.what();
  }
  tr.terminal_state = stepper.state();

  tr.times.conservativeResize(rows);
  tr.T_zone.conservativeResize(rows, n);
  tr.T_floor.conservativeResize(rows, n);
  tr.T_water.conservativeResize(rows, n);
  tr.q_applied.conservativeResize(rows, n);
  tr.Q_dist.conservativeResize(rows, n);
  tr.T_supply.conservativeResize(rows);
  tr.T_out.conservativeResize(rows);
  tr.power.conservativeResize(rows);
  tr.energy_kwh.conservativeResize(rows);
  tr.flags.conservativeResize(rows);
  tr.ctrl_states.conservativeResize(rows, ctrl_cols);
  return tr;
}

}  // namespace ghpctrl::detail
