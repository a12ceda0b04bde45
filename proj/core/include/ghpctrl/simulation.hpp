#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ghpctrl/controller1.hpp"
#include "ghpctrl/controller2.hpp"
#include "ghpctrl/plant.hpp"
#include "ghpctrl/problem.hpp"
#include "ghpctrl/reference_solver.hpp"

namespace ghpctrl {

/// Everything needed for one deterministic closed-loop run.
struct Scenario {
  BuildingGraph graph;
  GhpParams ghp;
  Disturbances disturbances;
  ScenarioKind kind = ScenarioKind::flow_only;
  CtrlGains gains;
  bool extra_dynamics = true;
  /// Drops zone-to-zone coupling: the decentralized variant in scenario I,
  /// the reduced-communication variant in scenario II.
  bool drop_zone_links = false;

  PiecewiseProfile T_supply_profile = PiecewiseProfile::constant(40.0);  ///< scenario I
  PiecewiseProfile s_schedule = PiecewiseProfile::constant(0.0);
  std::vector<PiecewiseProfile> T_set_profiles;  ///< empty: constant zone set points

  double dt = 0.25;
  double horizon = 3600.0;
  double initial_temperature = 15.0;  ///< uniform plant start [degC]
  double tv_burn_in = 0.0;            ///< flow total-variation burn-in [s]
  double settle_window = 600.0;
  double settle_tol = 1e-6;
  double settle_kkt_tol = 1e-4;    ///< residual bound for declaring settled
  double settle_plant_tol = 1e-6;  ///< plant derivative bound for settled
  int output_stride = 1;              ///< record every k-th step

  /// Optional full joint-state start (plant block then controller blocks,
  /// layout as in SimulationTrace::ctrl_states); used by fixed-point and
  /// order-of-accuracy tests.
  std::optional<VectorXd> initial_joint_state;

  void validate() const;
  int steps() const;
  double T_set_at(int zone, double t) const;
  /// Joint state dimension: plant + zone controllers (+ compressor).
  int joint_size() const;
  int zone_block_size() const { return kind == ScenarioKind::flow_only
                                           ? ZoneCtrl1State::kCount
                                           : ZoneCtrl2State::kCount; }
  int plant_block_size() const;
};

struct WarningEvent {
  double time = 0.0;
  int zone = -1;  ///< -1 when not zone specific
  std::string kind;
  double value = 0.0;
};

/// Per-sample flag bits in SimulationTrace::flags.
enum TraceFlag : int {
  kFlagModeViolation = 1,   ///< supply temperature on the wrong side of a floor
  kFlagSupplyBoxExcursion = 2,
};

/// Time-indexed record of a closed-loop run. Rows are the recorded samples
/// (every output_stride-th step plus the final step); energy and flow
/// total-variation are accumulated at full step resolution.
struct SimulationTrace {
  VectorXd times;
  MatrixXd T_zone, T_floor, T_water;  ///< samples x zones
  MatrixXd q_applied;                 ///< clamped flows sent to the plant
  MatrixXd Q_dist;                    ///< exogenous gains at sample times
  VectorXd T_supply, T_out;
  VectorXd power;         ///< instantaneous electrical power [kW]
  VectorXd energy_kwh;    ///< cumulative electrical energy [kWh]
  Eigen::VectorXi flags;
  MatrixXd ctrl_states;   ///< samples x (zone blocks [+ compressor block])
  VectorXd terminal_state;  ///< full joint state at the final step
  VectorXd tv_q;            ///< per-zone total variation of applied flow
  std::vector<WarningEvent> warnings;

  bool completed = false;
  std::string abort_reason;
  double dt = 0.0;
  int stride = 1;
  ScenarioKind kind = ScenarioKind::flow_only;

  int samples() const { return static_cast<int>(times.size()); }
};

/// Deterministic closed-loop integration of plant + controllers with classic
/// RK4 on the coupled ODE. Controller inputs (measurements, neighbor values,
/// broadcast supply temperature) are consistent snapshots of the integration
/// stage being evaluated, so results do not depend on zone ordering. Numeric
/// failures abort with a partial trace (completed = false).
SimulationTrace run_closed_loop(const Scenario& scenario);

struct SettlingReport {
  bool settled = false;  ///< implies both residuals are within their bounds
  double settling_time = 0.0;
  double terminal_kkt = 0.0;
  double terminal_plant_residual = 0.0;
};

/// Settled when every recorded joint state in the trailing window stays
/// within tol_state (max norm) of the terminal state AND the terminal KKT
/// and plant residuals (evaluated against the terminal-time problem) are
/// within the scenario's settle_kkt_tol / settle_plant_tol. A state that
/// merely stops moving without satisfying optimality does not count.
SettlingReport detect_settling(const Scenario& scenario, const SimulationTrace& trace,
                               double tol_state, double window);

struct ComparisonReport {
  VectorXd max_dT;      ///< per-zone max |T_a - T_b| over the grid
  double d_energy = 0.0;  ///< terminal cumulative-energy difference (a - b)
  VectorXd tv_a, tv_b;  ///< per-zone flow total variation of each run
};
/// Exact metrics on two runs over identical time grids.
ComparisonReport compare_runs(const SimulationTrace& a, const SimulationTrace& b);

/// Steady-state problem the closed loop should have solved at the end of the
/// trace: terminal-time disturbances, weight and supply temperature. For
/// variants without zone links the problem drops the edges and folds the
/// realized inter-zone flux into the heat gains (the decoupled controller
/// optimizes against that effective disturbance).
SteadyStateProblem terminal_problem(const Scenario& scenario, const SimulationTrace& trace);

/// Primal-dual point reconstructed from the terminal controller and plant
/// states (multiplier zeta rebuilt from its measurement-free transform).
PrimalDualPoint terminal_point(const Scenario& scenario, const SimulationTrace& trace);

/// Joint state whose plant and controller parts sit exactly at a primal-dual
/// point (water temperatures from the floor balance, damping states at their
/// companions). Used to start runs at an equilibrium.
VectorXd joint_state_from(const Scenario& scenario, const PrimalDualPoint& point);

}  // namespace ghpctrl
