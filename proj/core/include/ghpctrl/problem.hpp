#pragma once

#include <Eigen/Core>

#include "ghpctrl/building.hpp"

namespace ghpctrl {

enum class ScenarioKind {
  flow_only,        ///< scenario I: flows are controlled, T_supply is given
  flow_and_supply,  ///< scenario II: flows and T_supply are controlled
};

/// Steady-state convex program in the ancillary variables (Z, u, Z_floor
/// [, T_supply]), where u_i = c_w q_i (T_supply - Z_floor,i) is the heat
/// actually delivered to zone i's water loop:
///
///   minimize  sum_i [ 1/2 r_i (Z_i - T_set_i)^2 + s * e_i ]
///     with    e_i = |u_i| / cop(T_supply)      (flow_only)
///             e_i = u_i^2  / cop(T_supply)     (flow_and_supply, upper bound
///                                              of the squared exact energy)
///   subject to the zone and floor heat balances, 0 <= q_i <= q_max_i
///   expressed linearly in u, and the supply-temperature box (scenario II).
///
/// In heating mode |u_i| = u_i and the flow bound reads
/// 0 <= u_i <= q_max_i c_w (T_supply - Z_floor,i); cooling flips both signs.
struct SteadyStateProblem {
  ScenarioKind kind = ScenarioKind::flow_only;
  BuildingGraph graph;
  GhpParams ghp;
  double T_out = 0.0;
  VectorXd Q;
  double s = 0.0;               ///< energy weight
  double T_supply_fixed = 40.0; ///< scenario I only

  void validate() const;
  int n_zones() const { return graph.size(); }
};

/// Primal-dual candidate. Multiplier naming: zeta for the zone balance,
/// lambda for the floor balance, mu_up/mu_lo for the flow upper/lower bound,
/// nu_up/nu_lo for the supply-temperature box (scenario II only).
struct PrimalDualPoint {
  VectorXd Z;
  VectorXd u;
  VectorXd Zf;
  double T_supply = 0.0;
  VectorXd zeta;
  VectorXd lambda;
  VectorXd mu_up;
  VectorXd mu_lo;
  double nu_up = 0.0;
  double nu_lo = 0.0;
};

/// Absolute residuals of every KKT equation, grouped as in the first-order
/// optimality system; `summary` is the max norm over all entries.
struct KktReport {
  VectorXd stationarity_Z;
  VectorXd stationarity_u;
  VectorXd stationarity_Zf;
  double stationarity_Ts = 0.0;  ///< scenario II only
  VectorXd feas_zone_balance;
  VectorXd feas_floor_balance;
  VectorXd feas_flow_upper;  ///< positive part of the flow bound violation
  VectorXd feas_flow_lower;
  double feas_box_upper = 0.0;
  double feas_box_lower = 0.0;
  VectorXd comp_flow_upper;
  VectorXd comp_flow_lower;
  double comp_box_upper = 0.0;
  double comp_box_lower = 0.0;
  double dual_margin = 0.0;  ///< positive part of any multiplier negativity
  double summary = 0.0;
};

/// Coefficient of performance cop_b - cop_a * T_supply; throws
/// std::domain_error when non-positive.
double cop(const GhpParams& ghp, double T_supply);

/// Objective value at a point (dispatches on problem.kind).
double objective(const SteadyStateProblem& problem, const PrimalDualPoint& point);

/// Exact electrical power sum_i c_w q_i |T_supply - T_floor_i| / cop [kW].
double electrical_power(const VectorXd& q, double T_supply, const VectorXd& T_floor,
                        const GhpParams& ghp);

/// The inequality chain that bounds the squared exact energy by the
/// scenario-II objective term:
///   sum u^2/cop >= (sum|u|)^2/(n cop) = cop/n (sum|u|)^2/cop^2
///              >= (cop at T_s_max)/n (sum|u|)^2/cop^2.
struct CauchySchwarzChain {
  double sum_sq_over_cop = 0.0;
  double mean_square_bound = 0.0;
  double cop_weighted_bound = 0.0;
  double worst_case_bound = 0.0;
  bool ordered = false;
};
CauchySchwarzChain cauchy_schwarz_chain(const VectorXd& u, double T_supply,
                                        const GhpParams& ghp);

/// Hessian of E(u, T_supply) = sum u_i^2 / cop(T_supply), an (n+1)x(n+1)
/// arrow matrix; positive semi-definite on the admissible range.
MatrixXd energy_hessian(const VectorXd& u, double T_supply, const GhpParams& ghp);

KktReport kkt_residual(const SteadyStateProblem& problem, const PrimalDualPoint& point);

}  // namespace ghpctrl
