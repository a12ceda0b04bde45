#include "ghpctrl/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace ghpctrl {

namespace {

double sign_of_mode(Mode m) { return m == Mode::heating ? 1.0 : -1.0; }

}  // namespace

void SteadyStateProblem::validate() const {
  ghp.validate();
  if (Q.size() != graph.size()) throw StructuralError("problem: Q dimension mismatch");
  if (Q.minCoeff() < 0.0) throw StructuralError("problem: heat gains must be >= 0");
  if (s < 0.0) throw StructuralError("problem: energy weight must be >= 0");
  if (kind == ScenarioKind::flow_only) {
    cop(ghp, T_supply_fixed);  // throws if the COP line is non-positive there
  }
}

double cop(const GhpParams& ghp, double T_supply) {
  const double value = ghp.cop_b - ghp.cop_a * T_supply;
  if (!(value > 0.0)) {
    throw std::domain_error("cop: non-positive COP at T_supply=" + std::to_string(T_supply));
  }
  return value;
}

double objective(const SteadyStateProblem& problem, const PrimalDualPoint& point) {
  const int n = problem.n_zones();
  if (point.Z.size() != n || point.u.size() != n || point.Zf.size() != n) {
    throw StructuralError("objective: point dimension mismatch");
  }
  const double Ts = problem.kind == ScenarioKind::flow_and_supply ? point.T_supply
                                                                  : problem.T_supply_fixed;
  const double cop_val = cop(problem.ghp, Ts);
  const double sgn = sign_of_mode(problem.ghp.mode);
  double value = 0.0;
  for (int i = 0; i < n; ++i) {
    const ZoneParams& z = problem.graph.zones[static_cast<std::size_t>(i)];
    const double dev = point.Z[i] - z.T_set;
    value += 0.5 * z.comfort_weight * dev * dev;
    if (problem.kind == ScenarioKind::flow_only) {
      value += problem.s * sgn * point.u[i] / cop_val;
    } else {
      value += problem.s * point.u[i] * point.u[i] / cop_val;
    }
  }
  return value;
}

double electrical_power(const VectorXd& q, double T_supply, const VectorXd& T_floor,
                        const GhpParams& ghp) {
  if (q.size() != T_floor.size()) throw StructuralError("electrical_power: size mismatch");
  const double cop_val = cop(ghp, T_supply);
  double heat = 0.0;
  for (int i = 0; i < q.size(); ++i) {
    heat += ghp.c_w * q[i] * std::abs(T_supply - T_floor[i]);
  }
  return heat / cop_val;
}

CauchySchwarzChain cauchy_schwarz_chain(const VectorXd& u, double T_supply,
                                        const GhpParams& ghp) {
  if (T_supply > ghp.T_s_max) {
    throw StructuralError("cauchy_schwarz_chain: T_supply above T_s_max");
  }
  const double cop_val = cop(ghp, T_supply);
  const double n = static_cast<double>(u.size());
  const double sum_abs = u.cwiseAbs().sum();
  CauchySchwarzChain chain;
  chain.sum_sq_over_cop = u.squaredNorm() / cop_val;
  chain.mean_square_bound = sum_abs * sum_abs / (n * cop_val);
  chain.cop_weighted_bound = (cop_val / n) * sum_abs * sum_abs / (cop_val * cop_val);
  chain.worst_case_bound =
      ((ghp.cop_b - ghp.cop_a * ghp.T_s_max) / n) * sum_abs * sum_abs / (cop_val * cop_val);
  const double slack = 1e-12 * (1.0 + chain.sum_sq_over_cop);
  chain.ordered = chain.sum_sq_over_cop >= chain.mean_square_bound - slack &&
                  chain.mean_square_bound >= chain.cop_weighted_bound - slack &&
                  chain.cop_weighted_bound >= chain.worst_case_bound - slack;
  return chain;
}

MatrixXd energy_hessian(const VectorXd& u, double T_supply, const GhpParams& ghp) {
  const double cop_val = cop(ghp, T_supply);
  const int n = static_cast<int>(u.size());
  MatrixXd H = MatrixXd::Zero(n + 1, n + 1);
  double corner = 0.0;
  for (int i = 0; i < n; ++i) {
    H(i, i) = 2.0 / cop_val;
    const double cross = 2.0 * ghp.cop_a * u[i] / (cop_val * cop_val);
    H(i, n) = cross;
    H(n, i) = cross;
    corner += u[i] * u[i];
  }
  H(n, n) = 2.0 * ghp.cop_a * ghp.cop_a * corner / (cop_val * cop_val * cop_val);
  return H;
}

KktReport kkt_residual(const SteadyStateProblem& problem, const PrimalDualPoint& point) {
  const int n = problem.n_zones();
  if (point.Z.size() != n || point.u.size() != n || point.Zf.size() != n ||
      point.zeta.size() != n || point.lambda.size() != n || point.mu_up.size() != n ||
      point.mu_lo.size() != n) {
    throw StructuralError("kkt_residual: point dimension mismatch");
  }
  const bool general = problem.kind == ScenarioKind::flow_and_supply;
  const double Ts = general ? point.T_supply : problem.T_supply_fixed;
  const double cop_val = cop(problem.ghp, Ts);
  const double sgn = sign_of_mode(problem.ghp.mode);
  const double c_w = problem.ghp.c_w;

  KktReport rep;
  rep.stationarity_Z.resize(n);
  rep.stationarity_u.resize(n);
  rep.stationarity_Zf.resize(n);
  rep.feas_zone_balance.resize(n);
  rep.feas_floor_balance.resize(n);
  rep.feas_flow_upper.resize(n);
  rep.feas_flow_lower.resize(n);
  rep.comp_flow_upper.resize(n);
  rep.comp_flow_lower.resize(n);

  double sum_mu_bound = 0.0;
  double sum_u_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const ZoneParams& z = problem.graph.zones[static_cast<std::size_t>(i)];
    double coupling = 1.0 / z.R_out + 1.0 / z.R_af;
    double neighbor_zeta = 0.0;
    double balance = (problem.T_out - point.Z[i]) / z.R_out +
                     (point.Zf[i] - point.Z[i]) / z.R_af + problem.Q[i];
    for (const auto& [j, R] : problem.graph.neighbors(i)) {
      coupling += 1.0 / R;
      neighbor_zeta += point.zeta[j] / R;
      balance += (point.Z[j] - point.Z[i]) / R;
    }
    rep.stationarity_Z[i] = z.comfort_weight * (point.Z[i] - z.T_set) -
                            point.zeta[i] * coupling + neighbor_zeta +
                            point.lambda[i] / z.R_af;
    const double grad_energy_u = problem.kind == ScenarioKind::flow_only
                                     ? problem.s * sgn / cop_val
                                     : 2.0 * problem.s * point.u[i] / cop_val;
    rep.stationarity_u[i] =
        grad_energy_u + point.lambda[i] + sgn * (point.mu_up[i] - point.mu_lo[i]);
    rep.stationarity_Zf[i] =
        (point.zeta[i] - point.lambda[i]) / z.R_af + sgn * point.mu_up[i] * z.q_max * c_w;

    rep.feas_zone_balance[i] = balance;
    rep.feas_floor_balance[i] = (point.Z[i] - point.Zf[i]) / z.R_af + point.u[i];
    const double g_up = sgn * (point.u[i] - z.q_max * c_w * (Ts - point.Zf[i]));
    const double g_lo = sgn * (-point.u[i]);
    rep.feas_flow_upper[i] = std::max(0.0, g_up);
    rep.feas_flow_lower[i] = std::max(0.0, g_lo);
    rep.comp_flow_upper[i] = point.mu_up[i] * g_up;
    rep.comp_flow_lower[i] = point.mu_lo[i] * g_lo;
    rep.dual_margin = std::max({rep.dual_margin, -point.mu_up[i], -point.mu_lo[i]});
    sum_mu_bound += point.mu_up[i] * z.q_max * c_w;
    sum_u_sq += point.u[i] * point.u[i];
  }
  if (general) {
    rep.stationarity_Ts = problem.ghp.cop_a * problem.s * sum_u_sq / (cop_val * cop_val) -
                          sgn * sum_mu_bound + point.nu_up - point.nu_lo;
    rep.feas_box_upper = std::max(0.0, Ts - problem.ghp.T_s_max);
    rep.feas_box_lower = std::max(0.0, problem.ghp.T_s_min - Ts);
    rep.comp_box_upper = point.nu_up * (Ts - problem.ghp.T_s_max);
    rep.comp_box_lower = point.nu_lo * (problem.ghp.T_s_min - Ts);
    rep.dual_margin = std::max({rep.dual_margin, -point.nu_up, -point.nu_lo});
  }
  rep.dual_margin = std::max(0.0, rep.dual_margin);

  double summary = rep.dual_margin;
  const auto fold = [&summary](const VectorXd& v) {
    if (v.size() > 0) summary = std::max(summary, v.cwiseAbs().maxCoeff());
  };
  fold(rep.stationarity_Z);
  fold(rep.stationarity_u);
  fold(rep.stationarity_Zf);
  fold(rep.feas_zone_balance);
  fold(rep.feas_floor_balance);
  fold(rep.feas_flow_upper);
  fold(rep.feas_flow_lower);
  fold(rep.comp_flow_upper);
  fold(rep.comp_flow_lower);
  summary = std::max({summary, std::abs(rep.stationarity_Ts), rep.feas_box_upper,
                      rep.feas_box_lower, std::abs(rep.comp_box_upper),
                      std::abs(rep.comp_box_lower)});
  rep.summary = summary;
  return rep;
}

}  // namespace ghpctrl
