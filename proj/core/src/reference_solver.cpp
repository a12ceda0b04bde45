#include "ghpctrl/reference_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ghpctrl {

namespace {

// Jacobian (dense) of the reduced zone balance with respect to Z.
MatrixXd balance_jacobian(const BuildingGraph& g) {
  const int n = g.size();
  MatrixXd J = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double diag = 1.0 / g.zones[static_cast<std::size_t>(i)].R_out;
    for (const auto& [j, R] : g.neighbors(i)) {
      diag += 1.0 / R;
      J(i, j) += 1.0 / R;
    }
    J(i, i) = -diag;
  }
  return J;
}

}  // namespace

ReferenceSolution solve_reference(const SteadyStateProblem& problem,
                                  const SolveOptions& options) {
  problem.validate();
  const int n = problem.n_zones();
  const bool general = problem.kind == ScenarioKind::flow_and_supply;
  const GhpParams& ghp = problem.ghp;
  const double sgn = ghp.mode == Mode::heating ? 1.0 : -1.0;
  const double c_w = ghp.c_w;

  const MatrixXd J = balance_jacobian(problem.graph);
  const MatrixXd Jt = J.transpose();
  VectorXd r_w(n), T_set(n), q_max(n), R_af(n), inflow(n);
  for (int i = 0; i < n; ++i) {
    const ZoneParams& z = problem.graph.zones[static_cast<std::size_t>(i)];
    r_w[i] = z.comfort_weight;
    T_set[i] = z.T_set;
    q_max[i] = z.q_max;
    R_af[i] = z.R_af;
    inflow[i] = problem.T_out / z.R_out + problem.Q[i];
  }
  const VectorXd bound_coef = q_max * c_w;                       // d g_up / d Z
  const VectorXd upper_u_coef =
      (VectorXd::Ones(n) + bound_coef.cwiseProduct(R_af));       // d g_up / d u

  // deterministic start: Z at the set points, u from the zone balance
  VectorXd Z = T_set;
  VectorXd u = -(J * Z + inflow);
  for (int i = 0; i < n; ++i) {
    u[i] = sgn * std::max(0.0, sgn * u[i]);
  }
  double Ts = general ? 0.5 * (ghp.T_s_min + ghp.T_s_max) : problem.T_supply_fixed;
  const double Ts_cap = std::min(ghp.T_s_max + 5.0, ghp.cop_b / ghp.cop_a - 1.0);
  const double Ts_floor = ghp.T_s_min - 5.0;
  VectorXd zeta = VectorXd::Zero(n);
  VectorXd mu_up = VectorXd::Zero(n);
  VectorXd mu_lo = VectorXd::Zero(n);
  double nu_up = 0.0, nu_lo = 0.0;

  const double alpha = options.primal_step;
  const double beta = options.dual_step;
  const double rho = options.penalty;

  const auto assemble = [&](PrimalDualPoint& p) {
    p.Z = Z;
    p.u = u;
    p.Zf = Z + R_af.cwiseProduct(u);
    p.T_supply = Ts;
    p.zeta = zeta;
    p.lambda = zeta + sgn * R_af.cwiseProduct(bound_coef).cwiseProduct(mu_up);
    p.mu_up = mu_up;
    p.mu_lo = mu_lo;
    p.nu_up = nu_up;
    p.nu_lo = nu_lo;
  };

  double best_residual = std::numeric_limits<double>::infinity();
  PrimalDualPoint point;
  for (long it = 0; it < options.max_iterations; ++it) {
    const double cop_val = cop(ghp, Ts);
    // augmented multipliers
    VectorXd h = J * Z + u + inflow;
    VectorXd g_up = sgn * (upper_u_coef.cwiseProduct(u) + bound_coef.cwiseProduct(Z) -
                           bound_coef * Ts);
    VectorXd m_h = zeta + rho * h;
    VectorXd m_up = (mu_up + rho * g_up).cwiseMax(0.0);
    VectorXd m_lo = (mu_lo + rho * (-sgn) * u).cwiseMax(0.0);

    VectorXd gZ = r_w.cwiseProduct(Z - T_set) + Jt * m_h +
                  sgn * bound_coef.cwiseProduct(m_up);
    VectorXd gU(n);
    for (int i = 0; i < n; ++i) {
      const double grad_energy = problem.kind == ScenarioKind::flow_only
                                     ? problem.s * sgn / cop_val
                                     : 2.0 * problem.s * u[i] / cop_val;
      gU[i] = grad_energy + m_h[i] + sgn * upper_u_coef[i] * m_up[i] - sgn * m_lo[i];
    }
    Z -= alpha * gZ;
    u -= alpha * gU;
    if (general) {
      const double gTs = ghp.cop_a * problem.s * u.squaredNorm() / (cop_val * cop_val) -
                         sgn * bound_coef.dot(m_up) +
                         std::max(0.0, nu_up + rho * (Ts - ghp.T_s_max)) -
                         std::max(0.0, nu_lo + rho * (ghp.T_s_min - Ts));
      Ts = std::clamp(Ts - alpha * gTs, Ts_floor, Ts_cap);
    }

    // projected dual ascent at the new primal point
    h = J * Z + u + inflow;
    g_up = sgn * (upper_u_coef.cwiseProduct(u) + bound_coef.cwiseProduct(Z) -
                  bound_coef * Ts);
    zeta += beta * h;
    mu_up = (mu_up + beta * g_up).cwiseMax(0.0);
    mu_lo = (mu_lo + beta * (-sgn) * u).cwiseMax(0.0);
    if (general) {
      nu_up = std::max(0.0, nu_up + beta * (Ts - ghp.T_s_max));
      nu_lo = std::max(0.0, nu_lo + beta * (ghp.T_s_min - Ts));
    }

    if ((it + 1) % options.check_every == 0) {
      assemble(point);
      const KktReport rep = kkt_residual(problem, point);
      best_residual = std::min(best_residual, rep.summary);
      if (rep.summary < options.tolerance) {
        ReferenceSolution sol;
        sol.point = point;
        sol.objective_value = objective(problem, point);
        sol.kkt = rep;
        sol.iterations = it + 1;
        return sol;
      }
    }
  }
  throw NumericError("solve_reference: no convergence within iteration cap; best residual " +
                     std::to_string(best_residual));
}

}  // namespace ghpctrl
