// Shared fixtures and independent test oracles. Everything here must stay
// independent of the implementation paths it checks: the linear solver is
// hand-rolled, derivatives come from central differences, and the reference
// optimum can be cross-checked by exhaustive grid refinement.
#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "ghpctrl/agents.hpp"
#include "ghpctrl/config.hpp"
#include "ghpctrl/integrate.hpp"
#include "ghpctrl/plant.hpp"
#include "ghpctrl/problem.hpp"
#include "ghpctrl/reference_solver.hpp"
#include "ghpctrl/simulation.hpp"

namespace ghpctrl::test {

// -----------------------------------------------------------------------
// scenario builders around the reference four-zone building

inline Scenario scenario1(double T_out, double Q_uniform, double T_supply, double s,
                          double horizon = 4.0 * 3600.0, double dt = 0.25) {
  Scenario sc;
  sc.graph = reference_building();
  sc.ghp = reference_ghp();
  sc.kind = ScenarioKind::flow_only;
  sc.gains = CtrlGains::defaults(sc.graph.size());
  sc.disturbances.T_out = PiecewiseProfile::constant(T_out);
  for (int i = 0; i < sc.graph.size(); ++i) {
    sc.disturbances.Q.push_back(PiecewiseProfile::constant(Q_uniform));
  }
  sc.T_supply_profile = PiecewiseProfile::constant(T_supply);
  sc.s_schedule = PiecewiseProfile::constant(s);
  sc.dt = dt;
  sc.horizon = horizon;
  sc.output_stride = 40;
  return sc;
}

inline Scenario scenario2(double T_out, double Q_uniform, double s,
                          double horizon = 8.0 * 3600.0, double dt = 0.25) {
  Scenario sc = scenario1(T_out, Q_uniform, 40.0, s, horizon, dt);
  sc.kind = ScenarioKind::flow_and_supply;
  return sc;
}

inline SteadyStateProblem problem_of(const Scenario& sc, double t = 0.0) {
  SteadyStateProblem p;
  p.kind = sc.kind;
  p.graph = sc.graph;
  p.ghp = sc.ghp;
  p.T_out = sc.disturbances.T_out(t);
  p.Q = sc.disturbances.Q_at(t);
  p.s = sc.s_schedule(t);
  p.T_supply_fixed = sc.kind == ScenarioKind::flow_only ? sc.T_supply_profile(t) : 0.0;
  return p;
}

// -----------------------------------------------------------------------
// independent dense linear solve (Gaussian elimination, partial pivoting)

inline std::vector<double> gauss_solve(std::vector<std::vector<double>> A,
                                       std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(A[r][col]) > std::abs(A[pivot][col])) pivot = r;
    }
    std::swap(A[col], A[pivot]);
    std::swap(b[col], b[pivot]);
    for (int r = col + 1; r < n; ++r) {
      const double f = A[r][col] / A[col][col];
      for (int c = col; c < n; ++c) A[r][c] -= f * A[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[r];
    for (int c = r + 1; c < n; ++c) acc -= A[r][c] * x[c];
    x[r] = acc / A[r][r];
  }
  return x;
}

// -----------------------------------------------------------------------
// finite differences

inline VectorXd fd_gradient(const std::function<double(const VectorXd&)>& f,
                            const VectorXd& x, double h = 1e-6) {
  VectorXd g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

inline MatrixXd fd_hessian(const std::function<double(const VectorXd&)>& f,
                           const VectorXd& x, double h = 1e-4) {
  const int n = static_cast<int>(x.size());
  MatrixXd H(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      VectorXd xpp = x, xpm = x, xmp = x, xmm = x;
      xpp[i] += h;
      xpp[j] += h;
      xpm[i] += h;
      xpm[j] -= h;
      xmp[i] -= h;
      xmp[j] += h;
      xmm[i] -= h;
      xmm[j] -= h;
      H(i, j) = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * h * h);
    }
  }
  return H;
}

// -----------------------------------------------------------------------
// grid-refinement oracle for scenario I (flow-only): exhaustive search over
// the heat commands u with an inner linear solve for the zone targets.

struct GridRefineResult {
  double objective = 0.0;
  VectorXd u;
};

inline GridRefineResult grid_refine_flow_only(const SteadyStateProblem& p, int grid = 9,
                                              int levels = 14) {
  const int n = p.n_zones();
  // reduced zone balance: B * Z + u + inflow = 0
  std::vector<std::vector<double>> B(n, std::vector<double>(n, 0.0));
  std::vector<double> inflow(n);
  for (int i = 0; i < n; ++i) {
    const ZoneParams& z = p.graph.zones[static_cast<std::size_t>(i)];
    B[i][i] = -1.0 / z.R_out;
    for (const auto& [j, R] : p.graph.neighbors(i)) {
      B[i][i] -= 1.0 / R;
      B[i][j] += 1.0 / R;
    }
    inflow[i] = p.T_out / z.R_out + p.Q[i];
  }
  const double cop_val = cop(p.ghp, p.T_supply_fixed);

  const auto z_of_u = [&](const VectorXd& u) {
    std::vector<double> rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = -(u[i] + inflow[i]);
    const std::vector<double> z = gauss_solve(B, rhs);
    VectorXd Z(n);
    for (int i = 0; i < n; ++i) Z[i] = z[static_cast<std::size_t>(i)];
    return Z;
  };

  VectorXd lo = VectorXd::Zero(n);
  VectorXd hi(n);
  for (int i = 0; i < n; ++i) {
    const ZoneParams& z = p.graph.zones[static_cast<std::size_t>(i)];
    hi[i] = z.q_max * p.ghp.c_w * (p.T_supply_fixed - 5.0);
  }
  GridRefineResult best;
  best.objective = std::numeric_limits<double>::infinity();
  for (int level = 0; level < levels; ++level) {
    VectorXd best_u = lo;
    double best_v = std::numeric_limits<double>::infinity();
    std::vector<int> idx(n, 0);
    const auto value_at = [&](const std::vector<int>& ix) {
      VectorXd u(n);
      for (int i = 0; i < n; ++i) {
        u[i] = lo[i] + (hi[i] - lo[i]) * ix[static_cast<std::size_t>(i)] / (grid - 1);
      }
      const VectorXd Z = z_of_u(u);
      double v = 0.0;
      for (int i = 0; i < n; ++i) {
        const ZoneParams& z = p.graph.zones[static_cast<std::size_t>(i)];
        const double Zf = Z[i] + z.R_af * u[i];
        if (u[i] - z.q_max * p.ghp.c_w * (p.T_supply_fixed - Zf) > 1e-12) {
          return std::numeric_limits<double>::infinity();
        }
        v += 0.5 * z.comfort_weight * (Z[i] - z.T_set) * (Z[i] - z.T_set) +
             p.s * u[i] / cop_val;
      }
      return v;
    };
    bool done = false;
    while (!done) {
      const double v = value_at(idx);
      if (v < best_v) {
        best_v = v;
        for (int i = 0; i < n; ++i) {
          best_u[i] = lo[i] + (hi[i] - lo[i]) * idx[static_cast<std::size_t>(i)] / (grid - 1);
        }
      }
      int d = 0;
      while (d < n && ++idx[static_cast<std::size_t>(d)] == grid) {
        idx[static_cast<std::size_t>(d)] = 0;
        ++d;
      }
      done = d == n;
    }
    VectorXd span = (hi - lo) / (grid - 1);
    for (int i = 0; i < n; ++i) {
      lo[i] = std::max(0.0, best_u[i] - span[i]);
      hi[i] = best_u[i] + span[i];
    }
    best.objective = best_v;
    best.u = best_u;
  }
  return best;
}

// -----------------------------------------------------------------------
// explicit-multiplier reference loop for scenario I: integrates the zone
// balance multiplier directly from the true disturbances (the published,
// measurement-dependent form). Written independently of the production
// controller; used to confirm the measurement-free transform is exact.

inline VectorXd run_explicit_zeta_loop(
    const Scenario& sc, int steps,
    const std::function<void(int, const VectorXd&)>& observer = {}) {
  const BuildingGraph& g = sc.graph;
  const GhpParams& ghp = sc.ghp;
  const CtrlGains& k = sc.gains;
  const int n = g.size();
  const int plant = 3 * n;
  const int B = 9;
  // layout mirrors the production one, but slot 5 holds zeta itself
  VectorXd x(plant + n * B);
  for (int i = 0; i < n; ++i) {
    x[i] = sc.initial_temperature;
    x[n + i] = sc.initial_temperature;
    x[2 * n + i] = sc.initial_temperature;
    const int o = plant + i * B;
    x[o + 0] = sc.initial_temperature;  // Z
    x[o + 1] = 0.0;                     // u
    x[o + 2] = 0.0;                     // u_hat
    x[o + 3] = sc.initial_temperature;  // Zf
    x[o + 4] = sc.initial_temperature;  // Zf_hat
    x[o + 5] = 0.0;                     // zeta (explicit)
    x[o + 6] = 0.0;                     // lambda
    x[o + 7] = 0.0;                     // mu_up
    x[o + 8] = 0.0;                     // mu_lo
  }

  const auto rhs = [&](double t, const VectorXd& y) {
    const double T_out = sc.disturbances.T_out(t);
    const VectorXd Q = sc.disturbances.Q_at(t);
    const double T_s = sc.T_supply_profile(t);
    const double s = sc.s_schedule(t);
    VectorXd d(y.size());
    VectorXd q(n);
    for (int i = 0; i < n; ++i) {
      const int o = plant + i * B;
      const ZoneParams& z = g.zones[static_cast<std::size_t>(i)];
      q[i] = std::clamp(y[o + 1] / (ghp.c_w * (T_s - y[o + 3])), 0.0, z.q_max);
    }
    for (int i = 0; i < n; ++i) {
      const ZoneParams& z = g.zones[static_cast<std::size_t>(i)];
      double flux = (T_out - y[i]) / z.R_out + (y[n + i] - y[i]) / z.R_af + Q[i];
      for (const auto& [j, R] : g.neighbors(i)) flux += (y[j] - y[i]) / R;
      d[i] = flux / z.C;
      d[n + i] = ((y[i] - y[n + i]) / z.R_af + (y[2 * n + i] - y[n + i]) / z.R_fw) /
                 z.C_floor;
      d[2 * n + i] = ((y[n + i] - y[2 * n + i]) / z.R_fw +
                      ghp.c_w * q[i] * (T_s - y[n + i])) /
                     z.C_water;
    }
    for (int i = 0; i < n; ++i) {
      const int o = plant + i * B;
      const ZoneParams& z = g.zones[static_cast<std::size_t>(i)];
      double coupling = 1.0 / z.R_out + 1.0 / z.R_af;
      double zeta_nbr = 0.0;
      double balance = (T_out - y[o]) / z.R_out + (y[o + 3] - y[o]) / z.R_af + Q[i];
      for (const auto& [j, R] : g.neighbors(i)) {
        coupling += 1.0 / R;
        zeta_nbr += y[plant + j * B + 5] / R;
        balance += (y[plant + j * B] - y[o]) / R;
      }
      const double zeta = y[o + 5];
      const double bound = y[o + 1] - z.q_max * ghp.c_w * (T_s - y[o + 3]);
      d[o + 0] = k.k_Z[i] * (z.comfort_weight * (sc.T_set_at(i, t) - y[o]) +
                             zeta * coupling - zeta_nbr - y[o + 6] / z.R_af);
      d[o + 1] = k.k_u[i] * (s / (ghp.cop_a * T_s - ghp.cop_b) - y[o + 6] - y[o + 7] +
                             y[o + 8] + k.k_eu[i] * (y[o + 2] - y[o + 1]));
      d[o + 2] = k.k_eu_hat[i] * (y[o + 1] - y[o + 2]);
      d[o + 3] = k.k_Zf[i] * ((y[o + 6] - zeta) / z.R_af -
                              y[o + 7] * z.q_max * ghp.c_w +
                              k.k_eZf[i] * (y[o + 4] - y[o + 3]));
      d[o + 4] = k.k_eZf_hat[i] * (y[o + 3] - y[o + 4]);
      d[o + 5] = k.k_zeta[i] * balance;
      d[o + 6] = k.k_lambda[i] * ((y[o] - y[o + 3]) / z.R_af + y[o + 1]);
      d[o + 7] = k.k_mu_up[i] * (y[o + 7] > 0.0 ? bound : std::max(0.0, bound));
      d[o + 8] = k.k_mu_lo[i] * (y[o + 8] > 0.0 ? -y[o + 1] : std::max(0.0, -y[o + 1]));
    }
    return d;
  };
  const auto clamp = [&](VectorXd& y) {
    for (int i = 0; i < n; ++i) {
      const int o = plant + i * B;
      if (y[o + 7] < 0.0) y[o + 7] = 0.0;
      if (y[o + 8] < 0.0) y[o + 8] = 0.0;
    }
  };
  for (int s = 0; s < steps; ++s) {
    x = rk4_step(rhs, s * sc.dt, x, sc.dt, clamp);
    if (observer) observer(s + 1, x);
  }
  return x;
}

}  // namespace ghpctrl::test
