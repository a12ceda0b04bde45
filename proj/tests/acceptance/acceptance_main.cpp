// Acceptance suite: end-to-end verification of the closed-loop optimality,
// disturbance rejection, damping, convexity and execution-equivalence
// guarantees on the bundled scenarios. One pass/fail line per criterion;
// exit code 0 only if every criterion holds.
#include <Eigen/Eigenvalues>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "ghpctrl/agents.hpp"
#include "ghpctrl/config.hpp"
#include "ghpctrl/trace_io.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace ghpctrl;
using Clock = std::chrono::steady_clock;

namespace {

struct Criterion {
  std::string name;
  std::function<std::pair<bool, std::string>()> run;
};

fs::path g_config_dir;

LoadedConfig load(const char* name, std::vector<std::string> overrides = {}) {
  return load_config(g_config_dir / name, overrides);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

VectorXd oracle_flows(const SteadyStateProblem& p, const PrimalDualPoint& pt) {
  VectorXd q(p.n_zones());
  for (int i = 0; i < q.size(); ++i) {
    q[i] = recover_flow(pt.u[i], pt.T_supply, pt.Zf[i], p.ghp.c_w, p.ghp.mode);
  }
  return q;
}

// ---------------------------------------------------------------------------

std::pair<bool, std::string> hurwitz_sweep() {
  const auto t0 = Clock::now();
  const BuildingGraph g = reference_building();
  const GhpParams ghp = reference_ghp();
  const VectorXd q_max = g.q_max_vector();
  const std::vector<VectorXd> patterns = {
      VectorXd::Zero(4), VectorXd::Ones(4), 0.5 * VectorXd::Ones(4),
      (VectorXd(4) << 1, 0, 1, 0).finished(), (VectorXd(4) << 0, 1, 0, 1).finished()};
  int total = 0, stable = 0;
  double worst = -1e300;
  for (double scale : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    for (double T_s : {38.0, 39.0, 40.0, 41.0, 42.0}) {
      for (const VectorXd& pat : patterns) {
        PlantInputs in;
        in.q = scale * pat.cwiseProduct(q_max);
        in.T_supply = T_s;
        const StabilityReport rep =
            is_hurwitz(system_matrix(g, ghp, in, 5.0, VectorXd::Zero(4)).A);
        ++total;
        if (rep.hurwitz) ++stable;
        worst = std::max(worst, rep.spectral_abscissa);
      }
    }
  }
  const double elapsed = seconds_since(t0);
  const bool ok = stable == total && elapsed < 5.0;
  std::ostringstream detail;
  detail << stable << "/" << total << " operating points stable, max Re(eig)="
         << fmt(worst) << ", " << fmt(elapsed) << " s";
  return {ok, detail.str()};
}

std::pair<bool, std::string> equilibrium_optimality_flow_only() {
  const auto t0 = Clock::now();
  const LoadedConfig cfg = load("accept-s1-opt.cfg");
  const SimulationTrace tr = run_closed_loop(cfg.scenario);
  if (!tr.completed) return {false, "run aborted: " + tr.abort_reason};
  const SettlingReport settle =
      detect_settling(cfg.scenario, tr, cfg.scenario.settle_tol, cfg.scenario.settle_window);
  const SteadyStateProblem p = terminal_problem(cfg.scenario, tr);
  const ReferenceSolution sol = solve_reference(p);
  const int last = tr.samples() - 1;
  const double gap_T =
      (tr.T_zone.row(last).transpose() - sol.point.Z).cwiseAbs().maxCoeff();
  const double gap_Tf =
      (tr.T_floor.row(last).transpose() - sol.point.Zf).cwiseAbs().maxCoeff();
  const double gap_q =
      (tr.q_applied.row(last).transpose() - oracle_flows(p, sol.point)).cwiseAbs().maxCoeff();
  const double elapsed = seconds_since(t0);
  const bool ok = settle.settled && gap_T < 1e-3 && gap_Tf < 1e-3 && gap_q < 1e-3 &&
                  settle.terminal_kkt < 1e-4 && elapsed < 60.0;
  std::ostringstream detail;
  detail << "settled=" << (settle.settled ? "yes" : "no") << " max|dT|=" << fmt(gap_T)
         << " max|dTf|=" << fmt(gap_Tf) << " max|dq|=" << fmt(gap_q)
         << " kkt=" << fmt(settle.terminal_kkt) << ", " << fmt(elapsed) << " s";
  return {ok, detail.str()};
}

std::pair<bool, std::string> equilibrium_optimality_general() {
  const auto t0 = Clock::now();
  const LoadedConfig cfg = load("accept-s2.cfg");
  const SimulationTrace tr = run_closed_loop(cfg.scenario);
  if (!tr.completed) return {false, "run aborted: " + tr.abort_reason};
  const SettlingReport settle =
      detect_settling(cfg.scenario, tr, cfg.scenario.settle_tol, cfg.scenario.settle_window);
  const SteadyStateProblem p = terminal_problem(cfg.scenario, tr);
  const ReferenceSolution sol = solve_reference(p);
  const PrimalDualPoint terminal = terminal_point(cfg.scenario, tr);
  const int last = tr.samples() - 1;
  const double gap_T =
      (tr.T_zone.row(last).transpose() - sol.point.Z).cwiseAbs().maxCoeff();
  const double gap_q =
      (tr.q_applied.row(last).transpose() - oracle_flows(p, sol.point)).cwiseAbs().maxCoeff();
  const double gap_Ts = std::abs(terminal.T_supply - sol.point.T_supply);
  const bool box_ok = terminal.T_supply >= p.ghp.T_s_min - 1e-9 &&
                      terminal.T_supply <= p.ghp.T_s_max + 1e-9;
  const double nu_comp =
      std::max(std::abs(terminal.nu_up * (terminal.T_supply - p.ghp.T_s_max)),
               std::abs(terminal.nu_lo * (p.ghp.T_s_min - terminal.T_supply)));
  const double elapsed = seconds_since(t0);
  const bool ok = settle.settled && gap_T < 1e-3 && gap_q < 1e-3 && gap_Ts < 1e-3 &&
                  box_ok && nu_comp < 1e-6 && settle.terminal_kkt < 1e-4 &&
                  elapsed < 60.0;
  std::ostringstream detail;
  detail << "settled=" << (settle.settled ? "yes" : "no") << " max|dT|=" << fmt(gap_T)
         << " |dTs|=" << fmt(gap_Ts) << " Ts*=" << terminal.T_supply
         << " nu-comp=" << fmt(nu_comp) << " kkt=" << fmt(settle.terminal_kkt) << ", "
         << fmt(elapsed) << " s";
  return {ok, detail.str()};
}

std::pair<bool, std::string> setpoint_tracking() {
  const LoadedConfig cfg = load("accept-s1-track.cfg");
  const SimulationTrace tr = run_closed_loop(cfg.scenario);
  if (!tr.completed) return {false, "run aborted: " + tr.abort_reason};
  const int last = tr.samples() - 1;
  bool ok = true;
  int saturated = 0;
  std::ostringstream detail;
  for (int i = 0; i < 4; ++i) {
    const ZoneParams& z = cfg.scenario.graph.zones[static_cast<std::size_t>(i)];
    const double dev = tr.T_zone(last, i) - z.T_set;
    const bool at_limit = tr.q_applied(last, i) > z.q_max - 1e-9;
    if (at_limit) {
      ++saturated;
      // heating: a saturated zone can only fall short of its set point
      ok = ok && dev < 0.0;
      detail << "zone" << i << " saturated dev=" << fmt(dev) << " ";
    } else {
      ok = ok && std::abs(dev) < 0.05;
      detail << "zone" << i << " dev=" << fmt(dev) << " ";
    }
  }
  detail << "(" << saturated << " saturated)";
  return {ok, detail.str()};
}

std::pair<bool, std::string> step_disturbance_adaptation() {
  const LoadedConfig cfg = load("accept-s1-step.cfg");
  const SimulationTrace tr = run_closed_loop(cfg.scenario);
  if (!tr.completed) return {false, "run aborted: " + tr.abort_reason};
  const SteadyStateProblem p = terminal_problem(cfg.scenario, tr);
  const ReferenceSolution sol = solve_reference(p);
  const int last = tr.samples() - 1;
  const double gap_T =
      (tr.T_zone.row(last).transpose() - sol.point.Z).cwiseAbs().maxCoeff();
  const double gap_q =
      (tr.q_applied.row(last).transpose() - oracle_flows(p, sol.point)).cwiseAbs().maxCoeff();

  // the controller never takes the disturbances as arguments; its
  // measurement-free form must match the explicit-multiplier reference
  // step for step, including across the disturbance step
  Scenario eq = cfg.scenario;
  const int steps = 10000;
  eq.disturbances.T_out = PiecewiseProfile({0.0, 1250.0}, {5.0, 10.0});
  eq.disturbances.Q[0] = PiecewiseProfile({0.0, 1250.0}, {0.0, 0.2});
  eq.horizon = steps * eq.dt;
  eq.output_stride = 1;
  const SimulationTrace prod = run_closed_loop(eq);
  if (!prod.completed) return {false, "equivalence run aborted"};
  double worst_gap = 0.0;
  const int n = 4, plant = 3 * n, B = 9;
  test::run_explicit_zeta_loop(eq, steps, [&](int step, const VectorXd& ref) {
    const int row = step;  // stride 1: row k corresponds to step k
    for (int idx = 0; idx < n; ++idx) {
      worst_gap = std::max(worst_gap, std::abs(prod.T_zone(row, idx) - ref[idx]));
      worst_gap = std::max(worst_gap, std::abs(prod.T_floor(row, idx) - ref[n + idx]));
      worst_gap = std::max(worst_gap, std::abs(prod.T_water(row, idx) - ref[2 * n + idx]));
    }
    for (int i = 0; i < n; ++i) {
      const int o = plant + i * B;
      const int c = i * B;  // ctrl_states column offset
      for (int j = 0; j < B; ++j) {
        if (j == 5) continue;
        worst_gap = std::max(worst_gap,
                             std::abs(prod.ctrl_states(row, c + j) - ref[o + j]));
      }
      const double C = eq.graph.zones[static_cast<std::size_t>(i)].C;
      const double zeta_prod =
          eq.gains.k_zeta[i] * (prod.ctrl_states(row, c + 5) + C * prod.T_zone(row, i));
      worst_gap = std::max(worst_gap, std::abs(zeta_prod - ref[o + 5]));
    }
  });

  const bool ok = gap_T < 1e-3 && gap_q < 1e-3 && worst_gap < 1e-9;
  std::ostringstream detail;
  detail << "post-step max|dT|=" << fmt(gap_T) << " max|dq|=" << fmt(gap_q)
         << "; controller reads no disturbances (signature), explicit-form gap="
         << fmt(worst_gap) << " over " << steps << " steps";
  return {ok, detail.str()};
}

std::pair<bool, std::string> extra_dynamics_damping() {
  const LoadedConfig on = load("accept-s1-opt.cfg");
  const LoadedConfig off = load("accept-s1-opt.cfg", {"controller.extra_dynamics=false"});
  const SimulationTrace tr_on = run_closed_loop(on.scenario);
  const SimulationTrace tr_off = run_closed_loop(off.scenario);
  if (!tr_on.completed || !tr_off.completed) return {false, "run aborted"};
  bool ok = true;
  std::ostringstream detail;
  for (int i = 0; i < 4; ++i) {
    ok = ok && tr_on.tv_q[i] < tr_off.tv_q[i];
    detail << "zone" << i << " TV " << fmt(tr_on.tv_q[i]) << "<" << fmt(tr_off.tv_q[i])
           << " ";
  }
  return {ok, detail.str()};
}

std::pair<bool, std::string> convexity_facts() {
  const GhpParams ghp = reference_ghp();
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double min_eig = 1e300;
  bool chain_ok = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const VectorXd u = VectorXd::NullaryExpr(4, [&](int) { return 2.0 * u01(rng); });
    const double T_s = 38.0 + 4.0 * u01(rng);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(energy_hessian(u, T_s, ghp));
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
    chain_ok = chain_ok && cauchy_schwarz_chain(u, T_s, ghp).ordered;
  }
  double fd_gap = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const VectorXd u = VectorXd::NullaryExpr(4, [&](int) { return 2.0 * u01(rng); });
    const double T_s = 38.5 + 3.0 * u01(rng);
    VectorXd x(5);
    x.head(4) = u;
    x[4] = T_s;
    const MatrixXd H = energy_hessian(u, T_s, ghp);
    const MatrixXd Hfd = test::fd_hessian(
        [&](const VectorXd& y) {
          return y.head(4).squaredNorm() / (ghp.cop_b - ghp.cop_a * y[4]);
        },
        x);
    fd_gap = std::max(fd_gap, (H - Hfd).cwiseAbs().maxCoeff());
  }
  const bool ok = min_eig >= -1e-10 && chain_ok && fd_gap < 1e-6;
  std::ostringstream detail;
  detail << "min eig=" << fmt(min_eig) << " at 1000 pts, bound chain ordered at 1000 pts,"
         << " FD Hessian gap=" << fmt(fd_gap);
  return {ok, detail.str()};
}

std::pair<bool, std::string> wall_model_reduction() {
  BuildingGraph g = reference_building();
  g.wall_states = true;
  g.C_wall = 50.0;
  g.finalize();
  const GhpParams ghp = reference_ghp();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> temp(-10.0, 15.0), frac(0.0, 1.0);
  double worst_mid = 0.0, worst_red = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    PlantInputs in;
    in.q = VectorXd::NullaryExpr(4, [&](int i) {
      return frac(rng) * g.zones[static_cast<std::size_t>(i)].q_max;
    });
    in.T_supply = 38.0 + 4.0 * frac(rng);
    const VectorXd Q = VectorXd::NullaryExpr(4, [&](int) { return 0.5 * frac(rng); });
    const WallReductionCheck chk =
        second_order_steady_state_check(g, ghp, in, temp(rng), Q);
    worst_mid = std::max(worst_mid, chk.wall_midpoint_residual);
    worst_red = std::max(worst_red, chk.reduced_model_agreement);
  }
  const bool ok = worst_mid < 1e-10 && worst_red < 1e-10;
  std::ostringstream detail;
  detail << "10 instances: wall midpoint residual<=" << fmt(worst_mid)
         << ", doubled-resistance agreement<=" << fmt(worst_red);
  return {ok, detail.str()};
}

std::pair<bool, std::string> variant_comparisons() {
  const LoadedConfig base = load("accept-s1-opt.cfg");
  const LoadedConfig dec = load("accept-s1-opt.cfg", {"controller.variant=decentralized"});
  const SimulationTrace tr_full = run_closed_loop(base.scenario);
  const SimulationTrace tr_dec = run_closed_loop(dec.scenario);
  if (!tr_full.completed || !tr_dec.completed) return {false, "scenario-1 run aborted"};
  const SettlingReport rep_dec = detect_settling(dec.scenario, tr_dec, 1e-5, 1800.0);
  const ComparisonReport cmp = compare_runs(tr_full, tr_dec);

  const LoadedConfig red = load("accept-s2.cfg", {"controller.variant=reduced-comm"});
  const SimulationTrace tr_red = run_closed_loop(red.scenario);
  if (!tr_red.completed) return {false, "scenario-2 run aborted"};
  const SettlingReport rep_red = detect_settling(red.scenario, tr_red, 1e-5, 1800.0);

  const bool ok = rep_dec.settled && rep_dec.terminal_kkt < 1e-4 && rep_red.settled &&
                  rep_red.terminal_kkt < 1e-4 && cmp.max_dT.allFinite();
  std::ostringstream detail;
  detail << "decentralized kkt=" << fmt(rep_dec.terminal_kkt)
         << ", reduced-comm kkt=" << fmt(rep_red.terminal_kkt)
         << "; distributed-vs-decentralized max|dT|=" << fmt(cmp.max_dT.maxCoeff())
         << " degC (reported, not asserted)";
  return {ok, detail.str()};
}

std::pair<bool, std::string> agent_path_equivalence() {
  const auto t0 = Clock::now();
  const char* names[] = {"s5-scenario1.cfg", "s5-scenario2.cfg", "accept-s1-opt.cfg",
                         "accept-s1-track.cfg", "accept-s1-step.cfg", "accept-s2.cfg"};
  for (const char* name : names) {
    const LoadedConfig cfg = load(name);
    const SimulationTrace mono = run_closed_loop(cfg.scenario);
    const SimulationTrace agents = run_closed_loop_agents(cfg.scenario);
    if (!mono.completed || !agents.completed) {
      return {false, std::string(name) + ": run aborted"};
    }
    const bool same =
        mono.samples() == agents.samples() &&
        (mono.times - agents.times).cwiseAbs().maxCoeff() == 0.0 &&
        (mono.T_zone - agents.T_zone).cwiseAbs().maxCoeff() == 0.0 &&
        (mono.T_floor - agents.T_floor).cwiseAbs().maxCoeff() == 0.0 &&
        (mono.T_water - agents.T_water).cwiseAbs().maxCoeff() == 0.0 &&
        (mono.q_applied - agents.q_applied).cwiseAbs().maxCoeff() == 0.0 &&
        (mono.T_supply - agents.T_supply).cwiseAbs().maxCoeff() == 0.0 &&
        (mono.energy_kwh - agents.energy_kwh).cwiseAbs().maxCoeff() == 0.0 &&
        (mono.ctrl_states - agents.ctrl_states).cwiseAbs().maxCoeff() == 0.0 &&
        (mono.terminal_state - agents.terminal_state).cwiseAbs().maxCoeff() == 0.0;
    if (!same) return {false, std::string(name) + ": traces differ"};
  }
  std::ostringstream detail;
  detail << "6/6 bundled scenarios bit-exact, " << fmt(seconds_since(t0)) << " s";
  return {true, detail.str()};
}

std::pair<bool, std::string> determinism_and_accuracy() {
  // byte-identical CSV across reruns
  const LoadedConfig cfg = load("accept-s1-track.cfg");
  const SimulationTrace a = run_closed_loop(cfg.scenario);
  const SimulationTrace b = run_closed_loop(cfg.scenario);
  const std::string csv_a = trace_csv(a, cfg.scenario.graph);
  const std::string csv_b = trace_csv(b, cfg.scenario.graph);
  if (csv_a != csv_b) return {false, "rerun CSV differs"};

  // fourth-order self convergence on a smooth segment: kick the damping
  // companions away from the optimum (all flow bounds stay slack, so no
  // projection or clamp events occur) and accumulate the trajectory gap at
  // matching sample times across halved steps
  Scenario base = test::scenario1(5.0, 0.0, 40.0, 10.0, /*horizon=*/60.0, /*dt=*/0.025);
  SolveOptions tight;
  tight.tolerance = 1e-11;
  const ReferenceSolution sol = solve_reference(test::problem_of(base), tight);
  VectorXd x0 = joint_state_from(base, sol.point);
  for (int i = 0; i < 4; ++i) x0[12 + 9 * i + 2] += 0.2;  // u_hat
  base.initial_joint_state = x0;
  const auto run_at = [&](double dt, int stride) {
    Scenario sc = base;
    sc.dt = dt;
    sc.output_stride = stride;
    return run_closed_loop(sc);
  };
  const auto gap = [](const SimulationTrace& a, const SimulationTrace& b) {
    double acc = 0.0;
    for (int r = 0; r < a.samples(); ++r) {
      double m = (a.ctrl_states.row(r) - b.ctrl_states.row(r)).cwiseAbs().maxCoeff();
      m = std::max(m, (a.T_zone.row(r) - b.T_zone.row(r)).cwiseAbs().maxCoeff());
      acc += m;
    }
    return acc;
  };
  const SimulationTrace coarse = run_at(0.025, 1);
  const SimulationTrace mid = run_at(0.0125, 2);
  const SimulationTrace fine = run_at(0.00625, 4);
  const double e1 = gap(coarse, mid);
  const double e2 = gap(mid, fine);
  const double ratio = e1 / e2;
  const bool ok = ratio >= 12.0 && ratio <= 20.0;
  std::ostringstream detail;
  detail << "rerun CSV byte-identical (" << csv_a.size() << " bytes); dt-halving errors "
         << fmt(e1) << "/" << fmt(e2) << ", ratio=" << fmt(ratio) << " in [12,20]";
  return {ok, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
  g_config_dir = argc > 1 ? fs::path(argv[1]) : fs::path(GHPCTRL_CONFIG_DIR);
  if (!fs::exists(g_config_dir / "s5-scenario1.cfg")) {
    std::cerr << "config directory not found: " << g_config_dir << "\n";
    return 2;
  }

  const std::vector<Criterion> criteria = {
      {"stability-sweep", hurwitz_sweep},
      {"equilibrium-optimality-flow-only", equilibrium_optimality_flow_only},
      {"equilibrium-optimality-general", equilibrium_optimality_general},
      {"setpoint-tracking-comfort-only", setpoint_tracking},
      {"step-disturbance-adaptation", step_disturbance_adaptation},
      {"extra-dynamics-damping", extra_dynamics_damping},
      {"convexity-facts", convexity_facts},
      {"wall-model-reduction", wall_model_reduction},
      {"variant-comparisons", variant_comparisons},
      {"agent-path-equivalence", agent_path_equivalence},
      {"determinism-and-accuracy", determinism_and_accuracy},
  };

  int passed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    std::pair<bool, std::string> result;
    try {
      result = criteria[k].run();
    } catch (const std::exception& e) {
      result = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%2zu/%zu] %s %s: %s\n", k + 1, criteria.size(),
                result.first ? "PASS" : "FAIL", criteria[k].name.c_str(),
                result.second.c_str());
    std::fflush(stdout);
    if (result.first) ++passed;
  }
  std::printf("RESULT: %d/%zu criteria passed\n", passed, criteria.size());
  return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
