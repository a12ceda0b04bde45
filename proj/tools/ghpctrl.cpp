// ghpctrl: simulate, solve, verify and compare multi-zone heat-pump floor
// heating control scenarios.
//
// Exit codes: 0 success, 1 check failure, 2 config error, 3 numeric error.
#include <CLI11.hpp>
#include <algorithm>
#include <Eigen/Eigenvalues>
#include <filesystem>
#include <iostream>
#include <random>

#include "ghpctrl/agents.hpp"
#include "ghpctrl/config.hpp"
#include "ghpctrl/plant.hpp"
#include "ghpctrl/reference_solver.hpp"
#include "ghpctrl/trace_io.hpp"
#include "ghpctrl/version.hpp"

namespace fs = std::filesystem;
using namespace ghpctrl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitNumericError = 3;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  double dt = 0.0;
  double horizon = 0.0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Scenario config file")->required();
  cmd->add_option("--set", args.overrides, "Override config values (key.path=value)");
  cmd->add_option("--out", args.out_dir, "Output directory (default from config)");
  cmd->add_option("--dt", args.dt, "Override the integration step [s]");
  cmd->add_option("--horizon", args.horizon, "Override the horizon [s]");
}

std::vector<std::string> effective_overrides(const CommonArgs& args) {
  std::vector<std::string> ov = args.overrides;
  if (args.dt > 0.0) ov.push_back("simulation.dt=" + std::to_string(args.dt));
  if (args.horizon > 0.0) ov.push_back("simulation.horizon=" + std::to_string(args.horizon));
  return ov;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunManifest start_manifest(const CommonArgs& args, const std::string& command) {
  RunManifest m;
  m.version = kVersion;
  m.command = command;
  m.config_path = args.config_path;
  m.config_hash = hex64(fnv1a64(file_bytes(args.config_path)));
  m.overrides = effective_overrides(args);
  m.started_utc = utc_timestamp();
  return m;
}

SettlingReport settling_of(const Scenario& sc, const SimulationTrace& trace) {
  // an overridden horizon may be shorter than the configured window
  const double window = std::min(sc.settle_window, 0.5 * sc.horizon);
  return detect_settling(sc, trace, sc.settle_tol, window);
}

double q_of(const SteadyStateProblem& p, const PrimalDualPoint& pt, int i) {
  return recover_flow(pt.u[i], pt.T_supply, pt.Zf[i], p.ghp.c_w, p.ghp.mode);
}

int cmd_simulate(const CommonArgs& args, bool use_agents) {
  const LoadedConfig cfg = load_config(args.config_path, effective_overrides(args));
  const fs::path dir = args.out_dir.empty() ? fs::path(cfg.output.dir)
                                            : fs::path(args.out_dir);
  RunManifest manifest = start_manifest(args, use_agents ? "simulate --agents" : "simulate");

  const SimulationTrace trace = use_agents ? run_closed_loop_agents(cfg.scenario)
                                           : run_closed_loop(cfg.scenario);
  const SettlingReport settling = settling_of(cfg.scenario, trace);

  if (cfg.output.csv) {
    write_trace_csv(dir / "trace.csv", trace, cfg.scenario.graph);
    manifest.outputs.push_back("trace.csv");
  }
  if (cfg.output.summary) {
    write_text_file(dir / "summary.json", summary_json(cfg.scenario, trace, settling));
    manifest.outputs.push_back("summary.json");
  }
  manifest.finished_utc = utc_timestamp();
  write_manifest(dir, manifest);

  if (!trace.completed) {
    std::cerr << "simulate: aborted (" << trace.abort_reason << "), partial trace in "
              << dir << "\n";
    return kExitNumericError;
  }
  std::cout << "simulate: " << trace.samples() << " samples -> " << dir
            << "\n  settled=" << (settling.settled ? "yes" : "no")
            << " settling_time=" << settling.settling_time
            << "s terminal_kkt=" << settling.terminal_kkt
            << " energy_kwh=" << trace.energy_kwh[trace.samples() - 1] << "\n";
  return kExitOk;
}

int cmd_solve(const CommonArgs& args, double at_time) {
  const LoadedConfig cfg = load_config(args.config_path, effective_overrides(args));
  const Scenario& sc = cfg.scenario;
  SteadyStateProblem p;
  p.kind = sc.kind;
  p.graph = sc.graph;
  p.ghp = sc.ghp;
  p.T_out = sc.disturbances.T_out(at_time);
  p.Q = sc.disturbances.Q_at(at_time);
  p.s = sc.s_schedule(at_time);
  p.T_supply_fixed = sc.kind == ScenarioKind::flow_only ? sc.T_supply_profile(at_time) : 0.0;
  if (!sc.T_set_profiles.empty()) {
    for (int i = 0; i < p.graph.size(); ++i) {
      p.graph.zones[static_cast<std::size_t>(i)].T_set = sc.T_set_at(i, at_time);
    }
  }

  const fs::path dir = args.out_dir.empty() ? fs::path(cfg.output.dir)
                                            : fs::path(args.out_dir);
  RunManifest manifest = start_manifest(args, "solve --at-time " + std::to_string(at_time));
  const ReferenceSolution sol = solve_reference(p);
  write_text_file(dir / "solution.json", solution_json(p, sol));
  manifest.outputs.push_back("solution.json");
  manifest.finished_utc = utc_timestamp();
  write_manifest(dir, manifest);
  std::cout << "solve: objective=" << sol.objective_value
            << " kkt=" << sol.kkt.summary << " iterations=" << sol.iterations << " -> "
            << dir << "\n";
  return kExitOk;
}

int cmd_verify(const CommonArgs& args) {
  // the COP line is part of what verify checks, so a config whose fixed
  // supply temperature breaks it is reported as a failed check, not as a
  // malformed config
  LoadedConfig cfg;
  try {
    cfg = load_config(args.config_path, effective_overrides(args));
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.find("COP") != std::string::npos || what.find("cop") != std::string::npos) {
      std::cout << "FAIL cop-domain: " << what << "\n";
      return kExitCheckFailed;
    }
    throw;
  }
  const Scenario& sc = cfg.scenario;
  bool all_ok = true;
  const auto report = [&](const char* name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
    all_ok = all_ok && ok;
  };

  // stability sweep over flow patterns and supply temperatures
  {
    const VectorXd q_max = sc.graph.q_max_vector();
    const int n = sc.graph.size();
    std::vector<VectorXd> patterns = {VectorXd::Zero(n), VectorXd::Ones(n),
                                      0.5 * VectorXd::Ones(n)};
    VectorXd alt = VectorXd::Zero(n);
    for (int i = 0; i < n; i += 2) alt[i] = 1.0;
    patterns.push_back(alt);
    patterns.push_back(VectorXd::Ones(n) - alt);
    double worst = -1e300;
    for (int si = 0; si < 5; ++si) {
      const double scale = si / 4.0;
      for (int ti = 0; ti < 5; ++ti) {
        const double T_s = sc.ghp.T_s_min +
                           (sc.ghp.T_s_max - sc.ghp.T_s_min) * ti / 4.0;
        for (const VectorXd& pat : patterns) {
          PlantInputs in;
          in.q = scale * pat.cwiseProduct(q_max);
          in.T_supply = T_s;
          const AffineDynamics sys =
              system_matrix(sc.graph, sc.ghp, in, sc.disturbances.T_out(0.0),
                            sc.disturbances.Q_at(0.0));
          worst = std::max(worst, is_hurwitz(sys.A).spectral_abscissa);
        }
      }
    }
    report("hurwitz-sweep", worst < 0.0,
           "max spectral abscissa over 125 operating points = " + std::to_string(worst));
  }

  // COP positivity and box membership of the fixed supply profile
  if (sc.kind == ScenarioKind::flow_only) {
    bool ok = true;
    std::string detail = "COP positive over the supply profile";
    for (double v : sc.T_supply_profile.values()) {
      try {
        cop(sc.ghp, v);
      } catch (const std::domain_error& e) {
        ok = false;
        detail = e.what();
        break;
      }
      if (v < sc.ghp.T_s_min || v > sc.ghp.T_s_max) {
        detail = "supply profile leaves [T_s_min, T_s_max] (allowed, reported)";
      }
    }
    report("cop-domain", ok, detail);
    if (!ok) return kExitCheckFailed;
  }

  // closed loop settles and its terminal point passes the KKT check
  SimulationTrace trace;
  {
    trace = run_closed_loop(sc);
    if (!trace.completed) {
      report("closed-loop-settle", false, "aborted: " + trace.abort_reason);
      return kExitCheckFailed;
    }
    const SettlingReport settling = settling_of(sc, trace);
    report("closed-loop-settle", settling.settled,
           "settling_time=" + std::to_string(settling.settling_time) + "s");
    report("terminal-kkt", settling.terminal_kkt < 1e-4,
           "residual=" + std::to_string(settling.terminal_kkt));
  }

  // cross-check the terminal state against an independent reference solve
  {
    const SteadyStateProblem p = terminal_problem(sc, trace);
    const ReferenceSolution sol = solve_reference(p);
    const int last = trace.samples() - 1;
    double gap_T = 0.0, gap_q = 0.0;
    for (int i = 0; i < p.graph.size(); ++i) {
      gap_T = std::max(gap_T, std::abs(trace.T_zone(last, i) - sol.point.Z[i]));
      gap_q = std::max(gap_q, std::abs(trace.q_applied(last, i) - q_of(p, sol.point, i)));
    }
    report("oracle-cross-check", gap_T < 1e-3 && gap_q < 1e-3,
           "max |dT|=" + std::to_string(gap_T) + " max |dq|=" + std::to_string(gap_q));
  }

  // convexity facts sampled over the admissible region
  {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double min_eig = 1e300;
    bool chain_ok = true;
    for (int trial = 0; trial < 1000; ++trial) {
      const VectorXd u =
          VectorXd::NullaryExpr(sc.graph.size(), [&](int) { return 2.0 * u01(rng); });
      const double T_s = sc.ghp.T_s_min + (sc.ghp.T_s_max - sc.ghp.T_s_min) * u01(rng);
      const MatrixXd H = energy_hessian(u, T_s, sc.ghp);
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(H);
      min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
      chain_ok = chain_ok && cauchy_schwarz_chain(u, T_s, sc.ghp).ordered;
    }
    report("hessian-psd", min_eig >= -1e-10,
           "min eigenvalue over 1000 samples = " + std::to_string(min_eig));
    report("energy-bound-chain", chain_ok, "ordering held at 1000 samples");
  }

  return all_ok ? kExitOk : kExitCheckFailed;
}

int cmd_compare(const CommonArgs& args, const std::vector<std::string>& variants) {
  if (variants.size() < 2) {
    std::cerr << "compare: need at least two --variant entries\n";
    return kExitConfigError;
  }
  const fs::path dir = [&] {
    const LoadedConfig probe = load_config(args.config_path, effective_overrides(args));
    return args.out_dir.empty() ? fs::path(probe.output.dir) : fs::path(args.out_dir);
  }();
  RunManifest manifest = start_manifest(args, "compare");

  std::vector<SimulationTrace> traces;
  std::vector<std::string> names;
  for (const std::string& token : variants) {
    std::vector<std::string> ov = effective_overrides(args);
    std::string base = token;
    if (const auto colon = token.find(":no-extra"); colon != std::string::npos) {
      base = token.substr(0, colon);
      ov.push_back("controller.extra_dynamics=false");
    }
    if (base == "full") base = "distributed";
    ov.push_back("controller.variant=" + base);
    const LoadedConfig cfg = load_config(args.config_path, ov);
    SimulationTrace tr = run_closed_loop(cfg.scenario);
    if (!tr.completed) {
      std::cerr << "compare: variant '" << token << "' aborted: " << tr.abort_reason
                << "\n";
      return kExitNumericError;
    }
    // attach the per-variant optimality evidence to the report
    const SettlingReport rep = settling_of(cfg.scenario, tr);
    std::cout << "variant " << token << ": settled=" << (rep.settled ? "yes" : "no")
              << " terminal_kkt=" << rep.terminal_kkt << "\n";
    traces.push_back(std::move(tr));
    names.push_back(token);
  }
  std::vector<const SimulationTrace*> ptrs;
  for (const SimulationTrace& t : traces) ptrs.push_back(&t);
  write_text_file(dir / "comparison.json", comparison_json(names, ptrs));
  write_text_file(dir / "comparison_long.csv", comparison_long_csv(names, ptrs));
  manifest.outputs = {"comparison.json", "comparison_long.csv"};
  manifest.finished_utc = utc_timestamp();
  write_manifest(dir, manifest);
  std::cout << "compare: reports in " << dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-zone geothermal heat pump floor-heating control toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonArgs sim_args, solve_args, verify_args, cmp_args;
  bool use_agents = false;
  double at_time = 0.0;
  std::vector<std::string> variants;

  CLI::App* sim = app.add_subcommand("simulate", "Run the closed loop and export the trace");
  add_common(sim, sim_args);
  sim->add_flag("--agents", use_agents,
                "Execute through the message-passing agent runtime");

  CLI::App* solve = app.add_subcommand("solve", "Solve the steady-state problem");
  add_common(solve, solve_args);
  solve->add_option("--at-time", at_time,
                    "Time at which disturbances and schedules are frozen [s]");

  CLI::App* verify = app.add_subcommand("verify", "Run the verification checks");
  add_common(verify, verify_args);

  CLI::App* compare = app.add_subcommand("compare", "Run and compare controller variants");
  add_common(compare, cmp_args);
  compare->add_option("--variant", variants,
                      "Variant tokens: distributed|decentralized|reduced-comm"
                      " (append :no-extra to disable the damping states)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_args, use_agents);
    if (solve->parsed()) return cmd_solve(solve_args, at_time);
    if (verify->parsed()) return cmd_verify(verify_args);
    if (compare->parsed()) return cmd_compare(cmp_args, variants);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const StructuralError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumericError;
  } catch (const std::domain_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumericError;
  }
  return kExitOk;
}
