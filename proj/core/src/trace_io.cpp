#include "ghpctrl/trace_io.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include <json.hpp>

namespace ghpctrl {

namespace {

using nlohmann::json;

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json vec_json(const VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

}  // namespace

std::string trace_csv(const SimulationTrace& trace, const BuildingGraph& graph) {
  const int n = graph.size();
  std::string out;
  out += "time";
  for (int i = 0; i < n; ++i) out += ",T_zone_" + std::to_string(i);
  for (int i = 0; i < n; ++i) out += ",T_floor_" + std::to_string(i);
  for (int i = 0; i < n; ++i) out += ",T_water_" + std::to_string(i);
  for (int i = 0; i < n; ++i) out += ",q_" + std::to_string(i);
  out += ",T_supply,T_out";
  for (int i = 0; i < n; ++i) out += ",Q_" + std::to_string(i);
  out += ",power_kw,energy_kwh,flags\n";
  for (int row = 0; row < trace.samples(); ++row) {
    out += g17(trace.times[row]);
    for (int i = 0; i < n; ++i) out += "," + g17(trace.T_zone(row, i));
    for (int i = 0; i < n; ++i) out += "," + g17(trace.T_floor(row, i));
    for (int i = 0; i < n; ++i) out += "," + g17(trace.T_water(row, i));
    for (int i = 0; i < n; ++i) out += "," + g17(trace.q_applied(row, i));
    out += "," + g17(trace.T_supply[row]);
    out += "," + g17(trace.T_out[row]);
    for (int i = 0; i < n; ++i) out += "," + g17(trace.Q_dist(row, i));
    out += "," + g17(trace.power[row]);
    out += "," + g17(trace.energy_kwh[row]);
    out += "," + std::to_string(trace.flags[row]);
    out += "\n";
  }
  return out;
}

void write_trace_csv(const std::filesystem::path& file, const SimulationTrace& trace,
                     const BuildingGraph& graph) {
  write_text_file(file, trace_csv(trace, graph));
}

std::string summary_json(const Scenario& scenario, const SimulationTrace& trace,
                         const SettlingReport& settling) {
  json out;
  out["completed"] = trace.completed;
  if (!trace.completed) out["abort_reason"] = trace.abort_reason;
  out["samples"] = trace.samples();
  out["dt"] = trace.dt;
  out["horizon"] = scenario.horizon;
  out["scenario"] = scenario.kind == ScenarioKind::flow_only ? 1 : 2;
  out["variant"] = !scenario.drop_zone_links
                       ? "distributed"
                       : (scenario.kind == ScenarioKind::flow_only ? "decentralized"
                                                                   : "reduced-comm");
  out["settled"] = settling.settled;
  out["settling_time_s"] = settling.settling_time;
  out["terminal_kkt_residual"] = settling.terminal_kkt;
  out["terminal_plant_residual"] = settling.terminal_plant_residual;
  if (trace.samples() > 0) {
    const int last = trace.samples() - 1;
    out["cumulative_energy_kwh"] = trace.energy_kwh[last];
    out["terminal_T_zone"] = vec_json(trace.T_zone.row(last).transpose());
    out["terminal_q"] = vec_json(trace.q_applied.row(last).transpose());
    out["terminal_T_supply"] = trace.T_supply[last];
  }
  out["tv_q"] = vec_json(trace.tv_q);
  json warnings = json::array();
  for (const WarningEvent& w : trace.warnings) {
    warnings.push_back({{"time", w.time}, {"kind", w.kind}});
  }
  out["warnings"] = warnings;
  return out.dump(2) + "\n";
}

std::string solution_json(const SteadyStateProblem& problem, const ReferenceSolution& sol) {
  json out;
  out["scenario"] = problem.kind == ScenarioKind::flow_only ? 1 : 2;
  out["mode"] = problem.ghp.mode == Mode::heating ? "heating" : "cooling";
  out["T_out"] = problem.T_out;
  out["Q"] = vec_json(problem.Q);
  out["energy_weight"] = problem.s;
  if (problem.kind == ScenarioKind::flow_only) out["T_supply"] = problem.T_supply_fixed;
  json point;
  point["Z"] = vec_json(sol.point.Z);
  point["u"] = vec_json(sol.point.u);
  point["Z_floor"] = vec_json(sol.point.Zf);
  point["T_supply"] = sol.point.T_supply;
  point["zeta"] = vec_json(sol.point.zeta);
  point["lambda"] = vec_json(sol.point.lambda);
  point["mu_up"] = vec_json(sol.point.mu_up);
  point["mu_lo"] = vec_json(sol.point.mu_lo);
  point["nu_up"] = sol.point.nu_up;
  point["nu_lo"] = sol.point.nu_lo;
  // recovered flows at the optimum
  VectorXd q(problem.n_zones());
  for (int i = 0; i < q.size(); ++i) {
    q[i] = recover_flow(sol.point.u[i], sol.point.T_supply, sol.point.Zf[i],
                        problem.ghp.c_w, problem.ghp.mode);
  }
  point["q"] = vec_json(q);
  out["point"] = point;
  out["objective"] = sol.objective_value;
  out["kkt_summary"] = sol.kkt.summary;
  out["iterations"] = sol.iterations;
  return out.dump(2) + "\n";
}

std::string comparison_json(const std::vector<std::string>& names,
                            const std::vector<const SimulationTrace*>& traces) {
  if (names.size() != traces.size() || traces.size() < 2) {
    throw StructuralError("comparison: need at least two named traces");
  }
  json out;
  out["variants"] = names;
  json pairs = json::array();
  for (std::size_t a = 0; a < traces.size(); ++a) {
    for (std::size_t b = a + 1; b < traces.size(); ++b) {
      const ComparisonReport rep = compare_runs(*traces[a], *traces[b]);
      json p;
      p["a"] = names[a];
      p["b"] = names[b];
      p["max_dT"] = vec_json(rep.max_dT);
      p["d_energy_kwh"] = rep.d_energy;
      pairs.push_back(p);
    }
  }
  out["pairs"] = pairs;
  json tv = json::object();
  for (std::size_t a = 0; a < traces.size(); ++a) tv[names[a]] = vec_json(traces[a]->tv_q);
  out["tv_q"] = tv;
  return out.dump(2) + "\n";
}

std::string comparison_long_csv(const std::vector<std::string>& names,
                                const std::vector<const SimulationTrace*>& traces) {
  std::string out = "variant,time,zone,T_zone,q,T_supply,power_kw\n";
  for (std::size_t v = 0; v < traces.size(); ++v) {
    const SimulationTrace& tr = *traces[v];
    for (int row = 0; row < tr.samples(); ++row) {
      for (int i = 0; i < tr.T_zone.cols(); ++i) {
        out += names[v];
        out += "," + g17(tr.times[row]);
        out += "," + std::to_string(i);
        out += "," + g17(tr.T_zone(row, i));
        out += "," + g17(tr.q_applied(row, i));
        out += "," + g17(tr.T_supply[row]);
        out += "," + g17(tr.power[row]);
        out += "\n";
      }
    }
  }
  return out;
}

void write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
  json out;
  out["tool"] = m.tool;
  out["version"] = m.version;
  out["command"] = m.command;
  out["config_path"] = m.config_path;
  out["config_hash"] = m.config_hash;
  out["overrides"] = m.overrides;
  out["started_utc"] = m.started_utc;
  out["finished_utc"] = m.finished_utc;
  out["outputs"] = m.outputs;
  const std::filesystem::path tmp = dir / "manifest.json.tmp";
  const std::filesystem::path final_path = dir / "manifest.json";
  write_text_file(tmp, out.dump(2) + "\n");
  std::filesystem::rename(tmp, final_path);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text_file(const std::filesystem::path& file, const std::string& text) {
  if (file.has_parent_path()) {
    std::filesystem::create_directories(file.parent_path());
  }
  std::ofstream out(file, std::ios::binary);
  if (!out) throw NumericError("cannot write file " + file.string());
  out << text;
}

}  // namespace ghpctrl
