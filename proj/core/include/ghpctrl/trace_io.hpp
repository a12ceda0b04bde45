#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ghpctrl/reference_solver.hpp"
#include "ghpctrl/simulation.hpp"

namespace ghpctrl {

/// Trace as CSV with a stable column order
///   time, T_zone_*, T_floor_*, T_water_*, q_*, T_supply, T_out, Q_*,
///   power_kw, energy_kwh, flags
/// formatted with 17 significant digits so reruns are byte-identical.
std::string trace_csv(const SimulationTrace& trace, const BuildingGraph& graph);
void write_trace_csv(const std::filesystem::path& file, const SimulationTrace& trace,
                     const BuildingGraph& graph);

/// Compact run summary (JSON): terminal residuals, settling, energy,
/// warnings, abort state.
std::string summary_json(const Scenario& scenario, const SimulationTrace& trace,
                         const SettlingReport& settling);

/// Reference solution document (JSON): problem snapshot, primal-dual point,
/// objective, KKT summary. Deterministic (17 significant digits).
std::string solution_json(const SteadyStateProblem& problem, const ReferenceSolution& sol);

/// Comparison report document (JSON) plus a long-format CSV with one row per
/// (sample, zone, variant) for plotting.
std::string comparison_json(const std::vector<std::string>& names,
                            const std::vector<const SimulationTrace*>& traces);
std::string comparison_long_csv(const std::vector<std::string>& names,
                                const std::vector<const SimulationTrace*>& traces);

/// Run provenance written next to every command's outputs.
struct RunManifest {
  std::string tool = "ghpctrl";
  std::string version;
  std::string command;
  std::string config_path;
  std::string config_hash;
  std::vector<std::string> overrides;
  std::string started_utc;
  std::string finished_utc;
  std::vector<std::string> outputs;
};

/// Writes manifest.json atomically (temp file + rename).
void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);
std::string utc_timestamp();

void write_text_file(const std::filesystem::path& file, const std::string& text);

}  // namespace ghpctrl
