#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ghpctrl/simulation.hpp"

namespace ghpctrl {

struct OutputOptions {
  std::string dir = "out";
  bool csv = true;
  bool summary = true;
};

struct LoadedConfig {
  Scenario scenario;
  OutputOptions output;
};

/// Parses a scenario config document (JSON, // comments allowed). Overrides
/// are dotted-path assignments like "simulation.dt=0.5" or
/// "controller.variant=decentralized"; values parse as JSON with a plain
/// string fallback. Unknown keys anywhere are rejected; schema errors name
/// the offending field. Profile breakpoints snap to step boundaries.
LoadedConfig parse_config(const std::string& text,
                          const std::vector<std::string>& overrides = {});

LoadedConfig load_config(const std::filesystem::path& file,
                         const std::vector<std::string>& overrides = {});

/// Canonical document for a loaded config: parse(serialize(x)) == x and
/// serialize is idempotent across a round trip.
std::string serialize_config(const LoadedConfig& config);

}  // namespace ghpctrl
