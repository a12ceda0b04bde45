#include "ghpctrl/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ghpctrl {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path.empty() ? what : path + ": " + what);
}

void require_keys(const json& obj, const std::string& path,
                  const std::set<std::string>& known) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) fail(path, "unknown key '" + key + "'");
  }
}

double get_number(const json& obj, const std::string& path, const char* key,
                  std::optional<double> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    fail(path, std::string("missing required number '") + key + "'");
  }
  const json& v = obj.at(key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

bool get_bool(const json& obj, const std::string& path, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) fail(path + "." + key, "expected a boolean");
  return v.get<bool>();
}

PiecewiseProfile parse_profile(const json& v, const std::string& path) {
  if (v.is_number()) return PiecewiseProfile::constant(v.get<double>());
  if (!v.is_object()) fail(path, "expected a number or a profile object");
  require_keys(v, path, {"type", "value", "times", "values"});
  const std::string type = v.contains("type") ? v.at("type").get<std::string>() : "constant";
  if (type == "constant") {
    return PiecewiseProfile::constant(get_number(v, path, "value"));
  }
  PiecewiseProfile::Interp interp;
  if (type == "hold") {
    interp = PiecewiseProfile::Interp::hold;
  } else if (type == "linear") {
    interp = PiecewiseProfile::Interp::linear;
  } else {
    fail(path + ".type", "expected constant|hold|linear");
  }
  if (!v.contains("times") || !v.contains("values")) {
    fail(path, "hold/linear profiles need 'times' and 'values'");
  }
  std::vector<double> times, values;
  for (const json& t : v.at("times")) times.push_back(t.get<double>());
  for (const json& x : v.at("values")) values.push_back(x.get<double>());
  try {
    return PiecewiseProfile(std::move(times), std::move(values), interp);
  } catch (const StructuralError& e) {
    fail(path, e.what());
  }
}

json profile_to_json(const PiecewiseProfile& p) {
  if (p.is_constant()) return json(p.values().front());
  json out;
  out["type"] = p.interp() == PiecewiseProfile::Interp::hold ? "hold" : "linear";
  out["times"] = p.times();
  out["values"] = p.values();
  return out;
}

PiecewiseProfile snap_profile(const PiecewiseProfile& p, double dt) {
  if (p.is_constant() || p.times().size() < 2) return p;
  std::vector<double> times = p.times();
  for (double& t : times) t = std::round(t / dt) * dt;
  return PiecewiseProfile(std::move(times), p.values(), p.interp());
}

VectorXd parse_gain(const json& gains, const std::string& path, const char* key, int n,
                    double fallback) {
  if (!gains.contains(key)) return VectorXd::Constant(n, fallback);
  const json& v = gains.at(key);
  if (v.is_number()) return VectorXd::Constant(n, v.get<double>());
  if (v.is_array()) {
    if (static_cast<int>(v.size()) != n) {
      fail(path + "." + key, "gain array must have one entry per zone");
    }
    VectorXd out(n);
    for (int i = 0; i < n; ++i) out[i] = v.at(static_cast<std::size_t>(i)).get<double>();
    return out;
  }
  fail(path + "." + key, "expected a number or an array");
}

json gain_to_json(const VectorXd& v) {
  const bool uniform = (v.array() == v[0]).all();
  if (uniform) return json(v[0]);
  std::vector<double> out(v.data(), v.data() + v.size());
  return json(out);
}

void apply_override(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + assignment + "' must look like key.path=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::exception&) {
    parsed = json(value);  // plain string
  }
  json* node = &root;
  std::istringstream keys(path);
  std::string key;
  std::vector<std::string> parts;
  while (std::getline(keys, key, '.')) parts.push_back(key);
  if (parts.empty()) throw ConfigError("override '" + assignment + "' has an empty path");
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    node = &(*node)[parts[i]];
  }
  (*node)[parts.back()] = parsed;
}

}  // namespace

LoadedConfig parse_config(const std::string& text,
                          const std::vector<std::string>& overrides) {
  json root;
  try {
    root = json::parse(text, nullptr, /*allow_exceptions=*/true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  for (const std::string& ov : overrides) apply_override(root, ov);

  require_keys(root, "", {"building", "ghp", "disturbances", "controller", "simulation",
                          "output"});
  for (const char* section : {"building", "ghp", "disturbances", "controller",
                              "simulation"}) {
    if (!root.contains(section)) fail("", std::string("missing section '") + section + "'");
  }

  LoadedConfig cfg;
  Scenario& sc = cfg.scenario;

  // --- simulation (first: dt is needed to snap profile breakpoints) ---
  {
    const json& sim = root.at("simulation");
    require_keys(sim, "simulation",
                 {"dt", "horizon", "initial_temperature", "output_stride", "tv_burn_in",
                  "settle_window", "settle_tol", "settle_kkt_tol", "settle_plant_tol"});
    sc.dt = get_number(sim, "simulation", "dt", 0.25);
    sc.horizon = get_number(sim, "simulation", "horizon");
    sc.initial_temperature = get_number(sim, "simulation", "initial_temperature", 15.0);
    sc.output_stride =
        static_cast<int>(get_number(sim, "simulation", "output_stride", 1.0));
    sc.tv_burn_in = get_number(sim, "simulation", "tv_burn_in", 0.0);
    sc.settle_window = get_number(sim, "simulation", "settle_window", 600.0);
    sc.settle_tol = get_number(sim, "simulation", "settle_tol", 1e-6);
    sc.settle_kkt_tol = get_number(sim, "simulation", "settle_kkt_tol", 1e-4);
    sc.settle_plant_tol = get_number(sim, "simulation", "settle_plant_tol", 1e-6);
    if (!(sc.dt > 0.0)) fail("simulation.dt", "must be > 0");
  }

  // --- building ---
  {
    const json& b = root.at("building");
    require_keys(b, "building", {"zones", "edges", "wall_states"});
    if (!b.contains("zones") || !b.at("zones").is_array() || b.at("zones").empty()) {
      fail("building.zones", "expected a non-empty array");
    }
    int zi = 0;
    for (const json& zj : b.at("zones")) {
      const std::string zp = "building.zones[" + std::to_string(zi) + "]";
      require_keys(zj, zp,
                   {"C", "R_out", "R_air_floor", "C_floor", "R_floor_water", "C_water",
                    "q_max", "T_set", "comfort_weight"});
      ZoneParams z;
      z.C = get_number(zj, zp, "C");
      z.R_out = get_number(zj, zp, "R_out");
      z.R_af = get_number(zj, zp, "R_air_floor");
      z.C_floor = get_number(zj, zp, "C_floor");
      z.R_fw = get_number(zj, zp, "R_floor_water");
      z.C_water = get_number(zj, zp, "C_water");
      z.q_max = get_number(zj, zp, "q_max");
      z.T_set = get_number(zj, zp, "T_set");
      z.comfort_weight = get_number(zj, zp, "comfort_weight", 0.5);
      sc.graph.zones.push_back(z);
      ++zi;
    }
    if (b.contains("edges")) {
      int ei = 0;
      for (const json& ej : b.at("edges")) {
        const std::string ep = "building.edges[" + std::to_string(ei) + "]";
        require_keys(ej, ep, {"i", "j", "R"});
        Edge e;
        e.i = static_cast<int>(get_number(ej, ep, "i"));
        e.j = static_cast<int>(get_number(ej, ep, "j"));
        e.R = get_number(ej, ep, "R");
        sc.graph.edges.push_back(e);
        ++ei;
      }
    }
    if (b.contains("wall_states")) {
      const json& w = b.at("wall_states");
      require_keys(w, "building.wall_states", {"enabled", "C_wall"});
      sc.graph.wall_states = get_bool(w, "building.wall_states", "enabled", false);
      sc.graph.C_wall = get_number(w, "building.wall_states", "C_wall", 50.0);
    }
    try {
      sc.graph.finalize();
    } catch (const StructuralError& e) {
      fail("building", e.what());
    }
  }
  const int n = sc.graph.size();

  // --- ghp ---
  {
    const json& g = root.at("ghp");
    require_keys(g, "ghp", {"c_w", "cop_a", "cop_b", "T_s_min", "T_s_max", "mode"});
    sc.ghp.c_w = get_number(g, "ghp", "c_w", 4.186);
    sc.ghp.cop_a = get_number(g, "ghp", "cop_a");
    sc.ghp.cop_b = get_number(g, "ghp", "cop_b");
    sc.ghp.T_s_min = get_number(g, "ghp", "T_s_min");
    sc.ghp.T_s_max = get_number(g, "ghp", "T_s_max");
    const std::string mode =
        g.contains("mode") ? g.at("mode").get<std::string>() : "heating";
    if (mode == "heating") {
      sc.ghp.mode = Mode::heating;
    } else if (mode == "cooling") {
      sc.ghp.mode = Mode::cooling;
    } else {
      fail("ghp.mode", "expected heating|cooling");
    }
    try {
      sc.ghp.validate();
    } catch (const StructuralError& e) {
      fail("ghp", e.what());
    }
  }

  // --- disturbances ---
  {
    const json& d = root.at("disturbances");
    require_keys(d, "disturbances", {"T_out", "Q"});
    if (!d.contains("T_out") || !d.contains("Q")) {
      fail("disturbances", "both 'T_out' and 'Q' are required");
    }
    sc.disturbances.T_out = snap_profile(parse_profile(d.at("T_out"), "disturbances.T_out"),
                                         sc.dt);
    if (!d.at("Q").is_array() || static_cast<int>(d.at("Q").size()) != n) {
      fail("disturbances.Q", "expected one profile per zone");
    }
    int qi = 0;
    for (const json& qj : d.at("Q")) {
      sc.disturbances.Q.push_back(snap_profile(
          parse_profile(qj, "disturbances.Q[" + std::to_string(qi) + "]"), sc.dt));
      ++qi;
    }
    try {
      sc.disturbances.validate(n);
    } catch (const StructuralError& e) {
      fail("disturbances", e.what());
    }
  }

  // --- controller ---
  {
    const json& c = root.at("controller");
    require_keys(c, "controller",
                 {"scenario", "variant", "extra_dynamics", "gains", "T_supply",
                  "energy_weight", "T_set_schedule"});
    const int scenario_no = static_cast<int>(get_number(c, "controller", "scenario"));
    if (scenario_no == 1) {
      sc.kind = ScenarioKind::flow_only;
    } else if (scenario_no == 2) {
      sc.kind = ScenarioKind::flow_and_supply;
    } else {
      fail("controller.scenario", "expected 1 or 2");
    }
    const std::string variant =
        c.contains("variant") ? c.at("variant").get<std::string>() : "distributed";
    if (variant == "distributed") {
      sc.drop_zone_links = false;
    } else if (variant == "decentralized") {
      if (sc.kind != ScenarioKind::flow_only) {
        fail("controller.variant", "'decentralized' applies to scenario 1");
      }
      sc.drop_zone_links = true;
    } else if (variant == "reduced-comm") {
      if (sc.kind != ScenarioKind::flow_and_supply) {
        fail("controller.variant", "'reduced-comm' applies to scenario 2");
      }
      sc.drop_zone_links = true;
    } else {
      fail("controller.variant", "expected distributed|decentralized|reduced-comm");
    }
    sc.extra_dynamics = get_bool(c, "controller", "extra_dynamics", true);

    const CtrlGains def = CtrlGains::defaults(n);
    const json gains = c.contains("gains") ? c.at("gains") : json::object();
    require_keys(gains, "controller.gains",
                 {"k_Z", "k_u", "k_eu", "k_eu_hat", "k_Zf", "k_eZf", "k_eZf_hat",
                  "k_zeta", "k_lambda", "k_mu_up", "k_mu_lo", "k_Ts", "k_nu_up",
                  "k_nu_lo"});
    const std::string gp = "controller.gains";
    sc.gains.k_Z = parse_gain(gains, gp, "k_Z", n, def.k_Z[0]);
    sc.gains.k_u = parse_gain(gains, gp, "k_u", n, def.k_u[0]);
    sc.gains.k_eu = parse_gain(gains, gp, "k_eu", n, def.k_eu[0]);
    sc.gains.k_eu_hat = parse_gain(gains, gp, "k_eu_hat", n, def.k_eu_hat[0]);
    sc.gains.k_Zf = parse_gain(gains, gp, "k_Zf", n, def.k_Zf[0]);
    sc.gains.k_eZf = parse_gain(gains, gp, "k_eZf", n, def.k_eZf[0]);
    sc.gains.k_eZf_hat = parse_gain(gains, gp, "k_eZf_hat", n, def.k_eZf_hat[0]);
    sc.gains.k_zeta = parse_gain(gains, gp, "k_zeta", n, def.k_zeta[0]);
    sc.gains.k_lambda = parse_gain(gains, gp, "k_lambda", n, def.k_lambda[0]);
    sc.gains.k_mu_up = parse_gain(gains, gp, "k_mu_up", n, def.k_mu_up[0]);
    sc.gains.k_mu_lo = parse_gain(gains, gp, "k_mu_lo", n, def.k_mu_lo[0]);
    sc.gains.k_Ts = get_number(gains, gp, "k_Ts", def.k_Ts);
    sc.gains.k_nu_up = get_number(gains, gp, "k_nu_up", def.k_nu_up);
    sc.gains.k_nu_lo = get_number(gains, gp, "k_nu_lo", def.k_nu_lo);

    if (c.contains("T_supply")) {
      sc.T_supply_profile =
          snap_profile(parse_profile(c.at("T_supply"), "controller.T_supply"), sc.dt);
    } else if (sc.kind == ScenarioKind::flow_only) {
      fail("controller", "scenario 1 requires a 'T_supply' profile");
    }
    if (c.contains("energy_weight")) {
      sc.s_schedule = snap_profile(
          parse_profile(c.at("energy_weight"), "controller.energy_weight"), sc.dt);
    }
    if (c.contains("T_set_schedule")) {
      const json& ts = c.at("T_set_schedule");
      if (!ts.is_array() || static_cast<int>(ts.size()) != n) {
        fail("controller.T_set_schedule", "expected one profile per zone");
      }
      int i = 0;
      for (const json& pj : ts) {
        sc.T_set_profiles.push_back(snap_profile(
            parse_profile(pj, "controller.T_set_schedule[" + std::to_string(i) + "]"),
            sc.dt));
        ++i;
      }
    }
  }

  // --- output ---
  if (root.contains("output")) {
    const json& o = root.at("output");
    require_keys(o, "output", {"dir", "csv", "summary"});
    if (o.contains("dir")) cfg.output.dir = o.at("dir").get<std::string>();
    cfg.output.csv = get_bool(o, "output", "csv", true);
    cfg.output.summary = get_bool(o, "output", "summary", true);
  }

  try {
    sc.validate();
  } catch (const StructuralError& e) {
    fail("", e.what());
  } catch (const std::domain_error& e) {
    fail("", e.what());
  }
  return cfg;
}

LoadedConfig load_config(const std::filesystem::path& file,
                         const std::vector<std::string>& overrides) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), overrides);
}

std::string serialize_config(const LoadedConfig& cfg) {
  const Scenario& sc = cfg.scenario;
  json root;
  json zones = json::array();
  for (const ZoneParams& z : sc.graph.zones) {
    zones.push_back({{"C", z.C},
                     {"R_out", z.R_out},
                     {"R_air_floor", z.R_af},
                     {"C_floor", z.C_floor},
                     {"R_floor_water", z.R_fw},
                     {"C_water", z.C_water},
                     {"q_max", z.q_max},
                     {"T_set", z.T_set},
                     {"comfort_weight", z.comfort_weight}});
  }
  json edges = json::array();
  for (const Edge& e : sc.graph.edges) {
    edges.push_back({{"i", e.i}, {"j", e.j}, {"R", e.R}});
  }
  root["building"] = {{"zones", zones}, {"edges", edges}};
  if (sc.graph.wall_states) {
    root["building"]["wall_states"] = {{"enabled", true}, {"C_wall", sc.graph.C_wall}};
  }
  root["ghp"] = {{"c_w", sc.ghp.c_w},
                 {"cop_a", sc.ghp.cop_a},
                 {"cop_b", sc.ghp.cop_b},
                 {"T_s_min", sc.ghp.T_s_min},
                 {"T_s_max", sc.ghp.T_s_max},
                 {"mode", sc.ghp.mode == Mode::heating ? "heating" : "cooling"}};
  json q = json::array();
  for (const PiecewiseProfile& p : sc.disturbances.Q) q.push_back(profile_to_json(p));
  root["disturbances"] = {{"T_out", profile_to_json(sc.disturbances.T_out)}, {"Q", q}};

  json ctrl;
  ctrl["scenario"] = sc.kind == ScenarioKind::flow_only ? 1 : 2;
  ctrl["variant"] = !sc.drop_zone_links ? "distributed"
                    : (sc.kind == ScenarioKind::flow_only ? "decentralized"
                                                          : "reduced-comm");
  ctrl["extra_dynamics"] = sc.extra_dynamics;
  ctrl["gains"] = {{"k_Z", gain_to_json(sc.gains.k_Z)},
                   {"k_u", gain_to_json(sc.gains.k_u)},
                   {"k_eu", gain_to_json(sc.gains.k_eu)},
                   {"k_eu_hat", gain_to_json(sc.gains.k_eu_hat)},
                   {"k_Zf", gain_to_json(sc.gains.k_Zf)},
                   {"k_eZf", gain_to_json(sc.gains.k_eZf)},
                   {"k_eZf_hat", gain_to_json(sc.gains.k_eZf_hat)},
                   {"k_zeta", gain_to_json(sc.gains.k_zeta)},
                   {"k_lambda", gain_to_json(sc.gains.k_lambda)},
                   {"k_mu_up", gain_to_json(sc.gains.k_mu_up)},
                   {"k_mu_lo", gain_to_json(sc.gains.k_mu_lo)},
                   {"k_Ts", sc.gains.k_Ts},
                   {"k_nu_up", sc.gains.k_nu_up},
                   {"k_nu_lo", sc.gains.k_nu_lo}};
  if (sc.kind == ScenarioKind::flow_only) {
    ctrl["T_supply"] = profile_to_json(sc.T_supply_profile);
  }
  ctrl["energy_weight"] = profile_to_json(sc.s_schedule);
  if (!sc.T_set_profiles.empty()) {
    json ts = json::array();
    for (const PiecewiseProfile& p : sc.T_set_profiles) ts.push_back(profile_to_json(p));
    ctrl["T_set_schedule"] = ts;
  }
  root["controller"] = ctrl;

  root["simulation"] = {{"dt", sc.dt},
                        {"horizon", sc.horizon},
                        {"initial_temperature", sc.initial_temperature},
                        {"output_stride", sc.output_stride},
                        {"tv_burn_in", sc.tv_burn_in},
                        {"settle_window", sc.settle_window},
                        {"settle_tol", sc.settle_tol},
                        {"settle_kkt_tol", sc.settle_kkt_tol},
                        {"settle_plant_tol", sc.settle_plant_tol}};
  root["output"] = {{"dir", cfg.output.dir},
                    {"csv", cfg.output.csv},
                    {"summary", cfg.output.summary}};
  return root.dump(2) + "\n";
}

}  // namespace ghpctrl
