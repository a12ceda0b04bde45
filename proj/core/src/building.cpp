#include "ghpctrl/building.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace ghpctrl {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw StructuralError(std::string(name) + " must be positive and finite");
  }
}

}  // namespace

BuildingGraph::BuildingGraph(std::vector<ZoneParams> z, std::vector<Edge> e)
    : zones(std::move(z)), edges(std::move(e)) {
  finalize();
}

void BuildingGraph::finalize() {
  const int n = size();
  if (n == 0) throw StructuralError("building: at least one zone required");
  for (const ZoneParams& zp : zones) {
    require_positive(zp.C, "C");
    require_positive(zp.R_out, "R_out");
    require_positive(zp.R_af, "R_af");
    require_positive(zp.C_floor, "C_floor");
    require_positive(zp.R_fw, "R_fw");
    require_positive(zp.C_water, "C_water");
    require_positive(zp.q_max, "q_max");
    require_positive(zp.comfort_weight, "comfort_weight");
    if (!std::isfinite(zp.T_set)) throw StructuralError("T_set must be finite");
  }
  std::set<std::pair<int, int>> seen;
  for (Edge& e : edges) {
    if (e.i > e.j) std::swap(e.i, e.j);
    if (e.i == e.j) throw StructuralError("building: self-edges are not allowed");
    if (e.i < 0 || e.j >= n) throw StructuralError("building: edge references unknown zone");
    if (!seen.insert({e.i, e.j}).second) {
      throw StructuralError("building: duplicate edge");
    }
    require_positive(e.R, "edge R");
  }
  if (wall_states) require_positive(C_wall, "C_wall");

  adj_.assign(n, {});
  for (const Edge& e : edges) {
    adj_[e.i].push_back({e.j, e.R});
    adj_[e.j].push_back({e.i, e.R});
  }
  for (auto& lst : adj_) std::sort(lst.begin(), lst.end());

  // connectivity (single zone is trivially connected)
  if (n > 1) {
    std::vector<char> vis(n, 0);
    std::vector<int> stack{0};
    vis[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      for (const auto& [j, R] : adj_[i]) {
        if (!vis[j]) {
          vis[j] = 1;
          ++count;
          stack.push_back(j);
        }
      }
    }
    if (count != n) throw StructuralError("building: zone graph must be connected");
  }
}

const std::vector<std::pair<int, double>>& BuildingGraph::neighbors(int i) const {
  return adj_.at(static_cast<std::size_t>(i));
}

BuildingGraph BuildingGraph::without_edges() const {
  // Edge-free graphs model the decentralized limit (R_ij = infinity); they are
  // intentionally disconnected, so only the adjacency is rebuilt here.
  BuildingGraph g;
  g.zones = zones;
  g.edges.clear();
  g.wall_states = false;
  g.C_wall = C_wall;
  g.adj_.assign(g.size(), {});
  return g;
}

BuildingGraph BuildingGraph::with_scaled_edge_resistance(double factor) const {
  BuildingGraph g = *this;
  g.wall_states = false;
  for (Edge& e : g.edges) e.R *= factor;
  g.finalize();
  return g;
}

VectorXd BuildingGraph::q_max_vector() const {
  VectorXd v(size());
  for (int i = 0; i < size(); ++i) v[i] = zones[static_cast<std::size_t>(i)].q_max;
  return v;
}

VectorXd BuildingGraph::T_set_vector() const {
  VectorXd v(size());
  for (int i = 0; i < size(); ++i) v[i] = zones[static_cast<std::size_t>(i)].T_set;
  return v;
}

void GhpParams::validate() const {
  require_positive(c_w, "c_w");
  require_positive(cop_a, "cop_a");
  require_positive(cop_b, "cop_b");
  if (!(T_s_min <= T_s_max)) throw StructuralError("ghp: T_s_min must be <= T_s_max");
  if (!(cop_b - cop_a * T_s_max > 0.0)) {
    throw StructuralError("ghp: COP must stay positive up to T_s_max");
  }
  if (energy_weight < 0.0) throw StructuralError("ghp: energy_weight must be >= 0");
}

PlantState PlantState::uniform(const BuildingGraph& g, double T0) {
  PlantState s;
  s.T_zone = VectorXd::Constant(g.size(), T0);
  s.T_floor = VectorXd::Constant(g.size(), T0);
  s.T_water = VectorXd::Constant(g.size(), T0);
  if (g.wall_states) s.T_wall = VectorXd::Constant(g.edge_count(), T0);
  return s;
}

void PlantState::require_matching(const BuildingGraph& g) const {
  const int n = g.size();
  if (T_zone.size() != n || T_floor.size() != n || T_water.size() != n) {
    throw StructuralError("plant state dimension does not match building");
  }
  const int walls = g.wall_states ? g.edge_count() : 0;
  if (T_wall.size() != walls) {
    throw StructuralError("plant wall-state dimension does not match building");
  }
}

bool PlantState::all_finite() const {
  return T_zone.allFinite() && T_floor.allFinite() && T_water.allFinite() &&
         (T_wall.size() == 0 || T_wall.allFinite());
}

void Disturbances::validate(int n_zones) const {
  if (static_cast<int>(Q.size()) != n_zones) {
    throw StructuralError("disturbances: one Q profile per zone required");
  }
  for (const PiecewiseProfile& p : Q) {
    if (p.min_value() < 0.0) {
      throw StructuralError("disturbances: heat gains Q must be >= 0");
    }
  }
}

VectorXd Disturbances::Q_at(double t) const {
  VectorXd q(static_cast<int>(Q.size()));
  for (int i = 0; i < q.size(); ++i) q[i] = Q[static_cast<std::size_t>(i)](t);
  return q;
}

BuildingGraph reference_building() {
  std::vector<ZoneParams> zones(4);
  const double q_max[4] = {0.03, 0.04, 0.045, 0.035};
  const double T_set[4] = {21.0, 22.0, 23.0, 24.0};
  for (int i = 0; i < 4; ++i) {
    ZoneParams& z = zones[static_cast<std::size_t>(i)];
    z.C = 20.0;
    z.R_out = 15.0;
    z.R_af = 3.0;
    z.C_floor = 35.0;
    z.R_fw = 5.0;
    z.C_water = 25.0;
    z.q_max = q_max[i];
    z.T_set = T_set[i];
    z.comfort_weight = 0.5;
  }
  std::vector<Edge> edges = {{0, 1, 23.0}, {0, 2, 23.0}, {1, 3, 23.0}, {2, 3, 23.0}};
  return BuildingGraph(std::move(zones), std::move(edges));
}

GhpParams reference_ghp() {
  GhpParams g;
  g.c_w = 4.186;
  g.cop_a = 0.11;
  g.cop_b = 8.4;
  g.T_s_min = 38.0;
  g.T_s_max = 42.0;
  g.mode = Mode::heating;
  g.validate();
  return g;
}

}  // namespace ghpctrl
