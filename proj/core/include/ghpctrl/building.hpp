#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "ghpctrl/errors.hpp"
#include "ghpctrl/profile.hpp"

namespace ghpctrl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Mode { heating, cooling };

/// Thermal parameters of one zone and its floor/water loop.
/// Resistances in degC/kW, capacitances in kJ/degC, so R*C is a time constant
/// in seconds. Flows in kg/s.
struct ZoneParams {
  double C = 20.0;        ///< zone air thermal capacitance
  double R_out = 15.0;    ///< zone <-> outdoor resistance
  double R_af = 3.0;      ///< zone air <-> floor resistance
  double C_floor = 35.0;  ///< floor capacitance
  double R_fw = 5.0;      ///< floor <-> pipe water resistance
  double C_water = 25.0;  ///< pipe water capacitance
  double q_max = 0.03;    ///< maximum water flow rate
  double T_set = 21.0;    ///< user temperature set point [degC]
  double comfort_weight = 0.5;  ///< weight of the squared set-point deviation
};

/// Inter-zone wall: unordered pair (i, j) with thermal resistance R.
struct Edge {
  int i = 0;
  int j = 0;
  double R = 23.0;
};

/// Undirected connected zone graph plus the optional second-order wall states.
class BuildingGraph {
 public:
  std::vector<ZoneParams> zones;
  std::vector<Edge> edges;     ///< one entry per unordered pair, i < j
  bool wall_states = false;    ///< model wall temperatures as extra states
  double C_wall = 50.0;        ///< wall capacitance, used when wall_states

  BuildingGraph() = default;
  BuildingGraph(std::vector<ZoneParams> z, std::vector<Edge> e);

  int size() const { return static_cast<int>(zones.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }

  /// Validates invariants (positive parameters, undirected connected graph,
  /// no self or duplicate edges) and rebuilds the adjacency. Throws
  /// StructuralError on violation. Must be called after any mutation.
  void finalize();

  /// Neighbors of zone i as (zone id, wall resistance), sorted by zone id.
  const std::vector<std::pair<int, double>>& neighbors(int i) const;

  /// Copy with all inter-zone edges removed (R_ij = infinity everywhere).
  BuildingGraph without_edges() const;

  /// Copy with every edge resistance replaced by factor * R (Remark-1 style
  /// reduced model uses factor = 2).
  BuildingGraph with_scaled_edge_resistance(double factor) const;

  VectorXd q_max_vector() const;
  VectorXd T_set_vector() const;

 private:
  std::vector<std::vector<std::pair<int, double>>> adj_;
};

/// Heat pump parameters. COP is the linear law cop_b - cop_a * T_supply.
struct GhpParams {
  double c_w = 4.186;      ///< specific heat of water [kJ/(kg degC)]
  double cop_a = 0.11;     ///< COP slope [1/degC]
  double cop_b = 8.4;      ///< COP intercept
  double T_s_min = 38.0;   ///< supply temperature lower bound [degC]
  double T_s_max = 42.0;   ///< supply temperature upper bound [degC]
  double energy_weight = 0.0;  ///< default objective weight s
  Mode mode = Mode::heating;

  void validate() const;
};

/// Physical temperatures. T_wall is empty unless the graph has wall states
/// (then one entry per edge, in edge order).
struct PlantState {
  VectorXd T_zone;
  VectorXd T_floor;
  VectorXd T_water;
  VectorXd T_wall;

  static PlantState uniform(const BuildingGraph& g, double T0);
  int total_states() const {
    return static_cast<int>(T_zone.size() + T_floor.size() + T_water.size() + T_wall.size());
  }
  void require_matching(const BuildingGraph& g) const;
  bool all_finite() const;
};

/// Actuated inputs: per-zone water flow and the shared supply temperature.
struct PlantInputs {
  VectorXd q;
  double T_supply = 40.0;
};

/// Exogenous signals: outdoor temperature and per-zone heat gains over time.
struct Disturbances {
  PiecewiseProfile T_out;
  std::vector<PiecewiseProfile> Q;

  void validate(int n_zones) const;
  VectorXd Q_at(double t) const;
};

/// The four-zone building of the reference experiments: 2x2 cycle topology,
/// uniform RC parameters, heterogeneous flow limits and set points.
BuildingGraph reference_building();
GhpParams reference_ghp();

}  // namespace ghpctrl
