#pragma once

#include <span>

#include "ghpctrl/controller1.hpp"

namespace ghpctrl {

/// Zone controller state for the general scheme (flows + supply
/// temperature). Same roles as ZoneCtrl1State; the u damping companion is
/// not needed here because the quadratic energy term already damps u.
struct ZoneCtrl2State {
  double Z = 0.0;
  double u = 0.0;
  double Zf = 0.0;
  double Zf_hat = 0.0;
  double zeta_t = 0.0;
  double lambda = 0.0;
  double mu_up = 0.0;
  double mu_lo = 0.0;

  static constexpr int kCount = 8;
};

/// Compressor-side state: the shared supply temperature and the multipliers
/// of its box constraint.
struct CompressorState {
  double T_supply = 0.0;
  double nu_up = 0.0;
  double nu_lo = 0.0;

  static constexpr int kCount = 3;
};

/// Per-zone feedback to the compressor: the commanded heat and the weighted
/// upper-bound multiplier mu_up * q_max * c_w.
struct ZoneToCompressorMsg {
  int sender = -1;
  double u = 0.0;
  double mu_bound = 0.0;
};

/// Compressor to zones: the current supply temperature.
struct CompressorBroadcast {
  double T_supply = 0.0;
};

/// Distributed controller for the general case. Zones run the primal-dual
/// dynamics with the quadratic energy gradient 2 s u / (a T_s - b); the
/// compressor integrates T_supply against the aggregate zone feedback and
/// keeps it in its box through projected nu dynamics.
class SupplyController {
 public:
  SupplyController(const BuildingGraph& graph, const GhpParams& ghp, CtrlGains gains,
                   bool extra_dynamics = true, bool reduced_comm = false);

  ZoneCtrl2State zone_rhs(int zone, const ZoneCtrl2State& x, const Measurement& meas,
                          std::span<const NeighborMsg> msgs,
                          const CompressorBroadcast& bc, double T_set, double s) const;

  /// Compressor state derivative. inbox must carry exactly one message per
  /// zone, sorted by sender id; the aggregation order is fixed for
  /// determinism.
  CompressorState compressor_rhs(const CompressorState& c,
                                 std::span<const ZoneToCompressorMsg> inbox,
                                 double s) const;

  NeighborMsg neighbor_signal(int zone, const ZoneCtrl2State& x, double T_zone) const;
  ZoneToCompressorMsg compressor_signal(int zone, const ZoneCtrl2State& x) const;

  ZoneCtrl2State initial_state(int zone, const Measurement& meas) const;
  /// T_supply starts at the box midpoint, nu at zero.
  CompressorState initial_compressor_state() const;

  /// Variant without zone-to-zone communication (compressor link retained).
  SupplyController make_reduced_comm() const;

  bool reduced_comm() const { return reduced_comm_; }
  bool extra_dynamics() const { return extra_dynamics_; }
  const BuildingGraph& graph() const { return *graph_; }
  const GhpParams& ghp() const { return *ghp_; }
  const CtrlGains& gains() const { return gains_; }

 private:
  const BuildingGraph* graph_;
  const GhpParams* ghp_;
  CtrlGains gains_;
  bool extra_dynamics_;
  bool reduced_comm_;
};

}  // namespace ghpctrl
