#pragma once

#include <span>

#include "ghpctrl/building.hpp"
#include "ghpctrl/problem.hpp"

namespace ghpctrl {

/// Positive projection used by the multiplier dynamics: passes h through when
/// x > 0 and clips negative drift at the boundary x = 0. x must be >= 0.
double positive_projection(double h, double x);

/// Per-zone controller gains, one value per zone. k_Ts/k_nu_* are scalars
/// owned by the compressor (scenario II). The defaults are the reference
/// experiment values.
struct CtrlGains {
  VectorXd k_Z;
  VectorXd k_u;
  VectorXd k_eu;       ///< extra-dynamics coupling on u (0 disables)
  VectorXd k_eu_hat;
  VectorXd k_Zf;
  VectorXd k_eZf;      ///< extra-dynamics coupling on Z_floor (0 disables)
  VectorXd k_eZf_hat;
  VectorXd k_zeta;
  VectorXd k_lambda;
  VectorXd k_mu_up;
  VectorXd k_mu_lo;
  double k_Ts = 0.05;
  double k_nu_up = 1.0;
  double k_nu_lo = 1.0;

  static CtrlGains defaults(int n_zones);
  void validate(int n_zones, bool allow_zero_extra) const;
  CtrlGains with_extra_dynamics_disabled() const;
};

/// Zone controller state for the flow-only scheme. Z/Zf are the internal
/// steady-state targets for zone and floor temperature, u the commanded heat
/// injection [kW], u_hat/Zf_hat the oscillation-damping companions, zeta_t
/// the measurement-free transform of the zone-balance multiplier
/// (zeta_t = zeta / k_zeta - C * T_zone), lambda the floor-balance
/// multiplier, and mu_up/mu_lo the flow-bound multipliers (kept >= 0).
struct ZoneCtrl1State {
  double Z = 0.0;
  double u = 0.0;
  double u_hat = 0.0;
  double Zf = 0.0;
  double Zf_hat = 0.0;
  double zeta_t = 0.0;
  double lambda = 0.0;
  double mu_up = 0.0;
  double mu_lo = 0.0;

  static constexpr int kCount = 9;
};

/// Values a zone shares with its graph neighbors each exchange: the
/// reconstructed balance multiplier and the tracking error T_zone - Z.
struct NeighborMsg {
  int sender = -1;
  double zeta = 0.0;
  double T_minus_Z = 0.0;
};

/// Local measurements available to a zone controller.
struct Measurement {
  double T_zone = 0.0;
  double T_floor = 0.0;
};

/// Flow recovery q = u / (c_w (T_supply - Zf)). Throws std::domain_error when
/// the temperature gap magnitude falls below eps. In-mode gaps (heating:
/// T_supply > Zf) give non-negative flows for non-negative u; transients on
/// the wrong side produce out-of-range flows that the actuation clamp
/// absorbs.
double recover_flow(double u, double T_supply, double Zf, double c_w, Mode mode,
                    double eps = 1e-6);

/// Distributed real-time flow-rate controller (fixed supply temperature):
/// primal-dual dynamics with damping states, positive projection on the
/// bound multipliers, and the measurement-free zeta transform. The right
/// hand side reads only the zone's own state, its own measurements and its
/// neighbor messages; disturbances never appear.
class FlowController {
 public:
  FlowController(const BuildingGraph& graph, const GhpParams& ghp, CtrlGains gains,
                 bool extra_dynamics = true, bool decentralized = false);

  /// Controller state derivative for one zone. msgs must carry exactly the
  /// zone's neighbors sorted by sender id (empty when decentralized).
  ZoneCtrl1State zone_rhs(int zone, const ZoneCtrl1State& x, const Measurement& meas,
                          std::span<const NeighborMsg> msgs, double T_supply,
                          double T_set, double s) const;

  /// Outgoing neighbor signal of a zone given its state and measurement.
  NeighborMsg neighbor_signal(int zone, const ZoneCtrl1State& x, double T_zone) const;

  /// Initial controller state for given initial measurements: targets start
  /// at the measured temperatures, commands and multipliers at zero,
  /// zeta_t at -C*T so that the untransformed multiplier starts at zero.
  ZoneCtrl1State initial_state(int zone, const Measurement& meas) const;

  /// Variant that ignores all neighbor coupling (R_ij = infinity in the
  /// target and multiplier dynamics). Only local measurement is needed.
  FlowController make_decentralized() const;

  bool decentralized() const { return decentralized_; }
  bool extra_dynamics() const { return extra_dynamics_; }
  const BuildingGraph& graph() const { return *graph_; }
  const GhpParams& ghp() const { return *ghp_; }
  const CtrlGains& gains() const { return gains_; }

 private:
  const BuildingGraph* graph_;
  const GhpParams* ghp_;
  CtrlGains gains_;
  bool extra_dynamics_;
  bool decentralized_;
};

}  // namespace ghpctrl
