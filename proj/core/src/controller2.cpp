#include "ghpctrl/controller2.hpp"

namespace ghpctrl {

SupplyController::SupplyController(const BuildingGraph& graph, const GhpParams& ghp,
                                   CtrlGains gains, bool extra_dynamics, bool reduced_comm)
    : graph_(&graph), ghp_(&ghp), gains_(std::move(gains)),
      extra_dynamics_(extra_dynamics), reduced_comm_(reduced_comm) {
  if (!extra_dynamics_) gains_ = gains_.with_extra_dynamics_disabled();
  gains_.validate(graph.size(), /*allow_zero_extra=*/!extra_dynamics_);
  ghp.validate();
}

NeighborMsg SupplyController::neighbor_signal(int zone, const ZoneCtrl2State& x,
                                              double T_zone) const {
  const ZoneParams& z = graph_->zones[static_cast<std::size_t>(zone)];
  NeighborMsg m;
  m.sender = zone;
  m.zeta = gains_.k_zeta[zone] * (x.zeta_t + z.C * T_zone);
  m.T_minus_Z = T_zone - x.Z;
  return m;
}

ZoneToCompressorMsg SupplyController::compressor_signal(int zone,
                                                        const ZoneCtrl2State& x) const {
  const ZoneParams& z = graph_->zones[static_cast<std::size_t>(zone)];
  ZoneToCompressorMsg m;
  m.sender = zone;
  m.u = x.u;
  m.mu_bound = x.mu_up * z.q_max * ghp_->c_w;
  return m;
}

ZoneCtrl2State SupplyController::initial_state(int zone, const Measurement& meas) const {
  const ZoneParams& z = graph_->zones[static_cast<std::size_t>(zone)];
  ZoneCtrl2State x;
  x.Z = meas.T_zone;
  x.Zf = meas.T_floor;
  x.Zf_hat = meas.T_floor;
  x.zeta_t = -z.C * meas.T_zone;
  return x;
}

CompressorState SupplyController::initial_compressor_state() const {
  CompressorState c;
  c.T_supply = 0.5 * (ghp_->T_s_min + ghp_->T_s_max);
  return c;
}

ZoneCtrl2State SupplyController::zone_rhs(int zone, const ZoneCtrl2State& x,
                                          const Measurement& meas,
                                          std::span<const NeighborMsg> msgs,
                                          const CompressorBroadcast& bc, double T_set,
                                          double s) const {
  const ZoneParams& z = graph_->zones[static_cast<std::size_t>(zone)];
  const auto& nbrs = graph_->neighbors(zone);
  if (reduced_comm_) {
    if (!msgs.empty()) {
      throw StructuralError("zone_rhs: reduced-comm controller received zone messages");
    }
  } else {
    if (msgs.size() != nbrs.size()) {
      throw StructuralError("zone_rhs: message set does not match the neighbor set");
    }
    for (std::size_t k = 0; k < msgs.size(); ++k) {
      if (msgs[k].sender != nbrs[k].first) {
        throw StructuralError("zone_rhs: unexpected message sender");
      }
    }
  }

  const double T_supply = bc.T_supply;
  const double sgn = ghp_->mode == Mode::heating ? 1.0 : -1.0;
  const double zeta = gains_.k_zeta[zone] * (x.zeta_t + z.C * meas.T_zone);

  double coupling = 1.0 / z.R_out + 1.0 / z.R_af;
  double neighbor_zeta = 0.0;
  double zeta_t_dot = (meas.T_zone - x.Z) / z.R_out +
                      (meas.T_zone - x.Z - meas.T_floor + x.Zf) / z.R_af;
  if (!reduced_comm_) {
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      const double R = nbrs[k].second;
      coupling += 1.0 / R;
      neighbor_zeta += msgs[k].zeta / R;
      zeta_t_dot += (meas.T_zone - x.Z - msgs[k].T_minus_Z) / R;
    }
  }

  const double bound = x.u - z.q_max * ghp_->c_w * (T_supply - x.Zf);

  ZoneCtrl2State d;
  d.Z = gains_.k_Z[zone] * (z.comfort_weight * (T_set - x.Z) + zeta * coupling -
                            neighbor_zeta - x.lambda / z.R_af);
  d.u = gains_.k_u[zone] *
        (2.0 * s * x.u / (ghp_->cop_a * T_supply - ghp_->cop_b) - x.lambda -
         sgn * (x.mu_up - x.mu_lo));
  d.Zf = gains_.k_Zf[zone] * ((x.lambda - zeta) / z.R_af -
                              sgn * x.mu_up * z.q_max * ghp_->c_w +
                              gains_.k_eZf[zone] * (x.Zf_hat - x.Zf));
  d.Zf_hat = gains_.k_eZf_hat[zone] * (x.Zf - x.Zf_hat);
  d.zeta_t = zeta_t_dot;
  d.lambda = gains_.k_lambda[zone] * ((x.Z - x.Zf) / z.R_af + x.u);
  d.mu_up = gains_.k_mu_up[zone] * positive_projection(sgn * bound, x.mu_up);
  d.mu_lo = gains_.k_mu_lo[zone] * positive_projection(sgn * (-x.u), x.mu_lo);
  return d;
}

CompressorState SupplyController::compressor_rhs(const CompressorState& c,
                                                 std::span<const ZoneToCompressorMsg> inbox,
                                                 double s) const {
  const int n = graph_->size();
  if (static_cast<int>(inbox.size()) != n) {
    throw StructuralError("compressor_rhs: expected one message per zone");
  }
  for (int i = 0; i < n; ++i) {
    if (inbox[static_cast<std::size_t>(i)].sender != i) {
      throw StructuralError("compressor_rhs: missing or duplicate zone message");
    }
  }
  const double cop_val = cop(*ghp_, c.T_supply);
  const double sgn = ghp_->mode == Mode::heating ? 1.0 : -1.0;
  // fixed zone order for a deterministic aggregate
  double sum_u_sq = 0.0;
  double sum_mu_bound = 0.0;
  for (int i = 0; i < n; ++i) {
    const ZoneToCompressorMsg& m = inbox[static_cast<std::size_t>(i)];
    sum_u_sq += m.u * m.u;
    sum_mu_bound += m.mu_bound;
  }
  CompressorState d;
  d.T_supply = gains_.k_Ts * (-ghp_->cop_a * s * sum_u_sq / (cop_val * cop_val) +
                              sgn * sum_mu_bound - c.nu_up + c.nu_lo);
  d.nu_up = gains_.k_nu_up * positive_projection(c.T_supply - ghp_->T_s_max, c.nu_up);
  d.nu_lo = gains_.k_nu_lo * positive_projection(ghp_->T_s_min - c.T_supply, c.nu_lo);
  return d;
}

SupplyController SupplyController::make_reduced_comm() const {
  return SupplyController(*graph_, *ghp_, gains_, extra_dynamics_, /*reduced_comm=*/true);
}

}  // namespace ghpctrl
