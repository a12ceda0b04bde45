#include "ghpctrl/controller1.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ghpctrl {

double positive_projection(double h, double x) {
  if (x < 0.0) {
    throw StructuralError("positive_projection: projected variable is negative");
  }
  if (x > 0.0) return h;
  return std::max(0.0, h);
}

CtrlGains CtrlGains::defaults(int n) {
  CtrlGains g;
  g.k_Z = VectorXd::Constant(n, 0.025);
  g.k_u = VectorXd::Constant(n, 1.0);
  g.k_eu = VectorXd::Constant(n, 10.0);
  g.k_eu_hat = VectorXd::Constant(n, 0.1);
  g.k_Zf = VectorXd::Constant(n, 0.033);
  g.k_eZf = VectorXd::Constant(n, 2.0);
  g.k_eZf_hat = VectorXd::Constant(n, 1.0);
  g.k_zeta = VectorXd::Constant(n, 1.0);
  g.k_lambda = VectorXd::Constant(n, 1.0);
  g.k_mu_up = VectorXd::Constant(n, 1.0);
  g.k_mu_lo = VectorXd::Constant(n, 1.0);
  g.k_Ts = 0.05;
  g.k_nu_up = 1.0;
  g.k_nu_lo = 1.0;
  return g;
}

void CtrlGains::validate(int n, bool allow_zero_extra) const {
  const auto check = [n](const VectorXd& v, const char* name, bool allow_zero) {
    if (v.size() != n) {
      throw StructuralError(std::string("gains: ") + name + " must have one entry per zone");
    }
    const double lo = v.minCoeff();
    if (allow_zero ? lo < 0.0 : !(lo > 0.0)) {
      throw StructuralError(std::string("gains: ") + name +
                            (allow_zero ? " must be >= 0" : " must be > 0"));
    }
  };
  check(k_Z, "k_Z", false);
  check(k_u, "k_u", false);
  check(k_eu, "k_eu", allow_zero_extra);
  check(k_eu_hat, "k_eu_hat", false);
  check(k_Zf, "k_Zf", false);
  check(k_eZf, "k_eZf", allow_zero_extra);
  check(k_eZf_hat, "k_eZf_hat", false);
  check(k_zeta, "k_zeta", false);
  check(k_lambda, "k_lambda", false);
  check(k_mu_up, "k_mu_up", false);
  check(k_mu_lo, "k_mu_lo", false);
  if (!(k_Ts > 0.0) || !(k_nu_up > 0.0) || !(k_nu_lo > 0.0)) {
    throw StructuralError("gains: compressor gains must be > 0");
  }
}

CtrlGains CtrlGains::with_extra_dynamics_disabled() const {
  CtrlGains g = *this;
  g.k_eu.setZero();
  g.k_eZf.setZero();
  return g;
}

double recover_flow(double u, double T_supply, double Zf, double c_w, Mode mode,
                    double eps) {
  if (std::abs(T_supply - Zf) < eps) {
    throw std::domain_error(
        std::string("recover_flow: supply/floor temperature gap below ") +
        std::to_string(eps) + (mode == Mode::heating ? " (heating)" : " (cooling)"));
  }
  // a gap on the wrong side of the mode yields a flow outside [0, q_max];
  // the actuation clamp maps such transients back into the valve range
  return u / (c_w * (T_supply - Zf));
}

FlowController::FlowController(const BuildingGraph& graph, const GhpParams& ghp,
                               CtrlGains gains, bool extra_dynamics, bool decentralized)
    : graph_(&graph), ghp_(&ghp), gains_(std::move(gains)),
      extra_dynamics_(extra_dynamics), decentralized_(decentralized) {
  if (!extra_dynamics_) gains_ = gains_.with_extra_dynamics_disabled();
  gains_.validate(graph.size(), /*allow_zero_extra=*/!extra_dynamics_);
  ghp.validate();
}

NeighborMsg FlowController::neighbor_signal(int zone, const ZoneCtrl1State& x,
                                            double T_zone) const {
  const ZoneParams& z = graph_->zones[static_cast<std::size_t>(zone)];
  NeighborMsg m;
  m.sender = zone;
  m.zeta = gains_.k_zeta[zone] * (x.zeta_t + z.C * T_zone);
  m.T_minus_Z = T_zone - x.Z;
  return m;
}

ZoneCtrl1State FlowController::initial_state(int zone, const Measurement& meas) const {
  const ZoneParams& z = graph_->zones[static_cast<std::size_t>(zone)];
  ZoneCtrl1State x;
  x.Z = meas.T_zone;
  x.Zf = meas.T_floor;
  x.Zf_hat = meas.T_floor;
  x.zeta_t = -z.C * meas.T_zone;
  return x;
}

ZoneCtrl1State FlowController::zone_rhs(int zone, const ZoneCtrl1State& x,
                                        const Measurement& meas,
                                        std::span<const NeighborMsg> msgs, double T_supply,
                                        double T_set, double s) const {
  const ZoneParams& z = graph_->zones[static_cast<std::size_t>(zone)];
  const auto& nbrs = graph_->neighbors(zone);
  if (decentralized_) {
    if (!msgs.empty()) {
      throw StructuralError("zone_rhs: decentralized controller received messages");
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

  const double sgn = ghp_->mode == Mode::heating ? 1.0 : -1.0;
  const double zeta = gains_.k_zeta[zone] * (x.zeta_t + z.C * meas.T_zone);

  double coupling = 1.0 / z.R_out + 1.0 / z.R_af;
  double neighbor_zeta = 0.0;
  double zeta_t_dot = (meas.T_zone - x.Z) / z.R_out +
                      (meas.T_zone - x.Z - meas.T_floor + x.Zf) / z.R_af;
  if (!decentralized_) {
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      const double R = nbrs[k].second;
      coupling += 1.0 / R;
      neighbor_zeta += msgs[k].zeta / R;
      zeta_t_dot += (meas.T_zone - x.Z - msgs[k].T_minus_Z) / R;
    }
  }

  const double bound = x.u - z.q_max * ghp_->c_w * (T_supply - x.Zf);

  ZoneCtrl1State d;
  d.Z = gains_.k_Z[zone] * (z.comfort_weight * (T_set - x.Z) + zeta * coupling -
                            neighbor_zeta - x.lambda / z.R_af);
  d.u = gains_.k_u[zone] *
        (sgn * s / (ghp_->cop_a * T_supply - ghp_->cop_b) - x.lambda -
         sgn * (x.mu_up - x.mu_lo) + gains_.k_eu[zone] * (x.u_hat - x.u));
  d.u_hat = gains_.k_eu_hat[zone] * (x.u - x.u_hat);
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

FlowController FlowController::make_decentralized() const {
  return FlowController(*graph_, *ghp_, gains_, extra_dynamics_, /*decentralized=*/true);
}

}  // namespace ghpctrl
