#include "coupled.hpp"

namespace ghpctrl::detail {

namespace {
// offsets of the multiplier entries inside a zone controller block
constexpr int kMuUp1 = 7, kMuLo1 = 8;
constexpr int kMuUp2 = 6, kMuLo2 = 7;
}  // namespace

void clamp_duals(const Scenario& sc, VectorXd& x) {
  const bool flow_only = sc.kind == ScenarioKind::flow_only;
  const int up = flow_only ? kMuUp1 : kMuUp2;
  const int lo = flow_only ? kMuLo1 : kMuLo2;
  for (int i = 0; i < sc.graph.size(); ++i) {
    const int off = zone_offset(sc, i);
    if (x[off + up] < 0.0) x[off + up] = 0.0;
    if (x[off + lo] < 0.0) x[off + lo] = 0.0;
  }
  if (!flow_only) {
    const int c = compressor_offset(sc);
    if (x[c + 1] < 0.0) x[c + 1] = 0.0;
    if (x[c + 2] < 0.0) x[c + 2] = 0.0;
  }
}

ZoneCtrl1State load1(const VectorXd& x, int off) {
  ZoneCtrl1State s;
  s.Z = x[off + 0];
  s.u = x[off + 1];
  s.u_hat = x[off + 2];
  s.Zf = x[off + 3];
  s.Zf_hat = x[off + 4];
  s.zeta_t = x[off + 5];
  s.lambda = x[off + 6];
  s.mu_up = x[off + 7];
  s.mu_lo = x[off + 8];
  return s;
}

void store1(VectorXd& x, int off, const ZoneCtrl1State& s) {
  x[off + 0] = s.Z;
  x[off + 1] = s.u;
  x[off + 2] = s.u_hat;
  x[off + 3] = s.Zf;
  x[off + 4] = s.Zf_hat;
  x[off + 5] = s.zeta_t;
  x[off + 6] = s.lambda;
  x[off + 7] = s.mu_up;
  x[off + 8] = s.mu_lo;
}

ZoneCtrl2State load2(const VectorXd& x, int off) {
  ZoneCtrl2State s;
  s.Z = x[off + 0];
  s.u = x[off + 1];
  s.Zf = x[off + 2];
  s.Zf_hat = x[off + 3];
  s.zeta_t = x[off + 4];
  s.lambda = x[off + 5];
  s.mu_up = x[off + 6];
  s.mu_lo = x[off + 7];
  return s;
}

void store2(VectorXd& x, int off, const ZoneCtrl2State& s) {
  x[off + 0] = s.Z;
  x[off + 1] = s.u;
  x[off + 2] = s.Zf;
  x[off + 3] = s.Zf_hat;
  x[off + 4] = s.zeta_t;
  x[off + 5] = s.lambda;
  x[off + 6] = s.mu_up;
  x[off + 7] = s.mu_lo;
}

VectorXd default_initial_state(const Scenario& sc) {
  if (sc.initial_joint_state) return *sc.initial_joint_state;
  VectorXd x(sc.joint_size());
  const PlantState p = PlantState::uniform(sc.graph, sc.initial_temperature);
  x.head(sc.plant_block_size()) = pack_state(p);
  if (sc.kind == ScenarioKind::flow_only) {
    const FlowController ctrl(sc.graph, sc.ghp, sc.gains, sc.extra_dynamics,
                              sc.drop_zone_links);
    for (int i = 0; i < sc.graph.size(); ++i) {
      store1(x, zone_offset(sc, i), ctrl.initial_state(i, {p.T_zone[i], p.T_floor[i]}));
    }
  } else {
    const SupplyController ctrl(sc.graph, sc.ghp, sc.gains, sc.extra_dynamics,
                                sc.drop_zone_links);
    for (int i = 0; i < sc.graph.size(); ++i) {
      store2(x, zone_offset(sc, i), ctrl.initial_state(i, {p.T_zone[i], p.T_floor[i]}));
    }
    const CompressorState cs = ctrl.initial_compressor_state();
    const int c = compressor_offset(sc);
    x[c] = cs.T_supply;
    x[c + 1] = cs.nu_up;
    x[c + 2] = cs.nu_lo;
  }
  return x;
}

CoupledSystem::CoupledSystem(const Scenario& sc) : sc_(&sc) {
  if (sc.kind == ScenarioKind::flow_only) {
    flow_ctrl_.emplace(sc.graph, sc.ghp, sc.gains, sc.extra_dynamics, sc.drop_zone_links);
  } else {
    supply_ctrl_.emplace(sc.graph, sc.ghp, sc.gains, sc.extra_dynamics,
                         sc.drop_zone_links);
  }
}

VectorXd CoupledSystem::rhs(double t, const VectorXd& x) const {
  const Scenario& sc = *sc_;
  const int n = sc.graph.size();
  const int plant_size = sc.plant_block_size();
  const double T_out = sc.disturbances.T_out(t);
  const VectorXd Q = sc.disturbances.Q_at(t);
  const double s = sc.s_schedule(t);
  const double T_supply = supply_at(sc, t, x);

  VectorXd dx(x.size());
  const PlantState ps = unpack_state(sc.graph, x.head(plant_size));
  PlantInputs inputs;
  inputs.q = applied_flows(sc, t, x);
  inputs.T_supply = T_supply;
  dx.head(plant_size) = pack_state(plant_rhs(ps, inputs, T_out, Q, sc.graph, sc.ghp));

  if (sc.kind == ScenarioKind::flow_only) {
    const FlowController& ctrl = *flow_ctrl_;
    std::vector<NeighborMsg> msgs;
    for (int i = 0; i < n; ++i) {
      msgs.clear();
      if (!ctrl.decentralized()) {
        for (const auto& [j, R] : sc.graph.neighbors(i)) {
          msgs.push_back(ctrl.neighbor_signal(j, load1(x, zone_offset(sc, j)),
                                              ps.T_zone[j]));
        }
      }
      const ZoneCtrl1State xi = load1(x, zone_offset(sc, i));
      const Measurement meas{ps.T_zone[i], ps.T_floor[i]};
      store1(dx, zone_offset(sc, i),
             ctrl.zone_rhs(i, xi, meas, msgs, T_supply, sc.T_set_at(i, t), s));
    }
  } else {
    const SupplyController& ctrl = *supply_ctrl_;
    const CompressorBroadcast bc{T_supply};
    std::vector<NeighborMsg> msgs;
    std::vector<ZoneToCompressorMsg> inbox;
    for (int i = 0; i < n; ++i) {
      msgs.clear();
      if (!ctrl.reduced_comm()) {
        for (const auto& [j, R] : sc.graph.neighbors(i)) {
          msgs.push_back(ctrl.neighbor_signal(j, load2(x, zone_offset(sc, j)),
                                              ps.T_zone[j]));
        }
      }
      const ZoneCtrl2State xi = load2(x, zone_offset(sc, i));
      const Measurement meas{ps.T_zone[i], ps.T_floor[i]};
      store2(dx, zone_offset(sc, i),
             ctrl.zone_rhs(i, xi, meas, msgs, bc, sc.T_set_at(i, t), s));
      inbox.push_back(ctrl.compressor_signal(i, xi));
    }
    const int c = compressor_offset(sc);
    const CompressorState cs{x[c], x[c + 1], x[c + 2]};
    const CompressorState cd = ctrl.compressor_rhs(cs, inbox, s);
    dx[c] = cd.T_supply;
    dx[c + 1] = cd.nu_up;
    dx[c + 2] = cd.nu_lo;
  }
  return dx;
}

}  // namespace ghpctrl::detail
