#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

using namespace ghpctrl;

namespace {

ZoneCtrl2State state_at_point(const Scenario& sc, const PrimalDualPoint& pt, int i) {
  ZoneCtrl2State s;
  s.Z = pt.Z[i];
  s.u = pt.u[i];
  s.Zf = pt.Zf[i];
  s.Zf_hat = pt.Zf[i];
  s.zeta_t = pt.zeta[i] / sc.gains.k_zeta[i] -
             sc.graph.zones[static_cast<std::size_t>(i)].C * pt.Z[i];
  s.lambda = pt.lambda[i];
  s.mu_up = pt.mu_up[i];
  s.mu_lo = pt.mu_lo[i];
  return s;
}

}  // namespace

TEST_CASE("compressor rests with no demand and an interior supply temperature") {
  const Scenario sc = test::scenario2(5.0, 0.0, 1.0);
  const SupplyController ctrl(sc.graph, sc.ghp, sc.gains);
  CompressorState c;
  c.T_supply = 40.0;
  std::vector<ZoneToCompressorMsg> inbox(4);
  for (int i = 0; i < 4; ++i) inbox[static_cast<std::size_t>(i)].sender = i;
  const CompressorState d = ctrl.compressor_rhs(c, inbox, 1.0);
  CHECK(d.T_supply == 0.0);
  CHECK(d.nu_up == 0.0);
  CHECK(d.nu_lo == 0.0);
}

TEST_CASE("box multiplier dynamics at the lower edge") {
  const Scenario sc = test::scenario2(5.0, 0.0, 1.0);
  const SupplyController ctrl(sc.graph, sc.ghp, sc.gains);
  CompressorState c;
  c.T_supply = sc.ghp.T_s_min;  // exactly at the edge
  c.nu_lo = 0.0;
  std::vector<ZoneToCompressorMsg> inbox(4);
  for (int i = 0; i < 4; ++i) inbox[static_cast<std::size_t>(i)].sender = i;
  const CompressorState d = ctrl.compressor_rhs(c, inbox, 1.0);
  CHECK(d.nu_lo == 0.0);  // (T_s_min - T_s)^+ = max(0, 0)
  // once T_s dips below the edge the multiplier starts growing
  CompressorState below = c;
  below.T_supply = sc.ghp.T_s_min - 0.5;
  const CompressorState db = ctrl.compressor_rhs(below, inbox, 1.0);
  CHECK(db.nu_lo > 0.0);
}

TEST_CASE("compressor enforces one message per zone") {
  const Scenario sc = test::scenario2(5.0, 0.0, 1.0);
  const SupplyController ctrl(sc.graph, sc.ghp, sc.gains);
  CompressorState c = ctrl.initial_compressor_state();
  std::vector<ZoneToCompressorMsg> missing(3);
  CHECK_THROWS_AS(ctrl.compressor_rhs(c, missing, 1.0), StructuralError);
  std::vector<ZoneToCompressorMsg> dup(4);
  dup[0].sender = 0;
  dup[1].sender = 0;
  dup[2].sender = 2;
  dup[3].sender = 3;
  CHECK_THROWS_AS(ctrl.compressor_rhs(c, dup, 1.0), StructuralError);
}

TEST_CASE("joint stationarity at the scenario-II optimum") {
  const Scenario sc = test::scenario2(-2.0, 0.0, 1.0);
  const SteadyStateProblem p = test::problem_of(sc);
  const ReferenceSolution sol = solve_reference(p);
  REQUIRE(sol.kkt.summary < 1e-8);

  const SupplyController ctrl(sc.graph, sc.ghp, sc.gains);
  const CompressorBroadcast bc{sol.point.T_supply};
  std::vector<ZoneToCompressorMsg> inbox;
  for (int i = 0; i < 4; ++i) {
    std::vector<NeighborMsg> msgs;
    for (const auto& [j, R] : sc.graph.neighbors(i)) {
      msgs.push_back(ctrl.neighbor_signal(j, state_at_point(sc, sol.point, j),
                                          sol.point.Z[j]));
    }
    const ZoneCtrl2State xi = state_at_point(sc, sol.point, i);
    const Measurement meas{sol.point.Z[i], sol.point.Zf[i]};
    const ZoneCtrl2State d = ctrl.zone_rhs(
        i, xi, meas, msgs, bc, sc.graph.zones[static_cast<std::size_t>(i)].T_set, 1.0);
    for (double v : {d.Z, d.u, d.Zf, d.Zf_hat, d.zeta_t, d.lambda, d.mu_up, d.mu_lo}) {
      CHECK(std::abs(v) < 1e-6);
    }
    inbox.push_back(ctrl.compressor_signal(i, xi));
  }
  const CompressorState cs{sol.point.T_supply, sol.point.nu_up, sol.point.nu_lo};
  const CompressorState dc = ctrl.compressor_rhs(cs, inbox, 1.0);
  CHECK(std::abs(dc.T_supply) < 1e-8);
  CHECK(dc.nu_up == 0.0);
  CHECK(dc.nu_lo == 0.0);
}

TEST_CASE("zero energy weight removes the energy drift from the command") {
  const Scenario sc = test::scenario2(5.0, 0.0, 0.0);
  const SupplyController ctrl(sc.graph, sc.ghp, sc.gains);
  ZoneCtrl2State x = ctrl.initial_state(0, {15.0, 15.0});
  x.u = 1.2;
  x.lambda = -0.4;
  x.mu_up = 0.1;
  x.mu_lo = 0.05;
  std::vector<NeighborMsg> msgs;
  for (const auto& [j, R] : sc.graph.neighbors(0)) {
    NeighborMsg m;
    m.sender = j;
    msgs.push_back(m);
  }
  const ZoneCtrl2State d =
      ctrl.zone_rhs(0, x, {15.0, 15.0}, msgs, CompressorBroadcast{40.0}, 21.0, 0.0);
  // u' = k_u (0 - lambda - mu_up + mu_lo)
  CHECK(d.u == doctest::Approx(1.0 * (0.4 - 0.1 + 0.05)).epsilon(1e-14));
}

TEST_CASE("reduced-communication variant ignores zone messages") {
  const Scenario sc = test::scenario2(5.0, 0.0, 1.0);
  const SupplyController full(sc.graph, sc.ghp, sc.gains);
  const SupplyController reduced = full.make_reduced_comm();
  CHECK(reduced.reduced_comm());
  ZoneCtrl2State x = full.initial_state(0, {15.0, 15.0});
  const std::vector<NeighborMsg> none;
  CHECK_NOTHROW(reduced.zone_rhs(0, x, {15.0, 15.0}, none, CompressorBroadcast{40.0},
                                 21.0, 1.0));
  std::vector<NeighborMsg> one(1);
  one[0].sender = 1;
  CHECK_THROWS_AS(reduced.zone_rhs(0, x, {15.0, 15.0}, one, CompressorBroadcast{40.0},
                                   21.0, 1.0),
                  StructuralError);
  // single zone: reduced and full coincide
  std::vector<ZoneParams> zones(1);
  BuildingGraph g1(std::move(zones), {});
  const SupplyController f1(g1, sc.ghp, CtrlGains::defaults(1));
  const SupplyController r1 = f1.make_reduced_comm();
  ZoneCtrl2State y = f1.initial_state(0, {15.0, 15.0});
  y.u = 0.7;
  const ZoneCtrl2State da =
      f1.zone_rhs(0, y, {15.5, 15.2}, none, CompressorBroadcast{40.0}, 21.0, 1.0);
  const ZoneCtrl2State db =
      r1.zone_rhs(0, y, {15.5, 15.2}, none, CompressorBroadcast{40.0}, 21.0, 1.0);
  CHECK(da.Z == db.Z);
  CHECK(da.u == db.u);
  CHECK(da.zeta_t == db.zeta_t);
}
