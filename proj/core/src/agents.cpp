#include "ghpctrl/agents.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "coupled.hpp"

namespace ghpctrl {

// ---------------------------------------------------------------------------
// LinkSet

LinkSet LinkSet::build(const BuildingGraph& graph, ScenarioKind kind,
                       bool drop_zone_links) {
  LinkSet ls;
  ls.n_zones_ = graph.size();
  ls.compressor_links_ = kind == ScenarioKind::flow_and_supply;
  ls.allowed_.assign(static_cast<std::size_t>(ls.n_zones_), {});
  if (!drop_zone_links) {
    for (int i = 0; i < ls.n_zones_; ++i) {
      for (const auto& [j, R] : graph.neighbors(i)) {
        ls.allowed_[static_cast<std::size_t>(i)].push_back(j);
        ++ls.zone_link_count_;
      }
    }
  }
  return ls;
}

bool LinkSet::allows_zone_pair(AgentId from, AgentId to) const {
  if (from < 0 || from >= n_zones_ || to < 0 || to >= n_zones_) return false;
  const auto& lst = allowed_[static_cast<std::size_t>(from)];
  return std::binary_search(lst.begin(), lst.end(), to);
}

// ---------------------------------------------------------------------------
// RoundMailbox

RoundMailbox::RoundMailbox(const LinkSet* links) : links_(links) {
  neighbor_.assign(static_cast<std::size_t>(links->n_zones()), {});
  broadcast_seen_.assign(static_cast<std::size_t>(links->n_zones()), 0);
}

void RoundMailbox::post_neighbor(AgentId to, const NeighborMsg& msg) {
  if (!links_->allows_zone_pair(msg.sender, to)) {
    throw StructuralError("mailbox: message on non-existent zone link " +
                          std::to_string(msg.sender) + "->" + std::to_string(to));
  }
  neighbor_[static_cast<std::size_t>(to)].push_back(msg);
  ++message_count_;
}

void RoundMailbox::post_compressor(const ZoneToCompressorMsg& msg) {
  if (!links_->compressor_links() || msg.sender < 0 || msg.sender >= links_->n_zones()) {
    throw StructuralError("mailbox: message on non-existent compressor link");
  }
  to_compressor_.push_back(msg);
  ++message_count_;
}

void RoundMailbox::post_broadcast(AgentId to, const CompressorBroadcast& msg) {
  if (!links_->compressor_links() || to < 0 || to >= links_->n_zones()) {
    throw StructuralError("mailbox: broadcast on non-existent link");
  }
  if (broadcast_seen_[static_cast<std::size_t>(to)]) {
    throw StructuralError("mailbox: duplicate broadcast delivery");
  }
  broadcast_seen_[static_cast<std::size_t>(to)] = 1;
  broadcast_ = msg;
  ++message_count_;
}

void RoundMailbox::finalize() {
  const auto by_sender = [](const auto& a, const auto& b) { return a.sender < b.sender; };
  for (auto& box : neighbor_) {
    std::sort(box.begin(), box.end(), by_sender);
    for (std::size_t k = 1; k < box.size(); ++k) {
      if (box[k].sender == box[k - 1].sender) {
        throw StructuralError("mailbox: duplicate message on a directed link");
      }
    }
  }
  std::sort(to_compressor_.begin(), to_compressor_.end(), by_sender);
  for (std::size_t k = 1; k < to_compressor_.size(); ++k) {
    if (to_compressor_[k].sender == to_compressor_[k - 1].sender) {
      throw StructuralError("mailbox: duplicate zone->compressor message");
    }
  }
  finalized_ = true;
}

std::span<const NeighborMsg> RoundMailbox::neighbor_inbox(AgentId zone) const {
  return neighbor_[static_cast<std::size_t>(zone)];
}

std::span<const ZoneToCompressorMsg> RoundMailbox::compressor_inbox() const {
  return to_compressor_;
}

const CompressorBroadcast& RoundMailbox::broadcast_for(AgentId zone) const {
  if (!broadcast_seen_[static_cast<std::size_t>(zone)]) {
    throw StructuralError("mailbox: no broadcast delivered to zone " + std::to_string(zone));
  }
  return broadcast_;
}

bool RoundMailbox::has_broadcast(AgentId zone) const {
  return broadcast_seen_[static_cast<std::size_t>(zone)] != 0;
}

// ---------------------------------------------------------------------------
// RoundLog

std::string RoundLog::serialize() const {
  std::string out;
  char line[160];
  for (const RoundLogEntry& e : entries) {
    std::snprintf(line, sizeof line, "%ld,%d,%d,%c,%.17g,%.17g\n", e.round, e.from, e.to,
                  e.kind, e.a, e.b);
    out += line;
  }
  return out;
}

RoundLog RoundLog::parse(const std::string& text) {
  RoundLog log;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    RoundLogEntry e;
    char kind = 0;
    if (std::sscanf(line.c_str(), "%ld,%d,%d,%c,%lg,%lg", &e.round, &e.from, &e.to, &kind,
                    &e.a, &e.b) != 6) {
      throw StructuralError("round log: malformed line: " + line);
    }
    e.kind = kind;
    log.entries.push_back(e);
  }
  return log;
}

// ---------------------------------------------------------------------------
// AgentNetwork

namespace {

/// Stage bookkeeping of one agent's state block: base state, current stage
/// input (multipliers clamped), four slopes, RK4 combination.
struct AgentCore {
  std::vector<double> x;      // committed state
  std::vector<double> base;   // state at the step start
  std::vector<double> stage;  // current stage input (clamped)
  std::array<std::vector<double>, 4> k;
  std::vector<int> dual_slots;

  void init(int size, std::vector<int> duals) {
    x.assign(static_cast<std::size_t>(size), 0.0);
    dual_slots = std::move(duals);
    base = x;
    stage = x;
    for (auto& v : k) v.assign(static_cast<std::size_t>(size), 0.0);
  }

  void clamp(std::vector<double>& v) const {
    for (int s : dual_slots) {
      if (v[static_cast<std::size_t>(s)] < 0.0) v[static_cast<std::size_t>(s)] = 0.0;
    }
  }

  void begin_step() {
    base = x;
    stage = base;
    clamp(stage);
  }

  void form_stage(int r, double scaled_dt) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      stage[i] = rk4_stage(base[i], k[static_cast<std::size_t>(r - 1)][i], scaled_dt);
    }
    clamp(stage);
  }

  void commit(double dt) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = rk4_combine(base[i], k[0][i], k[1][i], k[2][i], k[3][i], dt);
    }
    clamp(x);
  }
};

}  // namespace

struct AgentNetwork::Impl {
  const Scenario* sc = nullptr;
  AgentNetOptions opts;
  LinkSet link_set;
  std::optional<FlowController> flow_ctrl;
  std::optional<SupplyController> supply_ctrl;

  std::vector<AgentCore> zones;
  AgentCore plant;
  AgentCore compressor;  // scenario II only
  bool has_compressor = false;

  long rounds = 0;
  int step_index = 0;
  int stage = 0;  // 0..3 within the current step
  int last_msg_count = 0;
  std::deque<RoundMailbox> history;

  VectorXd assembled;
  bool assembled_dirty = true;

  int n() const { return sc->graph.size(); }
  int block() const { return sc->zone_block_size(); }

  ZoneCtrl1State stage1(int i) const {
    VectorXd v = Eigen::Map<const VectorXd>(zones[static_cast<std::size_t>(i)].stage.data(),
                                            block());
    return detail::load1(v, 0);
  }
  ZoneCtrl2State stage2(int i) const {
    VectorXd v = Eigen::Map<const VectorXd>(zones[static_cast<std::size_t>(i)].stage.data(),
                                            block());
    return detail::load2(v, 0);
  }

  void assemble() {
    VectorXd& x = assembled;
    for (std::size_t i = 0; i < plant.x.size(); ++i) x[static_cast<int>(i)] = plant.x[i];
    const int ps = sc->plant_block_size();
    for (int z = 0; z < n(); ++z) {
      for (int j = 0; j < block(); ++j) {
        x[ps + z * block() + j] = zones[static_cast<std::size_t>(z)].x[static_cast<std::size_t>(j)];
      }
    }
    if (has_compressor) {
      const int c = detail::compressor_offset(*sc);
      x[c] = compressor.x[0];
      x[c + 1] = compressor.x[1];
      x[c + 2] = compressor.x[2];
    }
    assembled_dirty = false;
  }
};

AgentNetwork::AgentNetwork(const Scenario& scenario, AgentNetOptions options)
    : impl_(new Impl) {
  scenario.validate();
  Impl& im = *impl_;
  im.sc = &scenario;
  im.opts = std::move(options);
  im.link_set = LinkSet::build(scenario.graph, scenario.kind, scenario.drop_zone_links);
  if (im.opts.delay_rounds < 0) throw StructuralError("agents: delay must be >= 0");
  const int n = scenario.graph.size();
  if (im.opts.zone_order.empty()) {
    im.opts.zone_order.resize(static_cast<std::size_t>(n));
    std::iota(im.opts.zone_order.begin(), im.opts.zone_order.end(), 0);
  } else {
    std::vector<int> sorted = im.opts.zone_order;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < n; ++i) {
      if (sorted[static_cast<std::size_t>(i)] != i) {
        throw StructuralError("agents: zone_order must be a permutation of the zones");
      }
    }
  }

  if (scenario.kind == ScenarioKind::flow_only) {
    im.flow_ctrl.emplace(scenario.graph, scenario.ghp, scenario.gains,
                         scenario.extra_dynamics, scenario.drop_zone_links);
  } else {
    im.supply_ctrl.emplace(scenario.graph, scenario.ghp, scenario.gains,
                           scenario.extra_dynamics, scenario.drop_zone_links);
    im.has_compressor = true;
  }

  // split the monolithic initial state into per-agent blocks
  const VectorXd x0 = detail::default_initial_state(scenario);
  const int ps = scenario.plant_block_size();
  im.plant.init(ps, {});
  for (int j = 0; j < ps; ++j) im.plant.x[static_cast<std::size_t>(j)] = x0[j];
  im.zones.resize(static_cast<std::size_t>(n));
  const int B = scenario.zone_block_size();
  const std::vector<int> duals = scenario.kind == ScenarioKind::flow_only
                                     ? std::vector<int>{7, 8}
                                     : std::vector<int>{6, 7};
  for (int z = 0; z < n; ++z) {
    AgentCore& a = im.zones[static_cast<std::size_t>(z)];
    a.init(B, duals);
    for (int j = 0; j < B; ++j) {
      a.x[static_cast<std::size_t>(j)] = x0[ps + z * B + j];
    }
  }
  if (im.has_compressor) {
    im.compressor.init(CompressorState::kCount, {1, 2});
    const int c = detail::compressor_offset(scenario);
    im.compressor.x = {x0[c], x0[c + 1], x0[c + 2]};
  }
  im.assembled.resize(scenario.joint_size());
  im.assemble();
}

AgentNetwork::~AgentNetwork() { delete impl_; }

void AgentNetwork::execute_round() {
  Impl& im = *impl_;
  const Scenario& sc = *im.sc;
  const int n = im.n();
  const double dt = sc.dt;
  const double half = 0.5 * dt;
  const int r = im.stage;
  const double t_step = im.step_index * dt;
  const double tq = r == 0 ? t_step : (r == 3 ? t_step + dt : t_step + half);

  if (r == 0) {
    im.plant.begin_step();
    for (AgentCore& a : im.zones) a.begin_step();
    if (im.has_compressor) im.compressor.begin_step();
  }

  // --- gather: every agent emits its stage messages ---
  RoundMailbox mail(&im.link_set);
  const PlantState ps = unpack_state(
      sc.graph, Eigen::Map<const VectorXd>(im.plant.stage.data(),
                                           static_cast<int>(im.plant.stage.size())));
  const double T_supply = im.has_compressor ? im.compressor.stage[0]
                                            : sc.T_supply_profile(tq);
  for (int z : im.opts.zone_order) {
    if (!sc.drop_zone_links) {
      if (sc.kind == ScenarioKind::flow_only) {
        const NeighborMsg out = im.flow_ctrl->neighbor_signal(z, im.stage1(z), ps.T_zone[z]);
        for (const auto& [j, R] : sc.graph.neighbors(z)) mail.post_neighbor(j, out);
      } else {
        const NeighborMsg out =
            im.supply_ctrl->neighbor_signal(z, im.stage2(z), ps.T_zone[z]);
        for (const auto& [j, R] : sc.graph.neighbors(z)) mail.post_neighbor(j, out);
      }
    }
    if (im.has_compressor) {
      mail.post_compressor(im.supply_ctrl->compressor_signal(z, im.stage2(z)));
    }
  }
  if (im.has_compressor) {
    const CompressorBroadcast bc{im.compressor.stage[0]};
    for (int z = 0; z < n; ++z) mail.post_broadcast(z, bc);
  }
  mail.finalize();
  im.last_msg_count = mail.message_count();

  if (im.opts.log) {
    for (int z = 0; z < n; ++z) {
      for (const NeighborMsg& msg : mail.neighbor_inbox(z)) {
        im.opts.log->entries.push_back({im.rounds, msg.sender, z, 'n', msg.zeta,
                                        msg.T_minus_Z});
      }
      im.opts.log->entries.push_back({im.rounds, kPlantId, z, 'm', ps.T_zone[z],
                                      ps.T_floor[z]});
      if (im.has_compressor && mail.has_broadcast(z)) {
        im.opts.log->entries.push_back({im.rounds, kCompressorId, z, 'b',
                                        mail.broadcast_for(z).T_supply, 0.0});
      }
    }
    for (const ZoneToCompressorMsg& msg : mail.compressor_inbox()) {
      im.opts.log->entries.push_back({im.rounds, msg.sender, kCompressorId, 'c', msg.u,
                                      msg.mu_bound});
    }
  }

  // --- deliver (optionally delayed) ---
  im.history.push_back(std::move(mail));
  if (static_cast<int>(im.history.size()) > im.opts.delay_rounds + 1) {
    im.history.pop_front();
  }
  const RoundMailbox& inbox = im.history.front();

  // --- compute: every agent forms its stage slope from its own state,
  //     its own measurements and its inbox ---
  const double s_now = sc.s_schedule(tq);
  const double bc_supply = im.has_compressor
                               ? (inbox.has_broadcast(0) ? inbox.broadcast_for(0).T_supply
                                                         : T_supply)
                               : T_supply;
  for (int z : im.opts.zone_order) {
    AgentCore& a = im.zones[static_cast<std::size_t>(z)];
    const Measurement meas{ps.T_zone[z], ps.T_floor[z]};
    if (sc.kind == ScenarioKind::flow_only) {
      const ZoneCtrl1State d = im.flow_ctrl->zone_rhs(
          z, im.stage1(z), meas, inbox.neighbor_inbox(z), T_supply, sc.T_set_at(z, tq),
          s_now);
      VectorXd dv(ZoneCtrl1State::kCount);
      detail::store1(dv, 0, d);
      for (int j = 0; j < ZoneCtrl1State::kCount; ++j) {
        a.k[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] = dv[j];
      }
    } else {
      const ZoneCtrl2State d = im.supply_ctrl->zone_rhs(
          z, im.stage2(z), meas, inbox.neighbor_inbox(z), CompressorBroadcast{bc_supply},
          sc.T_set_at(z, tq), s_now);
      VectorXd dv(ZoneCtrl2State::kCount);
      detail::store2(dv, 0, d);
      for (int j = 0; j < ZoneCtrl2State::kCount; ++j) {
        a.k[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] = dv[j];
      }
    }
  }
  if (im.has_compressor) {
    const CompressorState cs{im.compressor.stage[0], im.compressor.stage[1],
                             im.compressor.stage[2]};
    const CompressorState d =
        im.supply_ctrl->compressor_rhs(cs, inbox.compressor_inbox(), s_now);
    im.compressor.k[static_cast<std::size_t>(r)] = {d.T_supply, d.nu_up, d.nu_lo};
  }
  {
    // the plant integrates under the flows the zone agents command; each zone
    // derives its valve command from the supply temperature it received
    VectorXd q(n);
    for (int z = 0; z < n; ++z) {
      const double u = im.zones[static_cast<std::size_t>(z)].stage[1];
      const double Zf = sc.kind == ScenarioKind::flow_only
                            ? im.zones[static_cast<std::size_t>(z)].stage[3]
                            : im.zones[static_cast<std::size_t>(z)].stage[2];
      const double raw = recover_flow(u, bc_supply, Zf, sc.ghp.c_w, sc.ghp.mode);
      q[z] = std::clamp(raw, 0.0, sc.graph.zones[static_cast<std::size_t>(z)].q_max);
    }
    PlantInputs inputs;
    inputs.q = q;
    inputs.T_supply = T_supply;
    const PlantState pd = plant_rhs(ps, inputs, sc.disturbances.T_out(tq),
                                    sc.disturbances.Q_at(tq), sc.graph, sc.ghp);
    const VectorXd pdv = pack_state(pd);
    for (int j = 0; j < pdv.size(); ++j) {
      im.plant.k[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] = pdv[j];
    }
  }

  // --- advance the stage / commit the step ---
  if (r < 3) {
    const double scaled = r == 2 ? dt : half;
    im.plant.form_stage(r + 1, scaled);
    for (AgentCore& a : im.zones) a.form_stage(r + 1, scaled);
    if (im.has_compressor) im.compressor.form_stage(r + 1, scaled);
    im.stage = r + 1;
  } else {
    im.plant.commit(dt);
    for (AgentCore& a : im.zones) a.commit(dt);
    if (im.has_compressor) im.compressor.commit(dt);
    im.stage = 0;
    ++im.step_index;
    im.assembled_dirty = true;
  }
  ++im.rounds;
}

long AgentNetwork::rounds_executed() const { return impl_->rounds; }
int AgentNetwork::last_round_message_count() const { return impl_->last_msg_count; }
const LinkSet& AgentNetwork::links() const { return impl_->link_set; }

const VectorXd& AgentNetwork::joint_state() const {
  if (impl_->assembled_dirty) const_cast<Impl*>(impl_)->assemble();
  return impl_->assembled;
}

namespace {

struct AgentStepper {
  AgentNetwork* net;
  const VectorXd& state() const { return net->joint_state(); }
  void advance(double t, double dt) {
    (void)t;
    (void)dt;
    for (int r = 0; r < 4; ++r) net->execute_round();
  }
};

}  // namespace

SimulationTrace AgentNetwork::run() {
  AgentStepper stepper{this};
  return detail::drive_run(*impl_->sc, stepper);
}

SimulationTrace run_closed_loop_agents(const Scenario& scenario, AgentNetOptions options) {
  AgentNetwork net(scenario, std::move(options));
  return net.run();
}

ZoneCtrl1State replay_zone_flow(const Scenario& scenario, const RoundLog& log, int zone) {
  if (scenario.kind != ScenarioKind::flow_only) {
    throw StructuralError("replay_zone_flow: scenario-I logs only");
  }
  const FlowController ctrl(scenario.graph, scenario.ghp, scenario.gains,
                            scenario.extra_dynamics, scenario.drop_zone_links);
  AgentCore core;
  core.init(ZoneCtrl1State::kCount, {7, 8});
  bool initialized = false;

  long round = -1;
  std::vector<NeighborMsg> inbox;
  Measurement meas{};
  bool have_meas = false;
  const double dt = scenario.dt;
  const double half = 0.5 * dt;

  const auto flush_round = [&](long r) {
    if (r < 0 || !have_meas) return;
    const int stage = static_cast<int>(r % 4);
    const long step = r / 4;
    const double t_step = static_cast<double>(step) * dt;
    const double tq = stage == 0 ? t_step : (stage == 3 ? t_step + dt : t_step + half);
    if (!initialized) {
      const ZoneCtrl1State s0 = ctrl.initial_state(zone, meas);
      VectorXd v(ZoneCtrl1State::kCount);
      detail::store1(v, 0, s0);
      for (int j = 0; j < ZoneCtrl1State::kCount; ++j) {
        core.x[static_cast<std::size_t>(j)] = v[j];
      }
      initialized = true;
    }
    if (stage == 0) core.begin_step();
    std::sort(inbox.begin(), inbox.end(),
              [](const NeighborMsg& a, const NeighborMsg& b) { return a.sender < b.sender; });
    VectorXd sv = Eigen::Map<const VectorXd>(core.stage.data(), ZoneCtrl1State::kCount);
    const ZoneCtrl1State d =
        ctrl.zone_rhs(zone, detail::load1(sv, 0), meas, inbox,
                      scenario.T_supply_profile(tq), scenario.T_set_at(zone, tq),
                      scenario.s_schedule(tq));
    VectorXd dv(ZoneCtrl1State::kCount);
    detail::store1(dv, 0, d);
    for (int j = 0; j < ZoneCtrl1State::kCount; ++j) {
      core.k[static_cast<std::size_t>(stage)][static_cast<std::size_t>(j)] = dv[j];
    }
    if (stage < 3) {
      core.form_stage(stage + 1, stage == 2 ? dt : half);
    } else {
      core.commit(dt);
    }
    inbox.clear();
    have_meas = false;
  };

  for (const RoundLogEntry& e : log.entries) {
    if (e.to != zone) continue;
    if (e.round != round) {
      flush_round(round);
      round = e.round;
    }
    if (e.kind == 'n') {
      inbox.push_back({e.from, e.a, e.b});
    } else if (e.kind == 'm') {
      meas = {e.a, e.b};
      have_meas = true;
    }
  }
  flush_round(round);
  VectorXd v = Eigen::Map<const VectorXd>(core.x.data(), ZoneCtrl1State::kCount);
  return detail::load1(v, 0);
}

}  // namespace ghpctrl
