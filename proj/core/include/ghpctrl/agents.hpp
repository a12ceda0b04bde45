#pragma once

#include <deque>
#include <string>
#include <vector>

#include "ghpctrl/simulation.hpp"

namespace ghpctrl {

/// Agents are zones (ids 0..n-1) plus the compressor; the plant id tags
/// measurement entries in round logs.
using AgentId = int;
inline constexpr AgentId kCompressorId = -1;
inline constexpr AgentId kPlantId = -2;

/// Directed communication links implied by the building graph and the
/// controller variant: zone<->zone per edge (dropped in the decentralized /
/// reduced-communication variants), zone->compressor and compressor->zone in
/// scenario II.
class LinkSet {
 public:
  static LinkSet build(const BuildingGraph& graph, ScenarioKind kind,
                       bool drop_zone_links);

  bool allows_zone_pair(AgentId from, AgentId to) const;
  bool compressor_links() const { return compressor_links_; }
  int zone_link_count() const { return zone_link_count_; }
  int compressor_link_count() const { return compressor_links_ ? 2 * n_zones_ : 0; }
  int directed_count() const { return zone_link_count() + compressor_link_count(); }
  int n_zones() const { return n_zones_; }

 private:
  int n_zones_ = 0;
  bool compressor_links_ = false;
  int zone_link_count_ = 0;
  std::vector<std::vector<int>> allowed_;  // sorted target lists per zone
};

/// One synchronous round's deliveries: typed payloads per recipient. Posts
/// are validated against the link set; finalize() sorts each inbox by sender
/// and rejects duplicate use of a directed link.
class RoundMailbox {
 public:
  RoundMailbox() = default;
  explicit RoundMailbox(const LinkSet* links);

  void post_neighbor(AgentId to, const NeighborMsg& msg);
  void post_compressor(const ZoneToCompressorMsg& msg);
  void post_broadcast(AgentId to, const CompressorBroadcast& msg);
  void finalize();

  std::span<const NeighborMsg> neighbor_inbox(AgentId zone) const;
  std::span<const ZoneToCompressorMsg> compressor_inbox() const;
  const CompressorBroadcast& broadcast_for(AgentId zone) const;
  bool has_broadcast(AgentId zone) const;

  int message_count() const { return message_count_; }

 private:
  const LinkSet* links_ = nullptr;
  std::vector<std::vector<NeighborMsg>> neighbor_;
  std::vector<ZoneToCompressorMsg> to_compressor_;
  std::vector<char> broadcast_seen_;
  CompressorBroadcast broadcast_{};
  int message_count_ = 0;
  bool finalized_ = false;
};

/// Compact text log of every delivery (one line per message per round);
/// parse() round-trips serialize(). Measurement entries record the plant
/// values each zone sensed, which makes a zone's rounds replayable in
/// isolation.
struct RoundLogEntry {
  long round = 0;
  AgentId from = 0;
  AgentId to = 0;
  char kind = 'n';  ///< n: neighbor, c: zone->compressor, b: broadcast, m: measurement
  double a = 0.0;
  double b = 0.0;
};

struct RoundLog {
  std::vector<RoundLogEntry> entries;

  std::string serialize() const;
  static RoundLog parse(const std::string& text);
};

struct AgentNetOptions {
  RoundLog* log = nullptr;
  /// Rounds a delivery lags behind its production (0 = same round, the
  /// semantics every equivalence guarantee assumes). Positive values are a
  /// robustness experiment knob only.
  int delay_rounds = 0;
  /// Processing permutation of the zone agents; results are independent of
  /// it (snapshot semantics), which the tests assert bit-exactly.
  std::vector<int> zone_order;
};

/// Message-passing execution of the closed loop: one agent per zone (plus
/// the compressor in scenario II), typed mailboxes, and a synchronous round
/// barrier per RK4 stage (four rounds advance one time step). Each agent's
/// observable inputs are exactly its own parameters and state, its own
/// measurements, its inbox, and the broadcast supply temperature; with the
/// same scenario this reproduces run_closed_loop() bit-exactly.
class AgentNetwork {
 public:
  explicit AgentNetwork(const Scenario& scenario, AgentNetOptions options = {});
  ~AgentNetwork();
  AgentNetwork(const AgentNetwork&) = delete;
  AgentNetwork& operator=(const AgentNetwork&) = delete;

  /// Executes one communication round (gather stage messages, deliver, every
  /// agent computes its stage slope); the fourth round of a step also
  /// commits the RK4 combination.
  void execute_round();

  long rounds_executed() const;
  int last_round_message_count() const;
  const LinkSet& links() const;

  /// Joint state in the monolithic layout (plant, zone blocks, compressor).
  const VectorXd& joint_state() const;

  /// Runs the whole horizon and records the trace exactly as run_closed_loop.
  SimulationTrace run();

 private:
  struct Impl;
  Impl* impl_;
};

/// Convenience wrapper: agent-based execution of a scenario.
SimulationTrace run_closed_loop_agents(const Scenario& scenario,
                                       AgentNetOptions options = {});

/// Re-runs one zone controller of a scenario-I run purely from its logged
/// per-round inputs and returns its final state; demonstrates that the round
/// log captures everything the agent consumed.
ZoneCtrl1State replay_zone_flow(const Scenario& scenario, const RoundLog& log, int zone);

}  // namespace ghpctrl
