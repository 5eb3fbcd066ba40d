#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "manet/aodv.hpp"
#include "manet/dsdv.hpp"
#include "manet/dsr.hpp"
#include "manet/engine.hpp"
#include "manet/medium.hpp"
#include "manet/mobility.hpp"
#include "manet/routing.hpp"
#include "manet/trace.hpp"
#include "manet/traffic.hpp"
#include "manet/zrp.hpp"

namespace manet {

enum class Protocol { Dsdv, Aodv, Dsr, Zrp };

inline constexpr Protocol kAllProtocols[] = {Protocol::Dsdv, Protocol::Aodv, Protocol::Dsr, Protocol::Zrp};

std::string_view to_string(Protocol p);
/// Accepts the lowercase names used on the command line.
std::optional<Protocol> protocol_from(std::string_view name);

struct ProtocolParams {
  DsdvParams dsdv;
  AodvParams aodv;
  DsrParams dsr;
  ZrpParams zrp;
};

struct SimulationSetup {
  Protocol protocol = Protocol::Aodv;
  MobilityPlan mobility;
  TrafficPlan traffic;
  RadioConfig radio;
  ProtocolParams params;
  /// Seeds the MAC jitter and protocol streams.
  std::uint64_t seed = 0;
  double duration_s = 150.0;
};

/// One data packet leaving a node toward its next hop.
struct ForwardStep {
  NodeId node;
  NodeId next_hop;
  const Packet& packet;
  /// The forwarding node's route state for the destination, if the protocol exposes it.
  std::optional<RouteSnapshot> route;
};

/// One complete run: engine, channel, agents and CBR sources.
class Simulation final : public MacListener {
 public:
  Simulation(SimulationSetup setup, TraceSink& trace);
  ~Simulation() override;
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// Runs to the configured duration.
  RunSummary run();
  /// Runs to `t` (callable repeatedly with growing times).
  RunSummary run_until(SimTime t);

  const SimulationSetup& setup() const { return setup_; }
  Engine& engine() { return engine_; }
  Medium& medium() { return *medium_; }
  RoutingAgent& agent(NodeId n) { return *agents_[static_cast<std::size_t>(n)]; }
  template <class A>
  A& agent_as(NodeId n) {
    return dynamic_cast<A&>(agent(n));
  }

  /// Data packets still held anywhere in the network (buffers, queues, air).
  std::uint64_t data_held() const;
  std::uint64_t data_generated() const { return generated_; }

  void set_forward_observer(std::function<void(const ForwardStep&)> obs) { forward_observer_ = std::move(obs); }

  void on_mac_receive(NodeId node, Packet pkt, NodeId from) override;
  void on_link_break(NodeId node, NodeId dst_hop, Packet pkt) override;

 private:
  class Node;

  void start_flow(std::size_t index);
  void emit(std::size_t index);
  void transmit(NodeId node, Packet pkt, NodeId next_hop);

  SimulationSetup setup_;
  TraceSink& trace_;
  Engine engine_;
  RandomStream protocol_rng_;
  std::unique_ptr<Medium> medium_;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::vector<std::unique_ptr<RoutingAgent>> agents_;
  std::vector<FlowEmitter> emitters_;
  PacketUid next_uid_ = 0;
  std::uint64_t generated_ = 0;
  std::uint64_t delayed_data_ = 0;
  bool started_ = false;
  std::function<void(const ForwardStep&)> forward_observer_;
};

}  // namespace manet
