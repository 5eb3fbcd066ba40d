#pragma once

#include <optional>
#include <unordered_set>
#include <vector>

#include "manet/routing.hpp"

namespace manet {

struct ZrpParams {
  int radius = 2;
  SimTime beacon_interval = seconds(1);
  /// Beacon period is drawn from interval +/- this spread.
  SimTime beacon_spread = milliseconds(50);
  SimTime neighbor_timeout = seconds(3);
  SimTime iarp_refresh = seconds(5);
  SimTime link_state_hold = seconds(15);
  SimTime query_backoff = seconds(1);
  SimTime query_backoff_max = seconds(8);
  int query_ttl = 32;
  SimTime broadcast_jitter = milliseconds(10);
  SendBufferParams buffer;
};

/// Removes cycles from a walk, keeping the first visit of each node.
std::vector<NodeId> remove_loops(const std::vector<NodeId>& walk);

class ZrpAgent final : public RoutingAgent {
 public:
  ZrpAgent(RoutingContext& ctx, const ZrpParams& params);

  void start() override;
  DispatchOutcome on_data_from_app(Packet pkt) override;
  void on_packet_from_net(Packet pkt, NodeId from) override;
  void on_link_break(NodeId next_hop, Packet pkt) override;
  std::size_t buffered_data() const override { return buffer_.size(); }

  /// Hop distance inside the zone, or -1 outside it.
  int zone_distance(NodeId v);
  /// Zone members including the node itself, ascending.
  std::vector<NodeId> zone();
  /// Nodes at exactly `radius` hops, ascending.
  std::vector<NodeId> peripheral();
  std::vector<NodeId> neighbors() const;
  const std::optional<std::vector<NodeId>>& inter_zone_route(NodeId dst) const {
    return routes_[static_cast<std::size_t>(dst)];
  }

 private:
  struct LinkState {
    std::uint32_t seq = 0;
    std::vector<NodeId> neighbors;
    SimTime received;
  };
  struct Query {
    SimTime backoff;
    EventId timer = 0;
  };

  void heard(NodeId from);
  void neighbors_changed();
  void beacon_tick();
  void iarp_tick();
  void send_iarp();
  void handle_iarp(const Packet& pkt);
  const std::vector<int>& distances();
  std::vector<NodeId> zone_path(NodeId v);
  std::optional<NodeId> zone_next_hop(NodeId v);

  void route_or_buffer(Packet pkt);
  void send_source_routed(Packet pkt, std::vector<NodeId> route);
  void flush(NodeId dst);
  void start_query(NodeId dst);
  void send_query(NodeId dst);
  void query_timeout(NodeId dst);
  void bordercast(ZrpQuery q, const Packet& base);
  void handle_query(const Packet& pkt, NodeId from);
  void handle_source_routed(Packet pkt);
  void report_break(const Packet& pkt, NodeId broken_to);
  void drop_routes_using(NodeId a, NodeId b);
  Packet control(PacketType type, RoutingMessage msg, NodeId dst, int ttl);

  ZrpParams params_;
  std::vector<std::optional<SimTime>> last_heard_;
  std::vector<NodeId> advertised_neighbors_;
  std::vector<std::optional<LinkState>> link_state_;
  std::vector<int> dist_;
  std::vector<NodeId> parent_;
  bool zone_dirty_ = true;
  std::uint32_t iarp_seq_ = 0;
  bool iarp_pending_ = false;

  std::vector<std::optional<std::vector<NodeId>>> routes_;
  std::vector<std::optional<Query>> queries_;
  std::unordered_set<std::uint64_t> seen_;
  std::uint32_t query_id_ = 0;
  SendBuffer buffer_;
};

}  // namespace manet
