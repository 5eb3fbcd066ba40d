#pragma once

#include <optional>
#include <set>
#include <unordered_set>
#include <vector>

#include "manet/routing.hpp"

namespace manet {

struct AodvParams {
  SimTime hello_interval = seconds(1);
  int allowed_hello_loss = 2;
  SimTime active_route_timeout = seconds(10);
  SimTime node_traversal_time = milliseconds(40);
  int ttl_start = 1;
  int ttl_increment = 2;
  int ttl_threshold = 7;
  int net_diameter = 35;
  int rreq_retries = 2;
  bool hellos = true;
  bool link_layer_detection = true;
  SimTime neighbor_check_interval = milliseconds(100);
  SimTime broadcast_jitter = milliseconds(10);
  SendBufferParams buffer;
};

/// TTLs of successive discovery attempts: the expanding ring, then the
/// network diameter once plus once per retry.
std::vector<int> aodv_ttl_schedule(const AodvParams& p);
/// How long an attempt with `ttl` waits for a reply.
SimTime aodv_attempt_wait(const AodvParams& p, int ttl);

struct AodvRoute {
  NodeId dest = 0;
  NodeId next_hop = 0;
  std::uint32_t hops = 0;
  std::uint32_t dest_seq = 0;
  bool seq_known = false;
  SimTime lifetime;
  bool valid = false;
  /// Installed only by hello messages, never used for anything else.
  bool hello_only = false;
  std::set<NodeId> precursors;
};

class AodvAgent final : public RoutingAgent {
 public:
  AodvAgent(RoutingContext& ctx, const AodvParams& params);

  void start() override;
  DispatchOutcome on_data_from_app(Packet pkt) override;
  void on_packet_from_net(Packet pkt, NodeId from) override;
  void on_link_break(NodeId next_hop, Packet pkt) override;
  std::size_t buffered_data() const override { return buffer_.size(); }
  std::optional<RouteSnapshot> snapshot(NodeId dest) const override;

  /// Valid, unexpired route or nullptr.
  const AodvRoute* valid_route(NodeId dest) const;
  const std::optional<AodvRoute>& route(NodeId dest) const { return routes_[static_cast<std::size_t>(dest)]; }
  std::uint32_t own_seq() const { return own_seq_; }
  bool discovering(NodeId dest) const { return discoveries_[static_cast<std::size_t>(dest)].has_value(); }

 private:
  struct Discovery {
    std::size_t attempt = 0;
    EventId timer = 0;
  };

  bool is_valid(const AodvRoute& r) const { return r.valid && r.lifetime > ctx_.now(); }
  AodvRoute* live(NodeId dest);
  /// Installs fresher route information; returns true if the table changed.
  bool update_route(NodeId dest, NodeId next_hop, std::uint32_t hops, std::uint32_t seq, bool seq_known,
                    SimTime lifetime);
  void touch_neighbor(NodeId from, std::optional<std::uint32_t> seq, SimTime lifetime, bool hello);
  void refresh(NodeId dest);
  void route_available(NodeId dest);

  void start_discovery(NodeId dest);
  void send_rreq(NodeId dest);
  void attempt_timeout(NodeId dest);

  void handle_rreq(const Packet& pkt, NodeId from);
  void handle_rrep(const Packet& pkt, NodeId from);
  void handle_rerr(const Packet& pkt, NodeId from);
  void handle_hello(const Packet& pkt, NodeId from);
  void forward_data(Packet pkt, NodeId from);

  void send_rrep(NodeId to_originator, AodvRrep rrep);
  void link_broken(NodeId neighbor);
  void broadcast_rerr(std::vector<std::pair<NodeId, std::uint32_t>> unreachable);
  void hello_tick();
  void neighbor_check();
  Packet control(PacketType type, RoutingMessage msg, NodeId dst, int ttl);

  AodvParams params_;
  std::vector<int> ttl_schedule_;
  std::vector<std::optional<AodvRoute>> routes_;
  std::vector<std::optional<Discovery>> discoveries_;
  std::vector<std::optional<SimTime>> last_heard_;
  std::unordered_set<std::uint64_t> seen_rreqs_;
  SendBuffer buffer_;
  std::uint32_t own_seq_ = 0;
  std::uint32_t rreq_id_ = 0;
};

}  // namespace manet
