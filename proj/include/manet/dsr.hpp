#pragma once

#include <deque>
#include <optional>
#include <unordered_set>
#include <vector>

#include "manet/routing.hpp"

namespace manet {

struct DsrParams {
  std::size_t cache_capacity = 64;
  SimTime cache_expiry = seconds(300);
  SimTime rreq_backoff = milliseconds(500);
  SimTime rreq_backoff_max = seconds(10);
  int rreq_ttl = 32;
  SimTime broadcast_jitter = milliseconds(10);
  SendBufferParams buffer;
};

/// Source routes known to one node. Every route starts at the owner and
/// never repeats a node. Oldest routes are evicted first.
class RouteCache {
 public:
  struct Entry {
    std::vector<NodeId> route;
    SimTime installed;
  };

  RouteCache(NodeId owner, std::size_t capacity, SimTime expiry)
      : owner_(owner), capacity_(capacity), expiry_(expiry) {}

  /// Ignores routes that do not start at the owner, are too short, or loop.
  void add(const std::vector<NodeId>& route, SimTime now);
  /// Shortest unexpired route to `dst` (a prefix of some cached route).
  std::optional<std::vector<NodeId>> find(NodeId dst, SimTime now) const;
  /// Deletes every route that uses the directed link from -> to.
  void remove_link(NodeId from, NodeId to);

  const std::deque<Entry>& entries() const { return entries_; }

 private:
  NodeId owner_;
  std::size_t capacity_;
  SimTime expiry_;
  std::deque<Entry> entries_;
};

bool has_duplicates(const std::vector<NodeId>& path);

class DsrAgent final : public RoutingAgent {
 public:
  DsrAgent(RoutingContext& ctx, const DsrParams& params);

  DispatchOutcome on_data_from_app(Packet pkt) override;
  void on_packet_from_net(Packet pkt, NodeId from) override;
  void on_link_break(NodeId next_hop, Packet pkt) override;
  std::size_t buffered_data() const override { return buffer_.size(); }

  const RouteCache& cache() const { return cache_; }

 private:
  struct Discovery {
    SimTime backoff;
    EventId timer = 0;
  };

  void send_along(Packet pkt, std::vector<NodeId> route);
  void learn(const std::vector<NodeId>& path, std::size_t my_index);
  void flush(NodeId dst);
  void start_discovery(NodeId dst);
  void send_rreq(NodeId dst);
  void discovery_timeout(NodeId dst);
  void route_or_buffer(Packet pkt);

  void handle_rreq(const Packet& pkt);
  void handle_source_routed(Packet pkt);
  void reply(const std::vector<NodeId>& discovered, const std::vector<NodeId>& back_path);
  void report_break(const Packet& pkt, NodeId broken_to);

  DsrParams params_;
  RouteCache cache_;
  SendBuffer buffer_;
  std::vector<std::optional<Discovery>> discoveries_;
  std::unordered_set<std::uint64_t> seen_;
  std::uint32_t request_id_ = 0;
};

}  // namespace manet
