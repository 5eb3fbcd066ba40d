#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "manet/engine.hpp"
#include "manet/packet.hpp"
#include "manet/random.hpp"
#include "manet/trace.hpp"

namespace manet {

/// Everything an agent may touch outside its own state. One per node.
class RoutingContext {
 public:
  virtual ~RoutingContext() = default;

  virtual NodeId self() const = 0;
  virtual int node_count() const = 0;
  virtual SimTime now() const = 0;
  virtual RandomStream& rng() = 0;
  virtual PacketUid next_uid() = 0;

  /// Hands `pkt` to the MAC toward `next_hop` (kBroadcast for a local
  /// broadcast). Records `s RTR` for routing packets originated here and
  /// `f RTR` for anything relayed; data leaving its source is already
  /// covered by the agent-level send.
  virtual void transmit(Packet pkt, NodeId next_hop) = 0;
  virtual void transmit_after(SimTime delay, Packet pkt, NodeId next_hop) = 0;
  /// Data reached its destination: records `r AGT`.
  virtual void deliver(const Packet& pkt) = 0;
  /// Records `d RTR <reason>`.
  virtual void drop(const Packet& pkt, DropReason reason) = 0;

  virtual EventId schedule(SimTime delay, std::function<void()> fn) = 0;
  virtual void cancel(EventId id) = 0;
  /// Pulls frames still waiting in this node's interface queue for `next_hop`.
  virtual std::vector<Packet> take_queued_for(NodeId next_hop) = 0;
};

enum class DispatchOutcome { Forwarded, Buffered, Dropped };

/// Route state an auditor can inspect at a forwarding step.
struct RouteSnapshot {
  std::uint32_t dest_seq = 0;
  std::uint32_t hops = 0;
};

class RoutingAgent {
 public:
  explicit RoutingAgent(RoutingContext& ctx) : ctx_(ctx) {}
  virtual ~RoutingAgent() = default;
  RoutingAgent(const RoutingAgent&) = delete;
  RoutingAgent& operator=(const RoutingAgent&) = delete;

  virtual void start() {}
  virtual DispatchOutcome on_data_from_app(Packet pkt) = 0;
  virtual void on_packet_from_net(Packet pkt, NodeId from) = 0;
  /// The MAC gave up on `pkt` toward `next_hop`.
  virtual void on_link_break(NodeId next_hop, Packet pkt) = 0;

  /// Data packets the agent is holding (send buffer and the like).
  virtual std::size_t buffered_data() const = 0;
  virtual std::optional<RouteSnapshot> snapshot(NodeId /*dest*/) const { return std::nullopt; }

 protected:
  NodeId self() const { return ctx_.self(); }
  /// Decrements a relayed data packet's hop budget; drops it (TTL) when spent.
  bool consume_ttl(Packet& pkt);
  /// Uniform delay in [0, max) from the protocol stream, for broadcasts.
  SimTime jitter(SimTime max);

  RoutingContext& ctx_;
};

struct SendBufferParams {
  std::size_t capacity = 64;
  SimTime timeout = seconds(30);
};

/// Data waiting for a route. FIFO; packets older than the timeout are
/// dropped TOUT, and overflow evicts the oldest packet (IFQ-SB).
class SendBuffer {
 public:
  SendBuffer(RoutingContext& ctx, const SendBufferParams& params) : ctx_(ctx), params_(params) {}
  ~SendBuffer();

  void push(Packet pkt);
  bool has(NodeId dst) const;
  /// Removes and returns the packets for `dst` in arrival order.
  std::vector<Packet> take(NodeId dst);
  void drop_all(NodeId dst, DropReason reason);
  /// Drops expired packets now. Also runs on its own timer.
  void expire();
  std::size_t size() const { return queue_.size(); }

 private:
  struct Entry {
    SimTime queued;
    Packet pkt;
  };
  void arm();

  RoutingContext& ctx_;
  SendBufferParams params_;
  std::deque<Entry> queue_;
  std::optional<EventId> timer_;
};

}  // namespace manet
