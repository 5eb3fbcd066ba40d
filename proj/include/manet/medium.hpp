#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <vector>

#include "manet/engine.hpp"
#include "manet/mobility.hpp"
#include "manet/packet.hpp"
#include "manet/random.hpp"
#include "manet/trace.hpp"

namespace manet {

/// Abstracted 802.11 radio: unit-disk range, fixed bit rate, CSMA with a
/// uniform backoff, unicast ACK/retry, no RTS/CTS and no capture.
struct RadioConfig {
  double range_m = 250.0;
  double data_rate_bps = 2e6;
  std::uint32_t frame_overhead = 58;
  std::size_t ifq_capacity = 50;
  int retry_limit = 7;
  SimTime backoff_min = microseconds(100);
  SimTime backoff_max = microseconds(2000);
  /// Retransmissions double the backoff window this many times at most.
  int backoff_doublings = 5;
  /// SIFS plus a 14-byte ACK at the data rate.
  SimTime ack_time = microseconds(66);
};

struct Frame {
  Packet payload;
  NodeId src_hop = 0;
  NodeId dst_hop = kBroadcast;
  std::uint32_t size = 0;
};

/// Upcalls from the MAC into the node above it.
class MacListener {
 public:
  virtual ~MacListener() = default;
  virtual void on_mac_receive(NodeId node, Packet pkt, NodeId from) = 0;
  /// A unicast exhausted its retries: the link to `dst_hop` is considered broken.
  virtual void on_link_break(NodeId node, NodeId dst_hop, Packet pkt) = 0;
};

struct MediumStats {
  std::uint64_t transmissions = 0;
  std::uint64_t unicast_retries = 0;
  std::uint64_t collisions = 0;
  std::uint64_t link_breaks = 0;
  std::uint64_t ifq_drops = 0;
};

/// Shared channel plus one MAC and interface queue per node.
///
/// A frame is decoded at a receiver only if no other transmission audible
/// at that receiver (or by the receiver itself) overlaps it in time.
/// Carrier sense is local to the sender, so hidden terminals collide.
class Medium {
 public:
  Medium(Engine& engine, const MobilityPlan& plan, const RadioConfig& radio, std::uint64_t seed, TraceSink& trace,
         MacListener& listener);
  Medium(const Medium&) = delete;
  Medium& operator=(const Medium&) = delete;
  ~Medium();

  const RadioConfig& radio() const { return radio_; }

  /// Nodes within range of `node` at `t`, excluding itself, ascending ids.
  std::vector<NodeId> neighbors(NodeId node, SimTime t) const;
  bool in_range(NodeId a, NodeId b, SimTime t) const;

  /// Puts a frame on `frame.src_hop`'s interface queue (routing frames ahead
  /// of data). Returns false and traces an IFQ drop when the queue is full.
  bool enqueue(Frame frame);
  /// Removes queued (not yet in service) unicast frames addressed to `dst_hop`.
  std::vector<Packet> take_queued_for(NodeId node, NodeId dst_hop);
  /// Frames held by the node's MAC, including the one in service.
  std::size_t occupancy(NodeId node) const;

  SimTime transmission_time(std::uint32_t frame_bytes) const;

  /// Data packets currently inside queues, in service, or on the air.
  std::uint64_t data_packets_held() const;
  const MediumStats& stats() const { return stats_; }

 private:
  struct Reception {
    NodeId node;
    bool corrupted = false;
  };
  struct Transmission {
    std::uint64_t id = 0;
    NodeId sender = 0;
    Position pos;
    SimTime start;
    SimTime end;
    std::vector<Reception> receivers;
  };
  struct MacState {
    std::deque<Frame> queue;
    std::optional<Frame> current;
    int retries = 0;
  };

  Position pos(NodeId node, SimTime t) const;
  const std::vector<Position>& positions_now() const;
  std::optional<SimTime> busy_until(NodeId node) const;
  void start_service(NodeId node);
  void schedule_access(NodeId node);
  void on_access(NodeId node);
  void begin_transmission(NodeId node);
  void end_transmission(std::uint64_t tx_id);
  void finish_frame(NodeId node, SimTime idle_after);
  void deliver(NodeId to, NodeId from, const Packet& pkt, double dist);
  void trace_mac_drop(NodeId node, const Packet& pkt, DropReason reason);

  Engine& engine_;
  const MobilityPlan& plan_;
  RadioConfig radio_;
  RandomStream rng_;
  TraceSink& trace_;
  MacListener& listener_;
  std::vector<MacState> macs_;
  std::vector<SimTime> idle_at_;
  std::vector<Transmission> airborne_;
  std::uint64_t next_tx_id_ = 0;
  std::uint64_t data_on_air_ = 0;
  MediumStats stats_;
  mutable SimTime cache_time_ = SimTime::max();
  mutable std::vector<Position> cache_;
};

}  // namespace manet
