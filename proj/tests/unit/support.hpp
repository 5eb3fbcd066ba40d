#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "manet/engine.hpp"
#include "manet/mobility.hpp"
#include "manet/routing.hpp"
#include "manet/simulation.hpp"
#include "manet/trace.hpp"
#include "manet/traffic.hpp"

namespace manet::support {

/// Nodes on a horizontal line `spacing` metres apart.
inline std::vector<Position> chain(int n, double spacing = 200.0) {
  std::vector<Position> out;
  for (int i = 0; i < n; ++i) out.push_back({10.0 + spacing * i, 10.0});
  return out;
}

/// rows x cols grid, row-major ids.
inline std::vector<Position> grid(int rows, int cols, double spacing = 200.0) {
  std::vector<Position> out;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out.push_back({10.0 + spacing * c, 10.0 + spacing * r});
  }
  return out;
}

inline Area area_for(const std::vector<Position>& pos) {
  Area a{1.0, 1.0};
  for (const auto& p : pos) {
    a.width = std::max(a.width, p.x + 10.0);
    a.height = std::max(a.height, p.y + 10.0);
  }
  return a;
}

/// Hop distances on the unit-disk graph; -1 when unreachable.
inline std::vector<std::vector<int>> bfs_all(const std::vector<Position>& pos, double range = 250.0) {
  const int n = static_cast<int>(pos.size());
  std::vector<std::vector<int>> d(n, std::vector<int>(n, -1));
  for (int s = 0; s < n; ++s) {
    std::deque<int> q{s};
    d[s][s] = 0;
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (int v = 0; v < n; ++v) {
        if (d[s][v] < 0 && distance(pos[u], pos[v]) <= range) {
          d[s][v] = d[s][u] + 1;
          q.push_back(v);
        }
      }
    }
  }
  return d;
}

inline Connection flow(NodeId src, NodeId dst, double start_s, double rate = 4.0) {
  Connection c;
  c.src = src;
  c.dst = dst;
  c.start = SimTime::from_seconds(start_s);
  c.rate_pps = rate;
  return c;
}

inline SimulationSetup static_setup(Protocol p, const std::vector<Position>& pos, std::vector<Connection> flows,
                                    double duration_s, std::uint64_t seed = 1) {
  SimulationSetup s;
  s.protocol = p;
  s.mobility = static_plan(area_for(pos), duration_s, pos);
  s.traffic.connections = std::move(flows);
  s.seed = seed;
  s.duration_s = duration_s;
  return s;
}

inline std::size_t count(const std::vector<TraceRecord>& recs, const std::function<bool(const TraceRecord&)>& pred) {
  std::size_t n = 0;
  for (const auto& r : recs) n += pred(r) ? 1 : 0;
  return n;
}

inline bool is_overhead(const TraceRecord& r) {
  return r.layer == Layer::Router && is_routing(r.ptype) &&
         (r.event == TraceEvent::Send || r.event == TraceEvent::Forward);
}

/// Minimal context for driving one agent by hand: transmissions are
/// recorded instead of sent, timers run on a private engine.
class FakeContext final : public RoutingContext {
 public:
  struct Sent {
    Packet pkt;
    NodeId next_hop;
  };

  FakeContext(NodeId self, int nodes, std::uint64_t seed = 7) : self_(self), nodes_(nodes), rng_(seed, StreamLabel::Protocol) {}

  NodeId self() const override { return self_; }
  int node_count() const override { return nodes_; }
  SimTime now() const override { return engine.now(); }
  RandomStream& rng() override { return rng_; }
  PacketUid next_uid() override { return uid_++; }
  void transmit(Packet pkt, NodeId next_hop) override { sent.push_back({std::move(pkt), next_hop}); }
  void transmit_after(SimTime delay, Packet pkt, NodeId next_hop) override {
    engine.schedule_in(delay, self_, EventKind::Timer,
                       [this, p = std::move(pkt), next_hop]() mutable { transmit(std::move(p), next_hop); });
  }
  void deliver(const Packet& pkt) override { delivered.push_back(pkt); }
  void drop(const Packet& pkt, DropReason reason) override { dropped.emplace_back(pkt, reason); }
  EventId schedule(SimTime delay, std::function<void()> fn) override {
    return engine.schedule_in(delay, self_, EventKind::Timer, std::move(fn));
  }
  void cancel(EventId id) override { engine.cancel(id); }
  std::vector<Packet> take_queued_for(NodeId) override { return {}; }

  Engine engine;
  std::vector<Sent> sent;
  std::vector<Packet> delivered;
  std::vector<std::pair<Packet, DropReason>> dropped;

 private:
  NodeId self_;
  int nodes_;
  RandomStream rng_;
  PacketUid uid_ = 1000;
};

inline Packet data_packet(NodeId src, NodeId dst, PacketUid uid = 1) {
  Packet p;
  p.uid = uid;
  p.type = PacketType::Cbr;
  p.src = src;
  p.dst = dst;
  p.size = kDataPayloadBytes;
  p.ttl = kDataTtl;
  return p;
}

}  // namespace manet::support
