#include "manet/simulation.hpp"

#include <stdexcept>

namespace manet {

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::Dsdv:
      return "dsdv";
    case Protocol::Aodv:
      return "aodv";
    case Protocol::Dsr:
      return "dsr";
    case Protocol::Zrp:
      return "zrp";
  }
  return "?";
}

std::optional<Protocol> protocol_from(std::string_view name) {
  for (Protocol p : kAllProtocols) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

class Simulation::Node final : public RoutingContext {
 public:
  Node(Simulation& sim, NodeId id) : sim_(sim), id_(id) {}

  NodeId self() const override { return id_; }
  int node_count() const override { return sim_.setup_.mobility.node_count(); }
  SimTime now() const override { return sim_.engine_.now(); }
  RandomStream& rng() override { return sim_.protocol_rng_; }
  PacketUid next_uid() override { return sim_.next_uid_++; }

  void transmit(Packet pkt, NodeId next_hop) override { sim_.transmit(id_, std::move(pkt), next_hop); }

  void transmit_after(SimTime delay, Packet pkt, NodeId next_hop) override {
    if (delay.ns() <= 0) {
      transmit(std::move(pkt), next_hop);
      return;
    }
    const bool data = pkt.is_data();
    if (data) ++sim_.delayed_data_;
    sim_.engine_.schedule_in(delay, id_, EventKind::Timer, [this, pkt = std::move(pkt), next_hop, data]() mutable {
      if (data) --sim_.delayed_data_;
      transmit(std::move(pkt), next_hop);
    });
  }

  void deliver(const Packet& pkt) override {
    sim_.trace_.record(TraceRecord{TraceEvent::Receive, now(), id_, Layer::Agent, pkt.uid, pkt.type,
                                   kDataPayloadBytes, pkt.src, pkt.dst, std::nullopt});
  }

  void drop(const Packet& pkt, DropReason reason) override {
    sim_.trace_.record(
        TraceRecord{TraceEvent::Drop, now(), id_, Layer::Router, pkt.uid, pkt.type, pkt.size, pkt.src, pkt.dst, reason});
  }

  EventId schedule(SimTime delay, std::function<void()> fn) override {
    return sim_.engine_.schedule_in(delay, id_, EventKind::Timer, std::move(fn));
  }
  void cancel(EventId id) override { sim_.engine_.cancel(id); }

  std::vector<Packet> take_queued_for(NodeId next_hop) override {
    return sim_.medium_->take_queued_for(id_, next_hop);
  }

 private:
  Simulation& sim_;
  NodeId id_;
};

Simulation::Simulation(SimulationSetup setup, TraceSink& trace)
    : setup_(std::move(setup)), trace_(trace), protocol_rng_(setup_.seed, StreamLabel::Protocol) {
  const int n = setup_.mobility.node_count();
  for (const Connection& c : setup_.traffic.connections) {
    if (c.src < 0 || c.src >= n || c.dst < 0 || c.dst >= n) {
      throw std::invalid_argument("traffic plan references a node outside the mobility plan");
    }
  }
  medium_ = std::make_unique<Medium>(engine_, setup_.mobility, setup_.radio, setup_.seed, trace_, *this);
  for (NodeId i = 0; i < n; ++i) {
    nodes_.push_back(std::make_unique<Node>(*this, i));
    RoutingContext& ctx = *nodes_.back();
    switch (setup_.protocol) {
      case Protocol::Dsdv:
        agents_.push_back(std::make_unique<DsdvAgent>(ctx, setup_.params.dsdv));
        break;
      case Protocol::Aodv:
        agents_.push_back(std::make_unique<AodvAgent>(ctx, setup_.params.aodv));
        break;
      case Protocol::Dsr:
        agents_.push_back(std::make_unique<DsrAgent>(ctx, setup_.params.dsr));
        break;
      case Protocol::Zrp:
        agents_.push_back(std::make_unique<ZrpAgent>(ctx, setup_.params.zrp));
        break;
    }
  }
  emitters_.reserve(setup_.traffic.connections.size());
  for (const Connection& c : setup_.traffic.connections) emitters_.emplace_back(c);
}

Simulation::~Simulation() = default;

RunSummary Simulation::run() { return run_until(SimTime::from_seconds(setup_.duration_s)); }

RunSummary Simulation::run_until(SimTime t) {
  if (!started_) {
    started_ = true;
    for (auto& a : agents_) a->start();
    for (std::size_t i = 0; i < emitters_.size(); ++i) start_flow(i);
  }
  return engine_.run_until(t);
}

void Simulation::start_flow(std::size_t index) {
  const SimTime end = SimTime::from_seconds(setup_.duration_s);
  const SimTime at = emitters_[index].next_time();
  if (at >= end) return;
  engine_.schedule(at, setup_.traffic.connections[index].src, EventKind::TrafficTick, [this, index] { emit(index); });
}

void Simulation::emit(std::size_t index) {
  const Connection& c = setup_.traffic.connections[index];
  Packet pkt;
  pkt.uid = next_uid_++;
  pkt.type = PacketType::Cbr;
  pkt.src = c.src;
  pkt.dst = c.dst;
  pkt.flow_seq = emitters_[index].emit();
  pkt.size = c.payload;
  pkt.origin = engine_.now();
  pkt.ttl = kDataTtl;
  ++generated_;
  trace_.record(TraceRecord{TraceEvent::Send, pkt.origin, c.src, Layer::Agent, pkt.uid, pkt.type, pkt.size, pkt.src,
                            pkt.dst, std::nullopt});
  agents_[static_cast<std::size_t>(c.src)]->on_data_from_app(std::move(pkt));
  start_flow(index);
}

void Simulation::transmit(NodeId node, Packet pkt, NodeId next_hop) {
  const bool relayed = pkt.src != node;
  if (pkt.is_data()) {
    if (relayed) {
      trace_.record(TraceRecord{TraceEvent::Forward, engine_.now(), node, Layer::Router, pkt.uid, pkt.type, pkt.size,
                                pkt.src, pkt.dst, std::nullopt});
    }
    if (forward_observer_) {
      forward_observer_(ForwardStep{node, next_hop, pkt, agents_[static_cast<std::size_t>(node)]->snapshot(pkt.dst)});
    }
  } else {
    trace_.record(TraceRecord{relayed ? TraceEvent::Forward : TraceEvent::Send, engine_.now(), node, Layer::Router,
                              pkt.uid, pkt.type, pkt.size, pkt.src, pkt.dst, std::nullopt});
  }
  Frame frame;
  frame.payload = std::move(pkt);
  frame.src_hop = node;
  frame.dst_hop = next_hop;
  medium_->enqueue(std::move(frame));
}

void Simulation::on_mac_receive(NodeId node, Packet pkt, NodeId from) {
  agents_[static_cast<std::size_t>(node)]->on_packet_from_net(std::move(pkt), from);
}

void Simulation::on_link_break(NodeId node, NodeId dst_hop, Packet pkt) {
  agents_[static_cast<std::size_t>(node)]->on_link_break(dst_hop, std::move(pkt));
}

std::uint64_t Simulation::data_held() const {
  std::uint64_t n = medium_->data_packets_held() + delayed_data_;
  for (const auto& a : agents_) n += a->buffered_data();
  return n;
}

}  // namespace manet
