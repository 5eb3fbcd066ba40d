#include "manet/medium.hpp"

#include <algorithm>
#include <cmath>

namespace manet {

namespace {
constexpr double kSpeedOfLight = 299792458.0;
}

Medium::Medium(Engine& engine, const MobilityPlan& plan, const RadioConfig& radio, std::uint64_t seed,
               TraceSink& trace, MacListener& listener)
    : engine_(engine),
      plan_(plan),
      radio_(radio),
      rng_(seed, StreamLabel::MacJitter),
      trace_(trace),
      listener_(listener),
      macs_(static_cast<std::size_t>(plan.node_count())) {
  idle_at_.assign(macs_.size(), SimTime{});
}

Medium::~Medium() = default;

const std::vector<Position>& Medium::positions_now() const {
  const SimTime now = engine_.now();
  if (cache_time_ != now) {
    cache_.resize(static_cast<std::size_t>(plan_.node_count()));
    for (NodeId n = 0; n < plan_.node_count(); ++n) cache_[static_cast<std::size_t>(n)] = position_at(plan_, n, now);
    cache_time_ = now;
  }
  return cache_;
}

Position Medium::pos(NodeId node, SimTime t) const {
  if (t == engine_.now()) return positions_now()[static_cast<std::size_t>(node)];
  return position_at(plan_, node, t);
}

std::vector<NodeId> Medium::neighbors(NodeId node, SimTime t) const {
  std::vector<NodeId> out;
  const Position me = pos(node, t);
  for (NodeId n = 0; n < plan_.node_count(); ++n) {
    if (n != node && distance(me, pos(n, t)) <= radio_.range_m) out.push_back(n);
  }
  return out;
}

bool Medium::in_range(NodeId a, NodeId b, SimTime t) const {
  return a != b && distance(pos(a, t), pos(b, t)) <= radio_.range_m;
}

SimTime Medium::transmission_time(std::uint32_t frame_bytes) const {
  return SimTime::from_seconds(static_cast<double>(frame_bytes) * 8.0 / radio_.data_rate_bps);
}

std::size_t Medium::occupancy(NodeId node) const {
  const MacState& mac = macs_[static_cast<std::size_t>(node)];
  return mac.queue.size() + (mac.current ? 1 : 0);
}

std::uint64_t Medium::data_packets_held() const {
  std::uint64_t n = data_on_air_;
  for (const MacState& mac : macs_) {
    if (mac.current && mac.current->payload.is_data()) ++n;
    for (const Frame& f : mac.queue) n += f.payload.is_data() ? 1 : 0;
  }
  return n;
}

void Medium::trace_mac_drop(NodeId node, const Packet& pkt, DropReason reason) {
  trace_.record(TraceRecord{TraceEvent::Drop, engine_.now(), node, Layer::Mac, pkt.uid, pkt.type, pkt.size, pkt.src,
                            pkt.dst, reason});
}

bool Medium::enqueue(Frame frame) {
  const NodeId node = frame.src_hop;
  MacState& mac = macs_[static_cast<std::size_t>(node)];
  if (occupancy(node) >= radio_.ifq_capacity) {
    ++stats_.ifq_drops;
    trace_mac_drop(node, frame.payload, DropReason::Ifq);
    return false;
  }
  frame.size = frame.payload.size + radio_.frame_overhead;
  if (is_routing(frame.payload.type)) {
    auto it = std::find_if(mac.queue.begin(), mac.queue.end(), [](const Frame& f) { return f.payload.is_data(); });
    mac.queue.insert(it, std::move(frame));
  } else {
    mac.queue.push_back(std::move(frame));
  }
  start_service(node);
  return true;
}

std::vector<Packet> Medium::take_queued_for(NodeId node, NodeId dst_hop) {
  MacState& mac = macs_[static_cast<std::size_t>(node)];
  std::vector<Packet> out;
  auto keep = std::stable_partition(mac.queue.begin(), mac.queue.end(),
                                    [&](const Frame& f) { return f.dst_hop != dst_hop; });
  for (auto it = keep; it != mac.queue.end(); ++it) out.push_back(std::move(it->payload));
  mac.queue.erase(keep, mac.queue.end());
  return out;
}

std::optional<SimTime> Medium::busy_until(NodeId node) const {
  const SimTime now = engine_.now();
  const Position me = positions_now()[static_cast<std::size_t>(node)];
  std::optional<SimTime> until;
  for (const Transmission& tx : airborne_) {
    if (tx.sender == node || tx.end <= now) continue;
    if (distance(me, tx.pos) <= radio_.range_m) {
      if (!until || tx.end > *until) until = tx.end;
    }
  }
  return until;
}

void Medium::start_service(NodeId node) {
  MacState& mac = macs_[static_cast<std::size_t>(node)];
  if (mac.current || mac.queue.empty()) return;
  if (engine_.now() < idle_at_[static_cast<std::size_t>(node)]) return;
  mac.current = std::move(mac.queue.front());
  mac.queue.pop_front();
  mac.retries = 0;
  schedule_access(node);
}

void Medium::schedule_access(NodeId node) {
  // The window's upper edge doubles with every retransmission (binary
  // exponential backoff), at most backoff_doublings times.
  const MacState& mac = macs_[static_cast<std::size_t>(node)];
  const int doublings = std::min(mac.retries, radio_.backoff_doublings);
  const std::int64_t lo = radio_.backoff_min.ns();
  const std::int64_t hi = lo + (radio_.backoff_max.ns() - lo) * (std::int64_t{1} << doublings);
  const SimTime backoff = nanoseconds(hi > lo ? lo + static_cast<std::int64_t>(rng_.below(static_cast<std::uint64_t>(hi - lo))) : lo);
  const SimTime start = busy_until(node).value_or(engine_.now());
  engine_.schedule(start + backoff, node, EventKind::MacAccess, [this, node] { on_access(node); });
}

void Medium::on_access(NodeId node) {
  if (busy_until(node)) {
    schedule_access(node);
    return;
  }
  begin_transmission(node);
}

void Medium::begin_transmission(NodeId node) {
  MacState& mac = macs_[static_cast<std::size_t>(node)];
  const Frame& frame = *mac.current;
  const SimTime now = engine_.now();
  const auto& where = positions_now();

  Transmission tx;
  tx.id = next_tx_id_++;
  tx.sender = node;
  tx.pos = where[static_cast<std::size_t>(node)];
  tx.start = now;
  tx.end = now + transmission_time(frame.size);
  if (frame.dst_hop == kBroadcast) {
    for (NodeId n = 0; n < plan_.node_count(); ++n) {
      if (n != node && distance(tx.pos, where[static_cast<std::size_t>(n)]) <= radio_.range_m) {
        tx.receivers.push_back(Reception{n});
      }
    }
  } else if (distance(tx.pos, where[static_cast<std::size_t>(frame.dst_hop)]) <= radio_.range_m) {
    tx.receivers.push_back(Reception{frame.dst_hop});
  }

  for (Transmission& other : airborne_) {
    if (other.end <= now) continue;
    for (Reception& r : tx.receivers) {
      if (r.node == other.sender ||
          distance(other.pos, where[static_cast<std::size_t>(r.node)]) <= radio_.range_m) {
        r.corrupted = true;
      }
    }
    for (Reception& r : other.receivers) {
      if (r.node == node || distance(tx.pos, where[static_cast<std::size_t>(r.node)]) <= radio_.range_m) {
        r.corrupted = true;
      }
    }
  }

  ++stats_.transmissions;
  const std::uint64_t id = tx.id;
  const SimTime end = tx.end;
  airborne_.push_back(std::move(tx));
  engine_.schedule(end, node, EventKind::MacTxEnd, [this, id] { end_transmission(id); });
}

void Medium::deliver(NodeId to, NodeId from, const Packet& pkt, double dist) {
  const SimTime prop = SimTime::from_seconds(dist / kSpeedOfLight);
  const bool data = pkt.is_data();
  if (data) ++data_on_air_;
  engine_.schedule(engine_.now() + prop, to, EventKind::PacketDelivery, [this, to, from, pkt, data]() mutable {
    if (data) --data_on_air_;
    listener_.on_mac_receive(to, std::move(pkt), from);
  });
}

void Medium::finish_frame(NodeId node, SimTime idle_after) {
  MacState& mac = macs_[static_cast<std::size_t>(node)];
  mac.current.reset();
  mac.retries = 0;
  if (idle_after > SimTime{}) {
    idle_at_[static_cast<std::size_t>(node)] = engine_.now() + idle_after;
    engine_.schedule_in(idle_after, node, EventKind::MacAccess, [this, node] { start_service(node); });
  } else {
    start_service(node);
  }
}

void Medium::end_transmission(std::uint64_t tx_id) {
  auto it = std::find_if(airborne_.begin(), airborne_.end(), [&](const Transmission& t) { return t.id == tx_id; });
  Transmission tx = std::move(*it);
  airborne_.erase(it);

  const NodeId node = tx.sender;
  MacState& mac = macs_[static_cast<std::size_t>(node)];
  const Frame& frame = *mac.current;
  const auto& where = positions_now();

  if (frame.dst_hop == kBroadcast) {
    for (const Reception& r : tx.receivers) {
      if (r.corrupted) {
        ++stats_.collisions;
        trace_mac_drop(r.node, frame.payload, DropReason::Collision);
      } else {
        deliver(r.node, node, frame.payload, distance(tx.pos, where[static_cast<std::size_t>(r.node)]));
      }
    }
    finish_frame(node, SimTime{});
    return;
  }

  if (!tx.receivers.empty() && !tx.receivers.front().corrupted) {
    deliver(frame.dst_hop, node, frame.payload, distance(tx.pos, where[static_cast<std::size_t>(frame.dst_hop)]));
    finish_frame(node, radio_.ack_time);
    return;
  }

  if (!tx.receivers.empty()) ++stats_.collisions;
  if (++mac.retries <= radio_.retry_limit) {
    ++stats_.unicast_retries;
    schedule_access(node);
    return;
  }
  ++stats_.link_breaks;
  const NodeId dst = frame.dst_hop;
  Packet pkt = std::move(mac.current->payload);
  mac.current.reset();
  mac.retries = 0;
  listener_.on_link_break(node, dst, std::move(pkt));
  start_service(node);
}

}  // namespace manet
