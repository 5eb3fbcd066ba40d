#include "manet/zrp.hpp"

#include <algorithm>
#include <deque>

namespace manet {

namespace {

void set_bit(std::vector<std::uint64_t>& bits, NodeId v) {
  bits[static_cast<std::size_t>(v) / 64] |= std::uint64_t{1} << (static_cast<unsigned>(v) % 64);
}

bool test_bit(const std::vector<std::uint64_t>& bits, NodeId v) {
  return (bits[static_cast<std::size_t>(v) / 64] >> (static_cast<unsigned>(v) % 64)) & 1u;
}

std::uint64_t query_key(NodeId originator, std::uint32_t id) {
  return (static_cast<std::uint64_t>(originator) << 32) | id;
}

}  // namespace

std::vector<NodeId> remove_loops(const std::vector<NodeId>& walk) {
  std::vector<NodeId> out;
  for (NodeId v : walk) {
    auto seen = std::find(out.begin(), out.end(), v);
    if (seen != out.end()) {
      out.erase(seen + 1, out.end());
    } else {
      out.push_back(v);
    }
  }
  return out;
}

ZrpAgent::ZrpAgent(RoutingContext& ctx, const ZrpParams& params)
    : RoutingAgent(ctx),
      params_(params),
      last_heard_(static_cast<std::size_t>(ctx.node_count())),
      link_state_(static_cast<std::size_t>(ctx.node_count())),
      routes_(static_cast<std::size_t>(ctx.node_count())),
      queries_(static_cast<std::size_t>(ctx.node_count())),
      buffer_(ctx, params.buffer) {}

void ZrpAgent::start() {
  ctx_.schedule(jitter(params_.beacon_interval), [this] { beacon_tick(); });
  ctx_.schedule(params_.iarp_refresh + jitter(params_.iarp_refresh), [this] { iarp_tick(); });
}

Packet ZrpAgent::control(PacketType type, RoutingMessage msg, NodeId dst, int ttl) {
  Packet p;
  p.uid = ctx_.next_uid();
  p.type = type;
  p.src = self();
  p.dst = dst;
  p.origin = ctx_.now();
  p.ttl = ttl;
  p.message = make_message(std::move(msg));
  p.size = routing_packet_size(*p.message);
  return p;
}

// ---- neighbor discovery and IARP ------------------------------------------

std::vector<NodeId> ZrpAgent::neighbors() const {
  std::vector<NodeId> out;
  for (NodeId n = 0; n < ctx_.node_count(); ++n) {
    const auto& t = last_heard_[static_cast<std::size_t>(n)];
    if (t && ctx_.now() - *t <= params_.neighbor_timeout) out.push_back(n);
  }
  return out;
}

void ZrpAgent::heard(NodeId from) {
  auto& t = last_heard_[static_cast<std::size_t>(from)];
  const bool known = t && ctx_.now() - *t <= params_.neighbor_timeout;
  t = ctx_.now();
  if (!known) neighbors_changed();
}

void ZrpAgent::neighbors_changed() {
  zone_dirty_ = true;
  if (iarp_pending_) return;
  iarp_pending_ = true;
  ctx_.schedule(jitter(params_.broadcast_jitter), [this] {
    iarp_pending_ = false;
    send_iarp();
  });
}

void ZrpAgent::beacon_tick() {
  ctx_.transmit(control(PacketType::ZrpBeacon, ZrpBeacon{}, kBroadcast, 1), kBroadcast);
  zone_dirty_ = true;
  if (neighbors() != advertised_neighbors_) neighbors_changed();
  const SimTime next = params_.beacon_interval - params_.beacon_spread + jitter(params_.beacon_spread * 2);
  ctx_.schedule(next, [this] { beacon_tick(); });
}

void ZrpAgent::iarp_tick() {
  send_iarp();
  ctx_.schedule(params_.iarp_refresh + jitter(params_.broadcast_jitter), [this] { iarp_tick(); });
}

void ZrpAgent::send_iarp() {
  advertised_neighbors_ = neighbors();
  const int ttl = params_.radius - 1;
  if (ttl < 1) return;
  ++iarp_seq_;
  ctx_.transmit(control(PacketType::ZrpIarp, ZrpIarp{self(), iarp_seq_, advertised_neighbors_}, kBroadcast, ttl),
                kBroadcast);
}

void ZrpAgent::handle_iarp(const Packet& pkt) {
  const auto& m = pkt.as<ZrpIarp>();
  if (m.origin == self()) return;
  auto& slot = link_state_[static_cast<std::size_t>(m.origin)];
  if (slot && m.seq <= slot->seq) return;
  slot = LinkState{m.seq, m.neighbors, ctx_.now()};
  zone_dirty_ = true;
  if (pkt.ttl > 1) {
    Packet fwd = pkt;
    fwd.ttl -= 1;
    ctx_.transmit_after(jitter(params_.broadcast_jitter), std::move(fwd), kBroadcast);
  }
}

const std::vector<int>& ZrpAgent::distances() {
  if (!zone_dirty_) return dist_;
  const auto n = static_cast<std::size_t>(ctx_.node_count());
  dist_.assign(n, -1);
  parent_.assign(n, -1);
  dist_[static_cast<std::size_t>(self())] = 0;
  std::deque<NodeId> frontier{self()};
  const std::vector<NodeId> mine = neighbors();
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop_front();
    const int du = dist_[static_cast<std::size_t>(u)];
    if (du >= params_.radius) continue;
    const std::vector<NodeId>* adj = &mine;
    if (u != self()) {
      const auto& ls = link_state_[static_cast<std::size_t>(u)];
      if (!ls || ctx_.now() - ls->received > params_.link_state_hold) continue;
      adj = &ls->neighbors;
    }
    for (NodeId v : *adj) {
      if (dist_[static_cast<std::size_t>(v)] != -1) continue;
      dist_[static_cast<std::size_t>(v)] = du + 1;
      parent_[static_cast<std::size_t>(v)] = u;
      frontier.push_back(v);
    }
  }
  zone_dirty_ = false;
  return dist_;
}

int ZrpAgent::zone_distance(NodeId v) { return distances()[static_cast<std::size_t>(v)]; }

std::vector<NodeId> ZrpAgent::zone() {
  std::vector<NodeId> out;
  const auto& d = distances();
  for (NodeId v = 0; v < ctx_.node_count(); ++v) {
    if (d[static_cast<std::size_t>(v)] >= 0) out.push_back(v);
  }
  return out;
}

std::vector<NodeId> ZrpAgent::peripheral() {
  std::vector<NodeId> out;
  const auto& d = distances();
  for (NodeId v = 0; v < ctx_.node_count(); ++v) {
    if (d[static_cast<std::size_t>(v)] == params_.radius) out.push_back(v);
  }
  return out;
}

std::vector<NodeId> ZrpAgent::zone_path(NodeId v) {
  if (zone_distance(v) < 0) return {};
  std::vector<NodeId> path;
  for (NodeId at = v; at != -1; at = parent_[static_cast<std::size_t>(at)]) path.push_back(at);
  std::reverse(path.begin(), path.end());
  return path;
}

std::optional<NodeId> ZrpAgent::zone_next_hop(NodeId v) {
  if (v == self() || zone_distance(v) < 0) return std::nullopt;
  NodeId at = v;
  while (parent_[static_cast<std::size_t>(at)] != self()) at = parent_[static_cast<std::size_t>(at)];
  return at;
}

// ---- data ------------------------------------------------------------------

DispatchOutcome ZrpAgent::on_data_from_app(Packet pkt) {
  if (pkt.dst == self()) {
    ctx_.deliver(pkt);
    return DispatchOutcome::Forwarded;
  }
  const NodeId dst = pkt.dst;
  route_or_buffer(std::move(pkt));
  return buffer_.has(dst) ? DispatchOutcome::Buffered : DispatchOutcome::Forwarded;
}

void ZrpAgent::route_or_buffer(Packet pkt) {
  // Intra-zone data is source-routed along the zone's BFS path, so stale
  // link state at a relay cannot bounce it back.
  if (zone_distance(pkt.dst) > 0) {
    send_source_routed(std::move(pkt), zone_path(pkt.dst));
    return;
  }
  if (const auto& route = routes_[static_cast<std::size_t>(pkt.dst)]) {
    send_source_routed(std::move(pkt), *route);
    return;
  }
  const NodeId dst = pkt.dst;
  buffer_.push(std::move(pkt));
  if (!queries_[static_cast<std::size_t>(dst)]) start_query(dst);
}

void ZrpAgent::send_source_routed(Packet pkt, std::vector<NodeId> route) {
  const NodeId next = route[1];
  pkt.route = std::move(route);
  pkt.route_index = 0;
  const auto header = kSourceRouteBytesPerHop * static_cast<std::uint32_t>(pkt.route.size());
  pkt.size = (pkt.is_data() ? kDataPayloadBytes : routing_packet_size(*pkt.message)) + header;
  ctx_.transmit(std::move(pkt), next);
}

void ZrpAgent::flush(NodeId dst) {
  if (auto& q = queries_[static_cast<std::size_t>(dst)]) {
    ctx_.cancel(q->timer);
    q.reset();
  }
  for (Packet& p : buffer_.take(dst)) route_or_buffer(std::move(p));
}

// ---- IERP / bordercast -----------------------------------------------------

void ZrpAgent::start_query(NodeId dst) {
  queries_[static_cast<std::size_t>(dst)] = Query{params_.query_backoff, 0};
  send_query(dst);
}

void ZrpAgent::send_query(NodeId dst) {
  auto& state = *queries_[static_cast<std::size_t>(dst)];
  ++query_id_;
  seen_.insert(query_key(self(), query_id_));
  ZrpQuery q;
  q.originator = self();
  q.query_id = query_id_;
  q.target = dst;
  q.accumulated = {self()};
  q.covered.assign((static_cast<std::size_t>(ctx_.node_count()) + 63) / 64, 0);
  Packet base;
  base.type = PacketType::ZrpIerpQuery;
  base.src = self();
  base.dst = dst;
  base.origin = ctx_.now();
  base.ttl = params_.query_ttl;
  bordercast(std::move(q), base);
  state.timer = ctx_.schedule(state.backoff, [this, dst] { query_timeout(dst); });
}

void ZrpAgent::query_timeout(NodeId dst) {
  auto& q = queries_[static_cast<std::size_t>(dst)];
  if (!q) return;
  if (routes_[static_cast<std::size_t>(dst)] || zone_distance(dst) > 0) {
    flush(dst);
    return;
  }
  if (!buffer_.has(dst)) {
    q.reset();
    return;
  }
  q->backoff = std::min(q->backoff * 2, params_.query_backoff_max);
  send_query(dst);
}

void ZrpAgent::bordercast(ZrpQuery q, const Packet& base) {
  q.relay_paths.clear();
  for (NodeId v : peripheral()) {
    if (test_bit(q.covered, v)) continue;
    if (std::find(q.accumulated.begin(), q.accumulated.end(), v) != q.accumulated.end()) continue;
    q.relay_paths.push_back(zone_path(v));
  }
  for (NodeId v : zone()) set_bit(q.covered, v);
  if (q.relay_paths.empty()) return;
  Packet p = base;
  p.uid = ctx_.next_uid();
  p.message = make_message(std::move(q));
  p.size = routing_packet_size(*p.message);
  ctx_.transmit(std::move(p), kBroadcast);
}

void ZrpAgent::handle_query(const Packet& pkt, NodeId from) {
  const ZrpQuery& in = pkt.as<ZrpQuery>();
  if (in.originator == self()) return;
  // Only children of the sender in the bordercast tree act on the frame.
  bool relay = false;
  bool border = false;
  for (const auto& path : in.relay_paths) {
    for (std::size_t i = 1; i < path.size(); ++i) {
      if (path[i] != self() || path[i - 1] != from) continue;
      if (i + 1 == path.size()) {
        border = true;
      } else {
        relay = true;
      }
    }
  }
  if (!relay && !border) return;
  if (std::find(in.accumulated.begin(), in.accumulated.end(), self()) != in.accumulated.end()) return;
  if (!seen_.insert(query_key(in.originator, in.query_id)).second) return;

  ZrpQuery q = in;
  q.accumulated.push_back(self());
  if (relay) {
    if (pkt.ttl <= 1) return;
    for (NodeId v : zone()) set_bit(q.covered, v);
    Packet fwd = pkt;
    fwd.ttl -= 1;
    fwd.message = make_message(std::move(q));
    fwd.size = routing_packet_size(*fwd.message);
    ctx_.transmit(std::move(fwd), kBroadcast);
    return;
  }

  if (zone_distance(q.target) >= 0) {
    std::vector<NodeId> walk = q.accumulated;
    const auto suffix = zone_path(q.target);
    walk.insert(walk.end(), suffix.begin() + 1, suffix.end());
    std::vector<NodeId> back(q.accumulated.rbegin(), q.accumulated.rend());
    Packet reply = control(PacketType::ZrpIerpReply, ZrpReply{q.originator, q.query_id, q.target, remove_loops(walk)},
                           q.originator, params_.query_ttl);
    send_source_routed(std::move(reply), std::move(back));
    return;
  }
  if (pkt.ttl <= 1) return;
  Packet base = pkt;
  base.ttl -= 1;
  bordercast(std::move(q), base);
}

void ZrpAgent::handle_source_routed(Packet pkt) {
  pkt.route_index += 1;
  const std::size_t idx = pkt.route_index;
  if (idx >= pkt.route.size() || pkt.route[idx] != self()) return;
  const bool last = idx + 1 == pkt.route.size();
  if (pkt.is_data()) {
    if (last) {
      ctx_.deliver(pkt);
      return;
    }
    if (!consume_ttl(pkt)) return;
  } else if (last) {
    if (pkt.type == PacketType::ZrpIerpReply) {
      const auto& m = pkt.as<ZrpReply>();
      auto& slot = routes_[static_cast<std::size_t>(m.target)];
      if (!slot || m.route.size() < slot->size()) slot = m.route;
      flush(m.target);
    } else if (pkt.type == PacketType::ZrpIerpError) {
      const auto& m = pkt.as<ZrpError>();
      drop_routes_using(m.from, m.to);
    }
    return;
  }
  const NodeId next = pkt.route[idx + 1];
  ctx_.transmit(std::move(pkt), next);
}

void ZrpAgent::on_packet_from_net(Packet pkt, NodeId from) {
  heard(from);
  switch (pkt.type) {
    case PacketType::ZrpBeacon:
      return;
    case PacketType::ZrpIarp:
      handle_iarp(pkt);
      return;
    case PacketType::ZrpIerpQuery:
      handle_query(pkt, from);
      return;
    case PacketType::ZrpIerpReply:
    case PacketType::ZrpIerpError:
      handle_source_routed(std::move(pkt));
      return;
    case PacketType::Cbr:
      handle_source_routed(std::move(pkt));
      return;
    default:
      return;
  }
}

// ---- maintenance -----------------------------------------------------------

void ZrpAgent::drop_routes_using(NodeId a, NodeId b) {
  for (auto& slot : routes_) {
    if (!slot) continue;
    for (std::size_t i = 0; i + 1 < slot->size(); ++i) {
      if ((*slot)[i] == a && (*slot)[i + 1] == b) {
        slot.reset();
        break;
      }
    }
  }
}

void ZrpAgent::report_break(const Packet& pkt, NodeId broken_to) {
  std::vector<NodeId> back(pkt.route.begin(), pkt.route.begin() + static_cast<std::ptrdiff_t>(pkt.route_index) + 1);
  std::reverse(back.begin(), back.end());
  Packet e = control(PacketType::ZrpIerpError, ZrpError{self(), broken_to, pkt.dst}, back.back(), params_.query_ttl);
  send_source_routed(std::move(e), std::move(back));
}

void ZrpAgent::on_link_break(NodeId next_hop, Packet pkt) {
  last_heard_[static_cast<std::size_t>(next_hop)].reset();
  neighbors_changed();
  drop_routes_using(self(), next_hop);
  std::vector<Packet> lost;
  lost.push_back(std::move(pkt));
  for (Packet& p : ctx_.take_queued_for(next_hop)) lost.push_back(std::move(p));
  std::vector<NodeId> notified;
  for (Packet& p : lost) {
    if (!p.is_data()) continue;
    const bool at_source = p.route.empty() ? p.src == self() : p.route_index == 0;
    if (at_source) {
      p.route.clear();
      p.route_index = 0;
      p.size = kDataPayloadBytes;
      route_or_buffer(std::move(p));
      continue;
    }
    if (!p.route.empty() && std::find(notified.begin(), notified.end(), p.route.front()) == notified.end()) {
      notified.push_back(p.route.front());
      report_break(p, next_hop);
    }
    ctx_.drop(p, DropReason::Callback);
  }
}

}  // namespace manet
