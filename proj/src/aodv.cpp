#include "manet/aodv.hpp"

#include <algorithm>

namespace manet {

std::vector<int> aodv_ttl_schedule(const AodvParams& p) {
  std::vector<int> out;
  for (int ttl = p.ttl_start; ttl <= p.ttl_threshold; ttl += p.ttl_increment) out.push_back(ttl);
  for (int i = 0; i <= p.rreq_retries; ++i) out.push_back(p.net_diameter);
  return out;
}

SimTime aodv_attempt_wait(const AodvParams& p, int ttl) { return p.node_traversal_time * (2 * ttl); }

AodvAgent::AodvAgent(RoutingContext& ctx, const AodvParams& params)
    : RoutingAgent(ctx),
      params_(params),
      ttl_schedule_(aodv_ttl_schedule(params)),
      routes_(static_cast<std::size_t>(ctx.node_count())),
      discoveries_(static_cast<std::size_t>(ctx.node_count())),
      last_heard_(static_cast<std::size_t>(ctx.node_count())),
      buffer_(ctx, params.buffer) {}

void AodvAgent::start() {
  if (!params_.hellos) return;
  ctx_.schedule(jitter(params_.hello_interval), [this] { hello_tick(); });
  ctx_.schedule(jitter(params_.neighbor_check_interval), [this] { neighbor_check(); });
}

const AodvRoute* AodvAgent::valid_route(NodeId dest) const {
  const auto& r = routes_[static_cast<std::size_t>(dest)];
  return r && is_valid(*r) ? &*r : nullptr;
}

AodvRoute* AodvAgent::live(NodeId dest) {
  auto& r = routes_[static_cast<std::size_t>(dest)];
  return r && is_valid(*r) ? &*r : nullptr;
}

std::optional<RouteSnapshot> AodvAgent::snapshot(NodeId dest) const {
  if (const AodvRoute* r = valid_route(dest)) return RouteSnapshot{r->dest_seq, r->hops};
  return std::nullopt;
}

Packet AodvAgent::control(PacketType type, RoutingMessage msg, NodeId dst, int ttl) {
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

bool AodvAgent::update_route(NodeId dest, NodeId next_hop, std::uint32_t hops, std::uint32_t seq, bool seq_known,
                             SimTime lifetime) {
  auto& slot = routes_[static_cast<std::size_t>(dest)];
  if (!slot) {
    slot = AodvRoute{dest, next_hop, hops, seq, seq_known, lifetime, true, false, {}};
    return true;
  }
  AodvRoute& r = *slot;
  const bool valid = is_valid(r);
  if (valid && r.next_hop == next_hop && r.hops == hops && r.seq_known && r.dest_seq == seq) {
    r.lifetime = std::max(r.lifetime, lifetime);
    r.hello_only = false;
    return true;
  }
  const bool fresher = !r.seq_known || seq > r.dest_seq || (seq == r.dest_seq && (!valid || hops < r.hops));
  if (!fresher) return false;
  r.next_hop = next_hop;
  r.hops = hops;
  r.dest_seq = seq;
  r.seq_known = seq_known;
  r.lifetime = valid ? std::max(r.lifetime, lifetime) : lifetime;
  r.valid = true;
  r.hello_only = false;
  return true;
}

void AodvAgent::touch_neighbor(NodeId from, std::optional<std::uint32_t> seq, SimTime lifetime, bool hello) {
  last_heard_[static_cast<std::size_t>(from)] = ctx_.now();
  const SimTime until = ctx_.now() + lifetime;
  auto& slot = routes_[static_cast<std::size_t>(from)];
  if (!slot) {
    slot = AodvRoute{from, from, 1, seq.value_or(0), seq.has_value(), until, true, hello, {}};
    route_available(from);
    return;
  }
  AodvRoute& r = *slot;
  if (seq && (!r.seq_known || *seq > r.dest_seq)) {
    r.dest_seq = *seq;
    r.seq_known = true;
  }
  const bool valid = is_valid(r);
  if (valid && r.next_hop == from && r.hops == 1) {
    r.lifetime = std::max(r.lifetime, until);
    if (!hello) r.hello_only = false;
    return;
  }
  r.next_hop = from;
  r.hops = 1;
  r.lifetime = valid ? std::max(r.lifetime, until) : until;
  r.hello_only = valid ? (r.hello_only && hello) : hello;
  r.valid = true;
  route_available(from);
}

void AodvAgent::refresh(NodeId dest) {
  if (AodvRoute* r = live(dest)) {
    r->lifetime = std::max(r->lifetime, ctx_.now() + params_.active_route_timeout);
    r->hello_only = false;
  }
}

void AodvAgent::route_available(NodeId dest) {
  auto& d = discoveries_[static_cast<std::size_t>(dest)];
  if (!d && !buffer_.has(dest)) return;
  AodvRoute* r = live(dest);
  if (!r) return;
  if (d) {
    ctx_.cancel(d->timer);
    d.reset();
  }
  const NodeId hop = r->next_hop;
  for (Packet& p : buffer_.take(dest)) {
    refresh(dest);
    refresh(hop);
    ctx_.transmit(std::move(p), hop);
  }
}

DispatchOutcome AodvAgent::on_data_from_app(Packet pkt) {
  if (pkt.dst == self()) {
    ctx_.deliver(pkt);
    return DispatchOutcome::Forwarded;
  }
  if (AodvRoute* r = live(pkt.dst)) {
    const NodeId hop = r->next_hop;
    refresh(pkt.dst);
    refresh(hop);
    ctx_.transmit(std::move(pkt), hop);
    return DispatchOutcome::Forwarded;
  }
  const NodeId dst = pkt.dst;
  buffer_.push(std::move(pkt));
  if (!discoveries_[static_cast<std::size_t>(dst)]) start_discovery(dst);
  return DispatchOutcome::Buffered;
}

void AodvAgent::start_discovery(NodeId dest) {
  discoveries_[static_cast<std::size_t>(dest)] = Discovery{};
  send_rreq(dest);
}

void AodvAgent::send_rreq(NodeId dest) {
  auto& d = *discoveries_[static_cast<std::size_t>(dest)];
  const int ttl = ttl_schedule_[d.attempt];
  ++own_seq_;
  ++rreq_id_;
  seen_rreqs_.insert((static_cast<std::uint64_t>(self()) << 32) | rreq_id_);
  AodvRreq q;
  q.originator = self();
  q.rreq_id = rreq_id_;
  q.originator_seq = own_seq_;
  q.dest = dest;
  if (const auto& r = routes_[static_cast<std::size_t>(dest)]; r && r->seq_known) {
    q.dest_seq = r->dest_seq;
    q.dest_seq_known = true;
  }
  ctx_.transmit(control(PacketType::AodvRreq, q, kBroadcast, ttl), kBroadcast);
  d.timer = ctx_.schedule(aodv_attempt_wait(params_, ttl), [this, dest] { attempt_timeout(dest); });
}

void AodvAgent::attempt_timeout(NodeId dest) {
  auto& d = discoveries_[static_cast<std::size_t>(dest)];
  if (!d) return;
  if (live(dest)) {
    route_available(dest);
    return;
  }
  if (!buffer_.has(dest)) {
    d.reset();
    return;
  }
  if (++d->attempt >= ttl_schedule_.size()) {
    d.reset();
    buffer_.drop_all(dest, DropReason::NoRoute);
    return;
  }
  send_rreq(dest);
}

void AodvAgent::on_packet_from_net(Packet pkt, NodeId from) {
  switch (pkt.type) {
    case PacketType::Cbr:
      forward_data(std::move(pkt), from);
      return;
    case PacketType::AodvRreq:
      handle_rreq(pkt, from);
      return;
    case PacketType::AodvRrep:
      handle_rrep(pkt, from);
      return;
    case PacketType::AodvRerr:
      handle_rerr(pkt, from);
      return;
    case PacketType::AodvHello:
      handle_hello(pkt, from);
      return;
    default:
      return;
  }
}

void AodvAgent::forward_data(Packet pkt, NodeId from) {
  last_heard_[static_cast<std::size_t>(from)] = ctx_.now();
  if (pkt.dst == self()) {
    refresh(pkt.src);
    refresh(from);
    ctx_.deliver(pkt);
    return;
  }
  if (!consume_ttl(pkt)) return;
  AodvRoute* r = live(pkt.dst);
  if (!r) {
    const auto& stale = routes_[static_cast<std::size_t>(pkt.dst)];
    const std::uint32_t seq = stale ? stale->dest_seq : 0;
    ctx_.drop(pkt, DropReason::NoRoute);
    broadcast_rerr({{pkt.dst, seq}});
    return;
  }
  const NodeId hop = r->next_hop;
  refresh(pkt.dst);
  refresh(hop);
  refresh(pkt.src);
  refresh(from);
  ctx_.transmit(std::move(pkt), hop);
}

void AodvAgent::handle_rreq(const Packet& pkt, NodeId from) {
  const auto& q = pkt.as<AodvRreq>();
  touch_neighbor(from, std::nullopt, params_.active_route_timeout, false);
  if (q.originator == self()) return;
  if (!seen_rreqs_.insert((static_cast<std::uint64_t>(q.originator) << 32) | q.rreq_id).second) return;

  update_route(q.originator, from, q.hops + 1, q.originator_seq, true, ctx_.now() + params_.active_route_timeout);
  route_available(q.originator);

  if (q.dest == self()) {
    if (q.dest_seq_known && q.dest_seq > own_seq_) own_seq_ = q.dest_seq;
    AodvRrep rep{self(), own_seq_, q.originator, 0, params_.active_route_timeout * 2};
    send_rrep(q.originator, rep);
    return;
  }
  if (AodvRoute* r = live(q.dest); r && r->seq_known && (!q.dest_seq_known || r->dest_seq >= q.dest_seq)) {
    r->precursors.insert(from);
    const NodeId toward_dest = r->next_hop;
    AodvRrep rep{q.dest, r->dest_seq, q.originator, r->hops, r->lifetime - ctx_.now()};
    if (AodvRoute* rev = live(q.originator)) rev->precursors.insert(toward_dest);
    send_rrep(q.originator, rep);
    return;
  }
  if (pkt.ttl <= 1) return;
  AodvRreq next = q;
  next.hops += 1;
  if (const auto& r = routes_[static_cast<std::size_t>(q.dest)]; r && r->seq_known &&
                                                                  (!next.dest_seq_known || r->dest_seq > next.dest_seq)) {
    next.dest_seq = r->dest_seq;
    next.dest_seq_known = true;
  }
  Packet fwd = pkt;
  fwd.ttl -= 1;
  fwd.message = make_message(std::move(next));
  ctx_.transmit_after(jitter(params_.broadcast_jitter), std::move(fwd), kBroadcast);
}

void AodvAgent::send_rrep(NodeId to_originator, AodvRrep rrep) {
  AodvRoute* rev = live(to_originator);
  if (!rev) return;
  const NodeId hop = rev->next_hop;
  ctx_.transmit(control(PacketType::AodvRrep, rrep, to_originator, params_.net_diameter), hop);
}

void AodvAgent::handle_rrep(const Packet& pkt, NodeId from) {
  const auto& a = pkt.as<AodvRrep>();
  touch_neighbor(from, std::nullopt, params_.active_route_timeout, false);
  if (a.dest == self()) return;
  const bool usable = update_route(a.dest, from, a.hops + 1, a.dest_seq, true, ctx_.now() + a.lifetime);
  if (a.originator == self()) {
    route_available(a.dest);
    return;
  }
  if (!usable) return;
  AodvRoute* rev = live(a.originator);
  AodvRoute* fwd = live(a.dest);
  if (!rev || !fwd) return;
  fwd->precursors.insert(rev->next_hop);
  rev->precursors.insert(from);
  const NodeId hop = rev->next_hop;
  refresh(a.originator);
  AodvRrep next = a;
  next.hops += 1;
  Packet out = pkt;
  out.message = make_message(std::move(next));
  ctx_.transmit(std::move(out), hop);
  route_available(a.dest);
}

void AodvAgent::handle_rerr(const Packet& pkt, NodeId from) {
  touch_neighbor(from, std::nullopt, params_.active_route_timeout, false);
  std::vector<std::pair<NodeId, std::uint32_t>> out;
  for (const auto& [dest, seq] : pkt.as<AodvRerr>().unreachable) {
    AodvRoute* r = live(dest);
    if (!r || r->next_hop != from) continue;
    r->valid = false;
    r->dest_seq = std::max(r->dest_seq, seq);
    r->seq_known = true;
    if (!r->precursors.empty()) out.emplace_back(dest, r->dest_seq);
    r->precursors.clear();
  }
  if (!out.empty()) broadcast_rerr(std::move(out));
}

void AodvAgent::handle_hello(const Packet& pkt, NodeId from) {
  touch_neighbor(from, pkt.as<AodvHello>().seq, params_.hello_interval * params_.allowed_hello_loss, true);
}

void AodvAgent::link_broken(NodeId neighbor) {
  std::vector<std::pair<NodeId, std::uint32_t>> out;
  for (auto& slot : routes_) {
    if (!slot || !is_valid(*slot) || slot->next_hop != neighbor) continue;
    slot->valid = false;
    slot->dest_seq += 1;
    if (!slot->precursors.empty()) out.emplace_back(slot->dest, slot->dest_seq);
    slot->precursors.clear();
  }
  last_heard_[static_cast<std::size_t>(neighbor)].reset();
  if (!out.empty()) broadcast_rerr(std::move(out));
}

void AodvAgent::broadcast_rerr(std::vector<std::pair<NodeId, std::uint32_t>> unreachable) {
  AodvRerr e;
  e.unreachable = std::move(unreachable);
  ctx_.transmit(control(PacketType::AodvRerr, std::move(e), kBroadcast, 1), kBroadcast);
}

void AodvAgent::on_link_break(NodeId next_hop, Packet pkt) {
  std::vector<Packet> lost;
  lost.push_back(std::move(pkt));
  for (Packet& p : ctx_.take_queued_for(next_hop)) lost.push_back(std::move(p));
  if (params_.link_layer_detection) link_broken(next_hop);
  for (Packet& p : lost) {
    if (!p.is_data()) continue;
    if (p.src != self() || !params_.link_layer_detection) {
      ctx_.drop(p, DropReason::Callback);
      continue;
    }
    // The packet never left its source: route it again.
    if (AodvRoute* r = live(p.dst)) {
      const NodeId hop = r->next_hop;
      ctx_.transmit(std::move(p), hop);
      continue;
    }
    const NodeId dst = p.dst;
    buffer_.push(std::move(p));
    if (!discoveries_[static_cast<std::size_t>(dst)]) start_discovery(dst);
  }
}

void AodvAgent::hello_tick() {
  const bool active = std::any_of(routes_.begin(), routes_.end(),
                                  [&](const auto& r) { return r && is_valid(*r) && !r->hello_only; });
  if (active) {
    ctx_.transmit(control(PacketType::AodvHello, AodvHello{own_seq_}, kBroadcast, 1), kBroadcast);
  }
  ctx_.schedule(params_.hello_interval, [this] { hello_tick(); });
}

void AodvAgent::neighbor_check() {
  const SimTime limit = params_.hello_interval * params_.allowed_hello_loss;
  std::vector<NodeId> lost;
  for (const auto& r : routes_) {
    if (!r || !is_valid(*r)) continue;
    const auto& heard = last_heard_[static_cast<std::size_t>(r->next_hop)];
    if (heard && ctx_.now() - *heard > limit &&
        std::find(lost.begin(), lost.end(), r->next_hop) == lost.end()) {
      lost.push_back(r->next_hop);
    }
  }
  for (NodeId n : lost) link_broken(n);
  ctx_.schedule(params_.neighbor_check_interval, [this] { neighbor_check(); });
}

}  // namespace manet
