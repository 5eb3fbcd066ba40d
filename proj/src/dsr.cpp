#include "manet/dsr.hpp"

#include <algorithm>

namespace manet {

bool has_duplicates(const std::vector<NodeId>& path) {
  std::vector<NodeId> sorted = path;
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

void RouteCache::add(const std::vector<NodeId>& route, SimTime now) {
  if (route.size() < 2 || route.front() != owner_ || has_duplicates(route)) return;
  for (Entry& e : entries_) {
    if (e.route == route) {
      e.installed = now;
      return;
    }
  }
  if (entries_.size() >= capacity_) entries_.pop_front();
  entries_.push_back(Entry{route, now});
}

std::optional<std::vector<NodeId>> RouteCache::find(NodeId dst, SimTime now) const {
  const std::vector<NodeId>* best = nullptr;
  std::size_t best_len = 0;
  // Newest first, so a fresher route wins ties.
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (now - it->installed > expiry_) continue;
    auto pos = std::find(it->route.begin() + 1, it->route.end(), dst);
    if (pos == it->route.end()) continue;
    const auto len = static_cast<std::size_t>(pos - it->route.begin());
    if (!best || len < best_len) {
      best = &it->route;
      best_len = len;
    }
  }
  if (!best) return std::nullopt;
  return std::vector<NodeId>(best->begin(), best->begin() + static_cast<std::ptrdiff_t>(best_len) + 1);
}

void RouteCache::remove_link(NodeId from, NodeId to) {
  auto uses = [&](const Entry& e) {
    for (std::size_t i = 0; i + 1 < e.route.size(); ++i) {
      if (e.route[i] == from && e.route[i + 1] == to) return true;
    }
    return false;
  };
  entries_.erase(std::remove_if(entries_.begin(), entries_.end(), uses), entries_.end());
}

DsrAgent::DsrAgent(RoutingContext& ctx, const DsrParams& params)
    : RoutingAgent(ctx),
      params_(params),
      cache_(ctx.self(), params.cache_capacity, params.cache_expiry),
      buffer_(ctx, params.buffer),
      discoveries_(static_cast<std::size_t>(ctx.node_count())) {}

void DsrAgent::send_along(Packet pkt, std::vector<NodeId> route) {
  const NodeId next = route[1];
  pkt.route = std::move(route);
  pkt.route_index = 0;
  if (pkt.is_data()) {
    pkt.size = kDataPayloadBytes + kSourceRouteBytesPerHop * static_cast<std::uint32_t>(pkt.route.size());
  } else {
    pkt.size = routing_packet_size(*pkt.message) +
               kSourceRouteBytesPerHop * static_cast<std::uint32_t>(pkt.route.size());
  }
  ctx_.transmit(std::move(pkt), next);
}

void DsrAgent::learn(const std::vector<NodeId>& path, std::size_t my_index) {
  const SimTime now = ctx_.now();
  cache_.add(std::vector<NodeId>(path.begin() + static_cast<std::ptrdiff_t>(my_index), path.end()), now);
  std::vector<NodeId> back(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(my_index) + 1);
  std::reverse(back.begin(), back.end());
  cache_.add(back, now);
}

DispatchOutcome DsrAgent::on_data_from_app(Packet pkt) {
  if (pkt.dst == self()) {
    ctx_.deliver(pkt);
    return DispatchOutcome::Forwarded;
  }
  if (auto route = cache_.find(pkt.dst, ctx_.now())) {
    send_along(std::move(pkt), std::move(*route));
    return DispatchOutcome::Forwarded;
  }
  route_or_buffer(std::move(pkt));
  return DispatchOutcome::Buffered;
}

void DsrAgent::route_or_buffer(Packet pkt) {
  if (auto route = cache_.find(pkt.dst, ctx_.now())) {
    send_along(std::move(pkt), std::move(*route));
    return;
  }
  const NodeId dst = pkt.dst;
  buffer_.push(std::move(pkt));
  if (!discoveries_[static_cast<std::size_t>(dst)]) start_discovery(dst);
}

void DsrAgent::flush(NodeId dst) {
  auto route = cache_.find(dst, ctx_.now());
  if (!route) return;
  if (auto& d = discoveries_[static_cast<std::size_t>(dst)]) {
    ctx_.cancel(d->timer);
    d.reset();
  }
  for (Packet& p : buffer_.take(dst)) send_along(std::move(p), *route);
}

void DsrAgent::start_discovery(NodeId dst) {
  discoveries_[static_cast<std::size_t>(dst)] = Discovery{params_.rreq_backoff, 0};
  send_rreq(dst);
}

void DsrAgent::send_rreq(NodeId dst) {
  auto& d = *discoveries_[static_cast<std::size_t>(dst)];
  ++request_id_;
  seen_.insert((static_cast<std::uint64_t>(self()) << 32) | request_id_);
  DsrRreq q{self(), request_id_, dst, {self()}};
  Packet p;
  p.uid = ctx_.next_uid();
  p.type = PacketType::DsrRreq;
  p.src = self();
  p.dst = kBroadcast;
  p.origin = ctx_.now();
  p.ttl = params_.rreq_ttl;
  p.message = make_message(std::move(q));
  p.size = routing_packet_size(*p.message);
  ctx_.transmit(std::move(p), kBroadcast);
  d.timer = ctx_.schedule(d.backoff, [this, dst] { discovery_timeout(dst); });
}

void DsrAgent::discovery_timeout(NodeId dst) {
  auto& d = discoveries_[static_cast<std::size_t>(dst)];
  if (!d) return;
  if (cache_.find(dst, ctx_.now())) {
    flush(dst);
    return;
  }
  if (!buffer_.has(dst)) {
    d.reset();
    return;
  }
  d->backoff = std::min(d->backoff * 2, params_.rreq_backoff_max);
  send_rreq(dst);
}

void DsrAgent::on_packet_from_net(Packet pkt, NodeId /*from*/) {
  if (pkt.type == PacketType::DsrRreq) {
    handle_rreq(pkt);
    return;
  }
  if (pkt.is_data() || pkt.type == PacketType::DsrRrep || pkt.type == PacketType::DsrRerr) {
    handle_source_routed(std::move(pkt));
  }
}

void DsrAgent::handle_rreq(const Packet& pkt) {
  const auto& q = pkt.as<DsrRreq>();
  if (q.originator == self()) return;
  if (std::find(q.record.begin(), q.record.end(), self()) != q.record.end()) return;

  if (q.target == self()) {
    // Every copy that reaches the target yields a reply, so the source
    // learns each distinct path the flood found.
    std::vector<NodeId> discovered = q.record;
    discovered.push_back(self());
    std::vector<NodeId> back(discovered.rbegin(), discovered.rend());
    cache_.add(back, ctx_.now());
    reply(discovered, back);
    return;
  }
  if (!seen_.insert((static_cast<std::uint64_t>(q.originator) << 32) | q.request_id).second) return;

  if (auto cached = cache_.find(q.target, ctx_.now())) {
    std::vector<NodeId> discovered = q.record;
    discovered.insert(discovered.end(), cached->begin(), cached->end());
    if (!has_duplicates(discovered)) {
      std::vector<NodeId> back(q.record.rbegin(), q.record.rend());
      back.insert(back.begin(), self());
      reply(discovered, back);
      return;
    }
  }
  if (pkt.ttl <= 1) return;
  DsrRreq next = q;
  next.record.push_back(self());
  Packet fwd = pkt;
  fwd.ttl -= 1;
  fwd.message = make_message(std::move(next));
  fwd.size = routing_packet_size(*fwd.message);
  ctx_.transmit_after(jitter(params_.broadcast_jitter), std::move(fwd), kBroadcast);
}

void DsrAgent::reply(const std::vector<NodeId>& discovered, const std::vector<NodeId>& back_path) {
  Packet p;
  p.uid = ctx_.next_uid();
  p.type = PacketType::DsrRrep;
  p.src = self();
  p.dst = back_path.back();
  p.origin = ctx_.now();
  p.ttl = params_.rreq_ttl;
  p.message = make_message(DsrRrep{discovered});
  send_along(std::move(p), back_path);
}

void DsrAgent::handle_source_routed(Packet pkt) {
  pkt.route_index += 1;
  const std::size_t idx = pkt.route_index;
  if (idx >= pkt.route.size() || pkt.route[idx] != self()) return;
  const bool last = idx + 1 == pkt.route.size();

  if (pkt.is_data()) {
    learn(pkt.route, idx);
    if (last) {
      ctx_.deliver(pkt);
      return;
    }
    if (!consume_ttl(pkt)) return;
  } else if (pkt.type == PacketType::DsrRrep) {
    const auto& discovered = pkt.as<DsrRrep>().route;
    auto at = std::find(discovered.begin(), discovered.end(), self());
    if (at != discovered.end()) learn(discovered, static_cast<std::size_t>(at - discovered.begin()));
    if (last) {
      flush(discovered.back());
      return;
    }
  } else {
    const auto& e = pkt.as<DsrRerr>();
    cache_.remove_link(e.from, e.to);
    if (last) return;
  }
  const NodeId next = pkt.route[idx + 1];
  ctx_.transmit(std::move(pkt), next);
}

void DsrAgent::report_break(const Packet& pkt, NodeId broken_to) {
  std::vector<NodeId> back(pkt.route.begin(), pkt.route.begin() + static_cast<std::ptrdiff_t>(pkt.route_index) + 1);
  std::reverse(back.begin(), back.end());
  Packet p;
  p.uid = ctx_.next_uid();
  p.type = PacketType::DsrRerr;
  p.src = self();
  p.dst = back.back();
  p.origin = ctx_.now();
  p.ttl = params_.rreq_ttl;
  p.message = make_message(DsrRerr{self(), broken_to});
  send_along(std::move(p), std::move(back));
}

void DsrAgent::on_link_break(NodeId next_hop, Packet pkt) {
  cache_.remove_link(self(), next_hop);
  std::vector<Packet> lost;
  lost.push_back(std::move(pkt));
  for (Packet& p : ctx_.take_queued_for(next_hop)) lost.push_back(std::move(p));
  std::vector<NodeId> notified;
  for (Packet& p : lost) {
    if (!p.is_data()) continue;
    if (p.route_index == 0) {
      p.route.clear();
      p.size = kDataPayloadBytes;
      route_or_buffer(std::move(p));
      continue;
    }
    const NodeId source = p.route.front();
    if (std::find(notified.begin(), notified.end(), source) == notified.end()) {
      notified.push_back(source);
      report_break(p, next_hop);
    }
    ctx_.drop(p, DropReason::Callback);
  }
}

}  // namespace manet
