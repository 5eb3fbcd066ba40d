#include "manet/dsdv.hpp"

#include <algorithm>

namespace manet {

DsdvAgent::DsdvAgent(RoutingContext& ctx, const DsdvParams& params)
    : RoutingAgent(ctx),
      params_(params),
      table_(static_cast<std::size_t>(ctx.node_count())),
      last_heard_(static_cast<std::size_t>(ctx.node_count())) {}

void DsdvAgent::start() {
  DsdvEntry me;
  me.dest = self();
  me.next_hop = self();
  me.metric = 0;
  me.seq = own_seq_;
  me.installed = ctx_.now();
  me.changed_since_full = me.changed_since_advert = true;
  table_[static_cast<std::size_t>(self())] = me;
  ctx_.schedule(jitter(params_.periodic_interval), [this] { periodic_tick(); });
}

std::optional<NodeId> DsdvAgent::next_hop_for(NodeId dst) const {
  const auto& e = table_[static_cast<std::size_t>(dst)];
  if (!e || e->metric == kInfiniteMetric) return std::nullopt;
  return e->next_hop;
}

DispatchOutcome DsdvAgent::on_data_from_app(Packet pkt) {
  if (pkt.dst == self()) {
    ctx_.deliver(pkt);
    return DispatchOutcome::Forwarded;
  }
  if (auto hop = next_hop_for(pkt.dst)) {
    ctx_.transmit(std::move(pkt), *hop);
    return DispatchOutcome::Forwarded;
  }
  ctx_.drop(pkt, DropReason::NoRoute);
  return DispatchOutcome::Dropped;
}

void DsdvAgent::on_packet_from_net(Packet pkt, NodeId from) {
  last_heard_[static_cast<std::size_t>(from)] = ctx_.now();
  if (pkt.is_data()) {
    if (pkt.dst == self()) {
      ctx_.deliver(pkt);
      return;
    }
    if (!consume_ttl(pkt)) return;
    if (auto hop = next_hop_for(pkt.dst)) {
      ctx_.transmit(std::move(pkt), *hop);
    } else {
      ctx_.drop(pkt, DropReason::NoRoute);
    }
    return;
  }
  if (pkt.type != PacketType::Dsdv) return;
  bool trigger = false;
  for (const DsdvAdvert& a : pkt.as<DsdvUpdate>().entries) trigger |= integrate(a, from);
  if (trigger) request_trigger();
}

void DsdvAgent::mark(DsdvEntry& e) {
  e.changed_since_full = true;
  e.changed_since_advert = true;
  e.installed = ctx_.now();
}

bool DsdvAgent::integrate(const DsdvAdvert& a, NodeId from) {
  if (a.dest == self()) {
    // Someone advertised us as unreachable, or holds a newer number than
    // ours: answer with a fresher even sequence number. Our own latest
    // advertisement may never have reached that neighbor.
    if (a.metric == kInfiniteMetric || a.seq > own_seq_) {
      const std::uint32_t base = std::max(a.seq, own_seq_);
      own_seq_ = base + (base % 2 == 1 ? 1 : 2);
      auto& me = *table_[static_cast<std::size_t>(self())];
      me.seq = own_seq_;
      mark(me);
      return true;
    }
    return false;
  }
  const std::uint32_t metric = a.metric == kInfiniteMetric ? kInfiniteMetric : a.metric + 1;
  auto& slot = table_[static_cast<std::size_t>(a.dest)];
  if (!slot) {
    if (metric == kInfiniteMetric) return false;
    slot = DsdvEntry{a.dest, from, metric, a.seq, ctx_.now(), false, false};
    mark(*slot);
    return true;
  }
  DsdvEntry& e = *slot;
  if (!(a.seq > e.seq || (a.seq == e.seq && metric < e.metric))) return false;
  e.next_hop = from;
  e.metric = metric;
  e.seq = a.seq;
  mark(e);
  return true;
}

void DsdvAgent::lose_neighbor(NodeId neighbor) {
  bool any = false;
  for (auto& slot : table_) {
    if (!slot || slot->dest == self() || slot->next_hop != neighbor || slot->metric == kInfiniteMetric) continue;
    slot->metric = kInfiniteMetric;
    slot->seq += 1;
    mark(*slot);
    any = true;
  }
  last_heard_[static_cast<std::size_t>(neighbor)].reset();
  if (any) request_trigger();
}

void DsdvAgent::on_link_break(NodeId next_hop, Packet pkt) {
  lose_neighbor(next_hop);
  if (pkt.is_data()) ctx_.drop(pkt, DropReason::Callback);
  for (const Packet& p : ctx_.take_queued_for(next_hop)) {
    if (p.is_data()) ctx_.drop(p, DropReason::Callback);
  }
}

void DsdvAgent::periodic_tick() {
  const SimTime silence = params_.periodic_interval * params_.missed_updates;
  for (NodeId n = 0; n < ctx_.node_count(); ++n) {
    const auto& heard = last_heard_[static_cast<std::size_t>(n)];
    if (heard && ctx_.now() - *heard > silence) lose_neighbor(n);
  }

  const bool full = ticks_ % static_cast<std::uint64_t>(params_.full_dump_every) == 0;
  ++ticks_;
  const bool pending = std::any_of(table_.begin(), table_.end(), [&](const auto& s) {
    return s && s->changed_since_advert;
  });
  if (full || pending) {
    own_seq_ += 2;
    auto& me = *table_[static_cast<std::size_t>(self())];
    me.seq = own_seq_;
    mark(me);
    send_update(full);
  }
  ctx_.schedule(params_.periodic_interval, [this] { periodic_tick(); });
}

void DsdvAgent::request_trigger() {
  if (trigger_timer_) return;
  // Jitter goes on after the spacing clamp; otherwise neighbors that sent
  // together stay locked to the same 1 s grid and keep colliding.
  SimTime at = ctx_.now();
  if (last_sent_) at = std::max(at, *last_sent_ + params_.min_trigger_gap);
  at += jitter(params_.trigger_jitter);
  trigger_timer_ = ctx_.schedule(at - ctx_.now(), [this] {
    trigger_timer_.reset();
    const bool pending = std::any_of(table_.begin(), table_.end(), [&](const auto& s) {
      return s && s->changed_since_advert;
    });
    if (pending) send_update(false);
  });
}

void DsdvAgent::send_update(bool full) {
  DsdvUpdate update;
  update.full_dump = full;
  for (auto& slot : table_) {
    if (!slot) continue;
    if (full || slot->changed_since_full || slot->dest == self()) {
      update.entries.push_back(DsdvAdvert{slot->dest, slot->metric, slot->seq});
    }
    slot->changed_since_advert = false;
    if (full) slot->changed_since_full = false;
  }
  Packet pkt;
  pkt.uid = ctx_.next_uid();
  pkt.type = PacketType::Dsdv;
  pkt.src = self();
  pkt.dst = kBroadcast;
  pkt.origin = ctx_.now();
  pkt.ttl = 1;
  pkt.message = make_message(std::move(update));
  pkt.size = routing_packet_size(*pkt.message);
  last_sent_ = ctx_.now();
  ++updates_sent_;
  ctx_.transmit(std::move(pkt), kBroadcast);
}

}  // namespace manet
