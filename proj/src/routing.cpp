#include "manet/routing.hpp"

#include <algorithm>

namespace manet {

bool RoutingAgent::consume_ttl(Packet& pkt) {
  if (--pkt.ttl <= 0) {
    ctx_.drop(pkt, DropReason::Ttl);
    return false;
  }
  return true;
}

SimTime RoutingAgent::jitter(SimTime max) {
  if (max.ns() <= 0) return SimTime{};
  return nanoseconds(static_cast<std::int64_t>(ctx_.rng().below(static_cast<std::uint64_t>(max.ns()))));
}

SendBuffer::~SendBuffer() {
  if (timer_) ctx_.cancel(*timer_);
}

void SendBuffer::push(Packet pkt) {
  expire();
  if (queue_.size() >= params_.capacity) {
    ctx_.drop(queue_.front().pkt, DropReason::IfqSendBuffer);
    queue_.pop_front();
  }
  queue_.push_back(Entry{ctx_.now(), std::move(pkt)});
  arm();
}

bool SendBuffer::has(NodeId dst) const {
  return std::any_of(queue_.begin(), queue_.end(), [&](const Entry& e) { return e.pkt.dst == dst; });
}

std::vector<Packet> SendBuffer::take(NodeId dst) {
  std::vector<Packet> out;
  auto keep = std::stable_partition(queue_.begin(), queue_.end(), [&](const Entry& e) { return e.pkt.dst != dst; });
  for (auto it = keep; it != queue_.end(); ++it) out.push_back(std::move(it->pkt));
  queue_.erase(keep, queue_.end());
  return out;
}

void SendBuffer::drop_all(NodeId dst, DropReason reason) {
  for (const Packet& p : take(dst)) ctx_.drop(p, reason);
}

void SendBuffer::expire() {
  const SimTime now = ctx_.now();
  // Entries are in arrival order, so expired ones form a prefix.
  while (!queue_.empty() && now - queue_.front().queued > params_.timeout) {
    ctx_.drop(queue_.front().pkt, DropReason::Timeout);
    queue_.pop_front();
  }
}

void SendBuffer::arm() {
  if (timer_ || queue_.empty()) return;
  const SimTime due = queue_.front().queued + params_.timeout + nanoseconds(1);
  timer_ = ctx_.schedule(due - ctx_.now(), [this] {
    timer_.reset();
    expire();
    arm();
  });
}

}  // namespace manet
