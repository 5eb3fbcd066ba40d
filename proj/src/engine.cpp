#include "manet/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace manet {

SimTime SimTime::from_seconds(double s) { return SimTime{static_cast<std::int64_t>(std::llround(s * 1e9))}; }

std::string format_seconds(SimTime t) {
  std::int64_t ns = t.ns();
  const bool neg = ns < 0;
  if (neg) ns = -ns;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%s%lld.%09lld", neg ? "-" : "", static_cast<long long>(ns / 1000000000),
                static_cast<long long>(ns % 1000000000));
  return buf;
}

EventId Engine::schedule(SimTime at, NodeId target, EventKind kind, std::function<void()> action) {
  if (at < now_) {
    throw std::logic_error("event scheduled in the past: at=" + format_seconds(at) + " now=" + format_seconds(now_));
  }
  const EventId id = next_seq_++;
  heap_.push_back(Event{at, id, target, kind, std::move(action)});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
  return id;
}

void Engine::cancel(EventId id) {
  if (id < next_seq_) cancelled_.insert(id);
}

std::size_t Engine::pending() const {
  return static_cast<std::size_t>(
      std::count_if(heap_.begin(), heap_.end(), [&](const Event& e) { return !cancelled_.contains(e.seq); }));
}

RunSummary Engine::run_until(SimTime end) {
  RunSummary summary;
  while (!heap_.empty() && heap_.front().at <= end) {
    std::pop_heap(heap_.begin(), heap_.end(), Later{});
    Event ev = std::move(heap_.back());
    heap_.pop_back();
    if (!cancelled_.empty()) {
      if (auto it = cancelled_.find(ev.seq); it != cancelled_.end()) {
        cancelled_.erase(it);
        continue;
      }
    }
    now_ = ev.at;
    if (observer_) observer_(ev);
    ++summary.events_dispatched;
    ++dispatched_;
    ev.action();
  }
  if (end > now_) now_ = end;
  summary.final_clock = now_;
  return summary;
}

}  // namespace manet
