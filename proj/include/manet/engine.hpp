#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <unordered_set>
#include <vector>

namespace manet {

using NodeId = std::int32_t;

/// Target id used for events owned by the simulator itself rather than a node.
inline constexpr NodeId kSystemTarget = -1;

/// Simulated time as integer nanoseconds since the start of the run.
class SimTime {
 public:
  constexpr SimTime() = default;

  static constexpr SimTime from_ns(std::int64_t ns) { return SimTime{ns}; }
  /// Rounds to the nearest nanosecond.
  static SimTime from_seconds(double s);

  constexpr std::int64_t ns() const { return ns_; }
  constexpr double seconds() const { return static_cast<double>(ns_) * 1e-9; }

  constexpr auto operator<=>(const SimTime&) const = default;

  constexpr SimTime operator+(SimTime o) const { return SimTime{ns_ + o.ns_}; }
  constexpr SimTime operator-(SimTime o) const { return SimTime{ns_ - o.ns_}; }
  constexpr SimTime& operator+=(SimTime o) {
    ns_ += o.ns_;
    return *this;
  }
  constexpr SimTime operator*(std::int64_t k) const { return SimTime{ns_ * k}; }

  static constexpr SimTime max() { return SimTime{INT64_MAX}; }

 private:
  constexpr explicit SimTime(std::int64_t ns) : ns_(ns) {}
  std::int64_t ns_ = 0;
};

constexpr SimTime nanoseconds(std::int64_t v) { return SimTime::from_ns(v); }
constexpr SimTime microseconds(std::int64_t v) { return SimTime::from_ns(v * 1000); }
constexpr SimTime milliseconds(std::int64_t v) { return SimTime::from_ns(v * 1000000); }
constexpr SimTime seconds(std::int64_t v) { return SimTime::from_ns(v * 1000000000); }

/// "<s>.<9 digits>", exact.
std::string format_seconds(SimTime t);

enum class EventKind : std::uint8_t {
  PacketDelivery,
  Timer,
  MovementUpdate,
  TrafficTick,
  MacAccess,
  MacTxEnd,
};

using EventId = std::uint64_t;

struct Event {
  SimTime at;
  std::uint64_t seq = 0;
  NodeId target = kSystemTarget;
  EventKind kind = EventKind::Timer;
  std::function<void()> action;
};

struct RunSummary {
  std::uint64_t events_dispatched = 0;
  SimTime final_clock;
};

/// Single-threaded discrete-event core. Events run in strict (at, seq) order;
/// seq is the insertion counter, so equal timestamps dispatch FIFO.
class Engine {
 public:
  Engine() = default;
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  /// Throws std::logic_error if `at` precedes the current clock.
  EventId schedule(SimTime at, NodeId target, EventKind kind, std::function<void()> action);
  EventId schedule_in(SimTime delay, NodeId target, EventKind kind, std::function<void()> action) {
    return schedule(now_ + delay, target, kind, std::move(action));
  }

  /// Cancelling an already dispatched or unknown id is a no-op.
  void cancel(EventId id);

  /// Dispatches every event with at <= end, then sets the clock to `end`.
  RunSummary run_until(SimTime end);

  SimTime now() const { return now_; }
  /// Events still queued and not cancelled.
  std::size_t pending() const;
  std::uint64_t dispatched() const { return dispatched_; }

  /// Optional hook invoked before every dispatch (tests use it to audit ordering).
  void set_dispatch_observer(std::function<void(const Event&)> obs) { observer_ = std::move(obs); }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.at != b.at) return a.at > b.at;
      return a.seq > b.seq;
    }
  };

  std::vector<Event> heap_;
  std::unordered_set<EventId> cancelled_;
  SimTime now_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t dispatched_ = 0;
  std::function<void(const Event&)> observer_;
};

}  // namespace manet
