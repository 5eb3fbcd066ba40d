#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "manet/metrics.hpp"
#include "manet/simulation.hpp"
#include "manet/trace.hpp"

namespace manet {

/// Rebuilds each data packet's hop sequence from the trace (source AGT
/// send, RTR forwards, destination AGT receive) and flags any delivered
/// packet whose sequence visits a node twice.
class LoopAuditor final : public TraceSink {
 public:
  void record(const TraceRecord& rec) override;
  std::uint64_t checked() const { return checked_; }
  std::uint64_t violations() const { return violations_; }

 private:
  std::unordered_map<PacketUid, std::vector<NodeId>> paths_;
  std::uint64_t checked_ = 0;
  std::uint64_t violations_ = 0;
};

/// AODV forwarding invariant: along a packet's path the forwarding nodes'
/// routes to the destination strictly improve in (dest_seq, -hops). The
/// chain restarts whenever the source itself (re)sends the packet.
class MonotonicityAuditor {
 public:
  void observe(const ForwardStep& step);
  std::uint64_t steps() const { return steps_; }
  std::uint64_t violations() const { return violations_; }

 private:
  std::unordered_map<PacketUid, RouteSnapshot> last_;
  std::uint64_t steps_ = 0;
  std::uint64_t violations_ = 0;
};

/// Spearman rank correlation with average ranks for ties. Empty when
/// either series is constant or the lengths differ.
std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y);

struct Series {
  std::vector<double> values;
  double mean() const;
  double min() const;
  double max() const;
};

struct CellSummary {
  Series throughput;
  Series avg_delay;
  Series dropped;
  Series overhead;
};

struct CellId {
  int nodes = 0;
  double pause = 0;
  double speed = 0;
  auto operator<=>(const CellId&) const = default;
};

/// Per-cell, per-protocol seed statistics.
using CellTable = std::map<CellId, std::map<std::string, CellSummary>>;
CellTable summarize(const std::vector<MetricsRow>& rows);

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

/// The six trend criteria over cell means. Cells missing a protocol count
/// as failures for the criteria that need it.
std::vector<CriterionResult> evaluate_trends(const std::vector<MetricsRow>& rows);

}  // namespace manet
