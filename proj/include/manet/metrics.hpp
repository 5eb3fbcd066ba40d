#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>

#include "manet/trace.hpp"

namespace manet {

/// Raised when a metric is undefined for the given trace (nothing generated
/// or nothing delivered).
class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FlowTally {
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
};

struct MetricsReport {
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t overhead = 0;
  /// delivered / generated; empty when nothing was generated.
  std::optional<double> throughput;
  /// Mean end-to-end delay of delivered packets; empty when none arrived.
  std::optional<double> avg_delay_s;
  /// Bytes of routing transmissions (supplementary; not one of the four metrics).
  std::uint64_t overhead_bytes = 0;
  /// Data uids that reached a second terminal outcome (delivered twice,
  /// dropped after delivery, ...). Always zero for a sound simulator.
  std::uint64_t duplicate_outcomes = 0;

  std::uint64_t residual() const { return generated - delivered - dropped; }
};

/// One-pass metric computation over a trace stream:
///  - generated: `s` AGT cbr records
///  - delivered: first `r` AGT cbr record per generated uid
///  - dropped:   `d` cbr records at RTR or MAC
///  - overhead:  `s` and `f` RTR records of routing packet types, per hop
class MetricsAccumulator final : public TraceSink {
 public:
  void record(const TraceRecord& rec) override;
  MetricsReport report() const;
  const std::map<std::pair<NodeId, NodeId>, FlowTally>& flows() const { return flows_; }

 private:
  std::unordered_map<PacketUid, SimTime> in_flight_;
  std::unordered_map<PacketUid, bool> finished_;
  std::map<std::pair<NodeId, NodeId>, FlowTally> flows_;
  MetricsReport tally_;
  std::int64_t delay_sum_ns_ = 0;
};

MetricsReport compute_metrics(std::span<const TraceRecord> trace);
/// Parses and accumulates line by line; TraceParseError carries the line number.
MetricsReport compute_metrics(std::istream& trace);

/// Throws MetricError when nothing was generated.
double throughput(std::span<const TraceRecord> trace);
/// Throws MetricError when nothing was delivered.
double average_delay(std::span<const TraceRecord> trace);
std::uint64_t dropped_packets(std::span<const TraceRecord> trace);
std::uint64_t routing_overhead(std::span<const TraceRecord> trace);

struct RunKey {
  std::string protocol;
  int nodes = 0;
  double pause = 0;
  double speed = 0;
  std::uint64_t seed = 0;
};

inline constexpr const char* kMetricsCsvHeader =
    "protocol,nodes,pause,speed,seed,throughput,avg_delay_s,dropped,overhead,generated,delivered";

std::string format_metrics_row(const RunKey& key, const MetricsReport& report);

struct MetricsRow {
  RunKey key;
  MetricsReport report;
};

/// Parses one CSV data row produced by format_metrics_row.
MetricsRow parse_metrics_row(const std::string& line);

}  // namespace manet
