#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "manet/engine.hpp"
#include "manet/random.hpp"

namespace manet {

/// One constant-bit-rate flow.
struct Connection {
  NodeId src = 0;
  NodeId dst = 0;
  SimTime start;
  double rate_pps = 4.0;
  std::uint32_t payload = 512;

  /// Exact inter-emission gap, rounded to the nanosecond.
  SimTime gap() const { return SimTime::from_seconds(1.0 / rate_pps); }
};

struct TrafficPlan {
  std::vector<Connection> connections;
};

struct TrafficParams {
  int nodes = 0;
  int max_connections = 20;
  double duration_s = 150.0;
  double rate_pps = 4.0;
  std::uint32_t payload = 512;
  double start_window_s = 50.0;
};

/// Connection count used for a scenario of `nodes` nodes: 20 up to 30
/// nodes, 40 above.
int connections_for_nodes(int nodes);

/// Distinct (src, dst) pairs, src != dst, drawn uniformly; start times
/// uniform over the start window (rounded to microseconds). The count is
/// min(max_connections, nodes * (nodes - 1)). Sorted by start time.
/// Throws std::invalid_argument for nodes < 2 or max_connections < 1.
TrafficPlan generate_traffic_plan(const TrafficParams& params, RandomStream& stream);

/// Emission schedule of a single CBR flow.
class FlowEmitter {
 public:
  explicit FlowEmitter(const Connection& conn) : conn_(&conn) {}

  SimTime next_time() const { return conn_->start + conn_->gap() * static_cast<std::int64_t>(emitted_); }
  /// Flow sequence number of the packet due at next_time(); advances the schedule.
  std::uint32_t emit() { return emitted_++; }
  std::uint32_t emitted() const { return emitted_; }

 private:
  const Connection* conn_;
  std::uint32_t emitted_ = 0;
};

/// Packets a flow emits strictly before `end`.
std::uint64_t expected_emissions(const Connection& conn, SimTime end);

/// Traffic file: `conn <src> <dst> start <t> rate <pps> size <bytes>`,
/// ordered by start time, floats with 6 decimals.
void write_traffic_file(std::ostream& out, const TrafficPlan& plan);
TrafficPlan read_traffic_file(std::istream& in);

}  // namespace manet
