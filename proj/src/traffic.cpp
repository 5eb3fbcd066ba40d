#include "manet/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

namespace manet {

int connections_for_nodes(int nodes) { return nodes <= 30 ? 20 : 40; }

TrafficPlan generate_traffic_plan(const TrafficParams& p, RandomStream& stream) {
  if (p.nodes < 2) throw std::invalid_argument("traffic: at least two nodes are required");
  if (p.max_connections < 1) throw std::invalid_argument("traffic: max_connections must be >= 1");
  if (!(p.rate_pps > 0.0)) throw std::invalid_argument("traffic: rate must be positive");
  if (p.start_window_s < 0.0) throw std::invalid_argument("traffic: start window must be >= 0");

  const auto n = static_cast<std::uint64_t>(p.nodes);
  const std::uint64_t count = std::min<std::uint64_t>(static_cast<std::uint64_t>(p.max_connections), n * (n - 1));

  TrafficPlan plan;
  std::set<std::pair<NodeId, NodeId>> used;
  while (plan.connections.size() < count) {
    const auto src = static_cast<NodeId>(stream.below(n));
    auto dst = static_cast<NodeId>(stream.below(n - 1));
    if (dst >= src) ++dst;
    if (!used.emplace(src, dst).second) continue;
    Connection c;
    c.src = src;
    c.dst = dst;
    const double start = p.start_window_s > 0.0 ? stream.uniform(0.0, p.start_window_s) : 0.0;
    c.start = microseconds(std::llround(start * 1e6));
    c.rate_pps = p.rate_pps;
    c.payload = p.payload;
    plan.connections.push_back(c);
  }
  std::stable_sort(plan.connections.begin(), plan.connections.end(), [](const Connection& a, const Connection& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.src != b.src) return a.src < b.src;
    return a.dst < b.dst;
  });
  return plan;
}

std::uint64_t expected_emissions(const Connection& conn, SimTime end) {
  if (end <= conn.start) return 0;
  const std::int64_t span = (end - conn.start).ns();
  const std::int64_t gap = conn.gap().ns();
  return static_cast<std::uint64_t>((span + gap - 1) / gap);
}

void write_traffic_file(std::ostream& out, const TrafficPlan& plan) {
  char buf[160];
  for (const Connection& c : plan.connections) {
    const std::int64_t us = c.start.ns() / 1000;
    std::snprintf(buf, sizeof buf, "conn %d %d start %lld.%06lld rate %.6f size %u\n", c.src, c.dst,
                  static_cast<long long>(us / 1000000), static_cast<long long>(us % 1000000), c.rate_pps, c.payload);
    out << buf;
  }
}

TrafficPlan read_traffic_file(std::istream& in) {
  TrafficPlan plan;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string kw, start_kw, rate_kw, size_kw;
    Connection c;
    double start = 0;
    if (!(ss >> kw >> c.src >> c.dst >> start_kw >> start >> rate_kw >> c.rate_pps >> size_kw >> c.payload) ||
        kw != "conn" || start_kw != "start" || rate_kw != "rate" || size_kw != "size") {
      throw std::runtime_error("traffic file line " + std::to_string(lineno) +
                               ": expected 'conn <src> <dst> start <t> rate <pps> size <bytes>'");
    }
    if (c.src == c.dst || c.src < 0 || c.dst < 0) {
      throw std::runtime_error("traffic file line " + std::to_string(lineno) + ": invalid endpoints");
    }
    c.start = SimTime::from_seconds(start);
    plan.connections.push_back(c);
  }
  return plan;
}

}  // namespace manet
