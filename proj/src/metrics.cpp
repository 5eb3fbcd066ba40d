#include "manet/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>
#include <vector>

namespace manet {

void MetricsAccumulator::record(const TraceRecord& rec) {
  if (rec.ptype != PacketType::Cbr) {
    if (rec.layer == Layer::Router && (rec.event == TraceEvent::Send || rec.event == TraceEvent::Forward)) {
      ++tally_.overhead;
      tally_.overhead_bytes += rec.size;
    }
    return;
  }
  auto& flow = flows_[{rec.flow_src, rec.flow_dst}];
  switch (rec.event) {
    case TraceEvent::Send:
      if (rec.layer == Layer::Agent) {
        ++tally_.generated;
        ++flow.generated;
        in_flight_.emplace(rec.uid, rec.time);
      }
      break;
    case TraceEvent::Receive:
      if (rec.layer == Layer::Agent) {
        if (auto it = in_flight_.find(rec.uid); it != in_flight_.end()) {
          ++tally_.delivered;
          ++flow.delivered;
          delay_sum_ns_ += (rec.time - it->second).ns();
          in_flight_.erase(it);
          finished_.emplace(rec.uid, true);
        } else if (finished_.contains(rec.uid)) {
          ++tally_.duplicate_outcomes;
        }
      }
      break;
    case TraceEvent::Drop:
      if (rec.layer == Layer::Router || rec.layer == Layer::Mac) {
        ++tally_.dropped;
        ++flow.dropped;
        if (in_flight_.erase(rec.uid) == 0) ++tally_.duplicate_outcomes;
        finished_.emplace(rec.uid, false);
      }
      break;
    case TraceEvent::Forward:
      break;
  }
}

MetricsReport MetricsAccumulator::report() const {
  MetricsReport r = tally_;
  if (r.generated > 0) r.throughput = static_cast<double>(r.delivered) / static_cast<double>(r.generated);
  if (r.delivered > 0) {
    r.avg_delay_s = static_cast<double>(delay_sum_ns_) * 1e-9 / static_cast<double>(r.delivered);
  }
  return r;
}

MetricsReport compute_metrics(std::span<const TraceRecord> trace) {
  MetricsAccumulator acc;
  for (const auto& rec : trace) acc.record(rec);
  return acc.report();
}

MetricsReport compute_metrics(std::istream& in) {
  MetricsAccumulator acc;
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      acc.record(parse_trace_line(line));
    } catch (const TraceParseError& e) {
      throw TraceParseError(e.field(), "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return acc.report();
}

double throughput(std::span<const TraceRecord> trace) {
  const auto r = compute_metrics(trace);
  if (!r.throughput) throw MetricError("throughput undefined: no data packets were generated");
  return *r.throughput;
}

double average_delay(std::span<const TraceRecord> trace) {
  const auto r = compute_metrics(trace);
  if (!r.avg_delay_s) throw MetricError("average delay undefined: no data packets were delivered");
  return *r.avg_delay_s;
}

std::uint64_t dropped_packets(std::span<const TraceRecord> trace) { return compute_metrics(trace).dropped; }

std::uint64_t routing_overhead(std::span<const TraceRecord> trace) { return compute_metrics(trace).overhead; }

namespace {
std::string fmt_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}
}  // namespace

std::string format_metrics_row(const RunKey& key, const MetricsReport& r) {
  std::ostringstream os;
  os << key.protocol << ',' << key.nodes << ',' << fmt_number(key.pause) << ',' << fmt_number(key.speed) << ','
     << key.seed << ',' << (r.throughput ? fmt_number(*r.throughput) : "nan") << ','
     << (r.avg_delay_s ? fmt_number(*r.avg_delay_s) : "nan") << ',' << r.dropped << ',' << r.overhead << ','
     << r.generated << ',' << r.delivered;
  return os.str();
}

MetricsRow parse_metrics_row(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) f.push_back(cell);
  if (f.size() != 11) throw std::runtime_error("metrics row must have 11 columns: " + line);
  MetricsRow row;
  try {
    row.key.protocol = f[0];
    row.key.nodes = std::stoi(f[1]);
    row.key.pause = std::stod(f[2]);
    row.key.speed = std::stod(f[3]);
    row.key.seed = std::stoull(f[4]);
    if (f[5] != "nan") row.report.throughput = std::stod(f[5]);
    if (f[6] != "nan") row.report.avg_delay_s = std::stod(f[6]);
    row.report.dropped = std::stoull(f[7]);
    row.report.overhead = std::stoull(f[8]);
    row.report.generated = std::stoull(f[9]);
    row.report.delivered = std::stoull(f[10]);
  } catch (const std::logic_error&) {
    throw std::runtime_error("malformed metrics row: " + line);
  }
  return row;
}

}  // namespace manet
