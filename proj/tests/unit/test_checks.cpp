#include <gtest/gtest.h>

#include <cmath>

#include "manet/checks.hpp"
#include "manet/harness.hpp"

using namespace manet;

namespace {

TraceRecord data_rec(TraceEvent e, NodeId node, Layer layer, PacketUid uid) {
  TraceRecord r;
  r.event = e;
  r.node = node;
  r.layer = layer;
  r.uid = uid;
  r.ptype = PacketType::Cbr;
  r.size = 512;
  return r;
}

void feed_path(LoopAuditor& a, PacketUid uid, const std::vector<NodeId>& hops, bool delivered = true) {
  a.record(data_rec(TraceEvent::Send, hops.front(), Layer::Agent, uid));
  for (std::size_t i = 1; i + 1 < hops.size(); ++i) a.record(data_rec(TraceEvent::Forward, hops[i], Layer::Router, uid));
  if (delivered) a.record(data_rec(TraceEvent::Receive, hops.back(), Layer::Agent, uid));
}

MetricsRow row(const std::string& proto, const MatrixCell& c, double thr, double delay, double dropped, double overhead) {
  MetricsRow r;
  r.key = {proto, c.nodes, c.pause_s, c.speed_max, 0};
  r.report.generated = 1000;
  r.report.delivered = static_cast<std::uint64_t>(thr * 1000);
  r.report.throughput = thr;
  r.report.avg_delay_s = delay;
  r.report.dropped = static_cast<std::uint64_t>(dropped);
  r.report.overhead = static_cast<std::uint64_t>(overhead);
  return r;
}

}  // namespace

TEST(Spearman, KnownValues) {
  EXPECT_DOUBLE_EQ(*spearman({1, 2, 3, 4, 5}, {2, 4, 6, 8, 10}), 1.0);
  EXPECT_DOUBLE_EQ(*spearman({1, 2, 3, 4, 5}, {5, 4, 3, 2, 1}), -1.0);
  // Ranks with a tie: y ranks 1, 2.5, 2.5, 4, 5.
  EXPECT_NEAR(*spearman({1, 2, 3, 4, 5}, {1, 3, 3, 4, 9}), 0.9746794344808963, 1e-12);
  EXPECT_NEAR(*spearman({10, 20, 30, 40, 50}, {3, 1, 2, 5, 4}), 0.6, 1e-12);
  EXPECT_FALSE(spearman({1, 2, 3}, {4, 4, 4}));
  EXPECT_FALSE(spearman({1, 2, 3}, {1, 2}));
  EXPECT_FALSE(spearman({1}, {1}));
}

TEST(LoopAuditor, FlagsRevisitedNodesOnDeliveredPackets) {
  LoopAuditor a;
  feed_path(a, 1, {0, 1, 2, 3});
  feed_path(a, 2, {0, 1, 0, 2});
  feed_path(a, 3, {4, 5, 4, 6}, false);
  EXPECT_EQ(a.checked(), 2u);
  EXPECT_EQ(a.violations(), 1u);
}

TEST(MonotonicityAuditor, RequiresStrictImprovement) {
  Packet pkt;
  pkt.uid = 9;
  pkt.src = 0;
  pkt.dst = 5;
  MonotonicityAuditor m;
  m.observe({0, 1, pkt, RouteSnapshot{10, 3}});
  m.observe({1, 2, pkt, RouteSnapshot{10, 2}});
  m.observe({2, 3, pkt, RouteSnapshot{12, 4}});
  EXPECT_EQ(m.violations(), 0u);
  m.observe({3, 4, pkt, RouteSnapshot{12, 4}});
  EXPECT_EQ(m.violations(), 1u);
  // The source resending restarts the chain.
  m.observe({0, 1, pkt, RouteSnapshot{11, 3}});
  m.observe({1, 2, pkt, RouteSnapshot{11, 2}});
  EXPECT_EQ(m.violations(), 1u);
  // Steps taken at the source are not audited.
  EXPECT_EQ(m.steps(), 4u);
}

TEST(Summaries, SeriesStatistics) {
  Series s{{1, 4, 7}};
  EXPECT_DOUBLE_EQ(s.mean(), 4);
  EXPECT_DOUBLE_EQ(s.min(), 1);
  EXPECT_DOUBLE_EQ(s.max(), 7);
}

// A synthetic matrix built to satisfy every trend passes; flipping one
// relation fails exactly that criterion.
TEST(Trends, SyntheticMatrix) {
  std::vector<MetricsRow> rows;
  for (const auto& c : matrix_cells()) {
    const double n = c.nodes;
    rows.push_back(row("aodv", c, 0.95, 0.05, 20, 100 * n));
    rows.push_back(row("dsr", c, 0.90, 0.08, 15, 20 * n));
    rows.push_back(row("dsdv", c, 0.85, 0.01, 40, 30 * n));
    rows.push_back(row("zrp", c, 0.80, 0.06, 25, 120 * n));
  }
  auto results = evaluate_trends(rows);
  ASSERT_EQ(results.size(), 6u);
  for (const auto& r : results) EXPECT_TRUE(r.pass) << r.id << " " << r.detail;

  for (auto& r : rows) {
    if (r.key.protocol == "dsr") r.report.dropped = 30;
  }
  results = evaluate_trends(rows);
  EXPECT_FALSE(results[5].pass);
  EXPECT_TRUE(results[1].pass);
  EXPECT_TRUE(results[0].pass);
}

TEST(Trends, OverheadCorrelationUsesEveryRow) {
  std::vector<MetricsRow> rows;
  for (const auto& c : matrix_cells()) {
    const double n = c.nodes;
    // ZRP overhead falls with n in one row only.
    const bool odd_row = !c.speed_sweep && c.pause_s == 100;
    rows.push_back(row("aodv", c, 0.95, 0.05, 20, 100 * n));
    rows.push_back(row("dsr", c, 0.90, 0.08, 15, 20 * n));
    rows.push_back(row("dsdv", c, 0.85, 0.01, 40, 30 * n));
    rows.push_back(row("zrp", c, 0.80, 0.06, 25, odd_row ? 10000 - 100 * n : 120 * n));
  }
  const auto results = evaluate_trends(rows);
  EXPECT_FALSE(results[3].pass);
  EXPECT_NE(results[3].detail.find("zrp"), std::string::npos) << results[3].detail;
}

TEST(Trends, MissingProtocolCountsAgainst) {
  std::vector<MetricsRow> rows;
  for (const auto& c : matrix_cells()) rows.push_back(row("aodv", c, 0.95, 0.05, 20, 100.0 * c.nodes));
  const auto results = evaluate_trends(rows);
  EXPECT_FALSE(results[1].pass);
  EXPECT_FALSE(results[4].pass);
}
