#include <gtest/gtest.h>

#include <sstream>

#include "manet/metrics.hpp"
#include "manet/random.hpp"
#include "manet/trace.hpp"

using namespace manet;

namespace {

TraceRecord rec(TraceEvent e, double t, NodeId node, Layer layer, PacketUid uid, PacketType type = PacketType::Cbr,
                std::optional<DropReason> reason = std::nullopt) {
  TraceRecord r;
  r.event = e;
  r.time = SimTime::from_seconds(t);
  r.node = node;
  r.layer = layer;
  r.uid = uid;
  r.ptype = type;
  r.size = type == PacketType::Cbr ? 512 : 44;
  r.flow_src = 0;
  r.flow_dst = type == PacketType::Cbr ? 1 : kBroadcast;
  r.reason = reason;
  return r;
}

std::vector<TraceRecord> sends_and_receives(int sent, int received) {
  std::vector<TraceRecord> t;
  for (int i = 0; i < sent; ++i) t.push_back(rec(TraceEvent::Send, i, 0, Layer::Agent, i));
  for (int i = 0; i < received; ++i) t.push_back(rec(TraceEvent::Receive, i + 0.5, 1, Layer::Agent, i));
  return t;
}

}  // namespace

TEST(TraceParse, SendRecord) {
  const auto r = parse_trace_line("s 10.250000000 3 AGT 42 cbr 512 3 7 -");
  EXPECT_EQ(r.event, TraceEvent::Send);
  EXPECT_EQ(r.time, SimTime::from_seconds(10.25));
  EXPECT_EQ(r.node, 3);
  EXPECT_EQ(r.layer, Layer::Agent);
  EXPECT_EQ(r.uid, 42u);
  EXPECT_EQ(r.ptype, PacketType::Cbr);
  EXPECT_EQ(r.size, 512u);
  EXPECT_EQ(r.flow_src, 3);
  EXPECT_EQ(r.flow_dst, 7);
  EXPECT_FALSE(r.reason);
}

TEST(TraceParse, DropRecordCarriesReason) {
  const auto r = parse_trace_line("d 11.000000000 5 RTR 42 cbr 512 3 7 NRTE");
  EXPECT_EQ(r.event, TraceEvent::Drop);
  EXPECT_EQ(r.reason, DropReason::NoRoute);
}

TEST(TraceParse, WrongDecimalsIsAnErrorNamingTheField) {
  try {
    parse_trace_line("s 10.0 3 AGT 42 cbr 512 3 7 -");
    FAIL();
  } catch (const TraceParseError& e) {
    EXPECT_EQ(e.field(), "time");
  }
}

TEST(TraceParse, OtherMalformedFields) {
  EXPECT_THROW(parse_trace_line("x 1.000000000 3 AGT 42 cbr 512 3 7 -"), TraceParseError);
  EXPECT_THROW(parse_trace_line("s 1.000000000 3 APP 42 cbr 512 3 7 -"), TraceParseError);
  EXPECT_THROW(parse_trace_line("s 1.000000000 3 AGT 42 foo 512 3 7 -"), TraceParseError);
  EXPECT_THROW(parse_trace_line("d 1.000000000 3 RTR 42 cbr 512 3 7 -"), TraceParseError);
  EXPECT_THROW(parse_trace_line("d 1.000000000 3 RTR 42 cbr 512 3 7 OOPS"), TraceParseError);
  EXPECT_THROW(parse_trace_line("s 1.000000000 3 AGT 42 cbr 512 3 7"), TraceParseError);
  EXPECT_THROW(parse_trace_line("s 1.000000000 3 AGT 42 cbr 512 3 7 - extra"), TraceParseError);
}

TEST(TraceParse, RoundTripEveryTagAndReason) {
  const std::vector<std::string> lines = {
      "s 0.000000001 0 AGT 0 cbr 512 0 1 -",
      "f 1.500000000 4 RTR 9 cbr 532 0 1 -",
      "r 2.000000000 1 AGT 9 cbr 512 0 1 -",
      "s 3.000000000 2 RTR 10 aodv:rreq 44 2 -1 -",
      "s 3.000000000 2 RTR 11 aodv:rrep 40 2 5 -",
      "s 3.000000000 2 RTR 12 aodv:rerr 32 2 -1 -",
      "s 3.000000000 2 RTR 13 aodv:hello 40 2 -1 -",
      "s 3.000000000 2 RTR 14 dsdv 60 2 -1 -",
      "f 3.000000000 2 RTR 15 dsr:rreq 48 1 -1 -",
      "f 3.000000000 2 RTR 16 dsr:rrep 48 1 3 -",
      "f 3.000000000 2 RTR 17 dsr:rerr 48 1 3 -",
      "s 3.000000000 2 RTR 18 zrp:beacon 28 2 -1 -",
      "s 3.000000000 2 RTR 19 zrp:iarp 40 2 -1 -",
      "s 3.000000000 2 RTR 20 zrp:ierp_q 60 2 7 -",
      "s 3.000000000 2 RTR 21 zrp:ierp_r 60 2 7 -",
      "s 3.000000000 2 RTR 22 zrp:ierp_e 36 2 7 -",
      "d 4.000000000 2 RTR 1 cbr 512 0 1 IFQ-SB",
      "d 4.000000000 2 MAC 1 cbr 512 0 1 IFQ",
      "d 4.000000000 2 RTR 1 cbr 512 0 1 TTL",
      "d 4.000000000 2 RTR 1 cbr 512 0 1 CBK",
      "d 4.000000000 2 MAC 1 aodv:rreq 44 0 -1 COL",
      "d 4.000000000 2 RTR 1 cbr 512 0 1 TOUT",
  };
  for (const auto& l : lines) EXPECT_EQ(format(parse_trace_line(l)), l);
}

TEST(Throughput, RatioOfReceivesToSends) {
  EXPECT_DOUBLE_EQ(throughput(sends_and_receives(100, 95)), 0.95);
  EXPECT_DOUBLE_EQ(throughput(sends_and_receives(10, 10)), 1.0);
  EXPECT_THROW(throughput(sends_and_receives(0, 0)), MetricError);
}

TEST(AverageDelay, MeanOverDeliveredPackets) {
  std::vector<TraceRecord> t = {
      rec(TraceEvent::Send, 1.0, 0, Layer::Agent, 1),  rec(TraceEvent::Send, 2.0, 0, Layer::Agent, 2),
      rec(TraceEvent::Send, 3.0, 0, Layer::Agent, 3),  rec(TraceEvent::Receive, 1.010, 1, Layer::Agent, 1),
      rec(TraceEvent::Receive, 2.020, 1, Layer::Agent, 2),
  };
  EXPECT_NEAR(average_delay(t), 0.015, 1e-12);
  std::vector<TraceRecord> one = {rec(TraceEvent::Send, 10.0, 0, Layer::Agent, 1),
                                  rec(TraceEvent::Receive, 10.1, 1, Layer::Agent, 1)};
  EXPECT_NEAR(average_delay(one), 0.1, 1e-12);
  EXPECT_THROW(average_delay(sends_and_receives(3, 0)), MetricError);
}

TEST(DroppedPackets, CountsDataDropsAtRouterAndMac) {
  EXPECT_EQ(dropped_packets({}), 0u);
  std::vector<TraceRecord> t;
  for (int i = 0; i < 5; ++i) t.push_back(rec(TraceEvent::Drop, 1, 2, Layer::Router, i, PacketType::Cbr, DropReason::NoRoute));
  for (int i = 5; i < 8; ++i) t.push_back(rec(TraceEvent::Drop, 1, 2, Layer::Mac, i, PacketType::Cbr, DropReason::Ifq));
  t.push_back(rec(TraceEvent::Drop, 1, 2, Layer::Mac, 99, PacketType::AodvRreq, DropReason::Collision));
  EXPECT_EQ(dropped_packets(t), 8u);
}

TEST(RoutingOverhead, EveryHopwiseTransmissionCounts) {
  // One RREQ flooded over 5 connected nodes: the originator sends, the other
  // four rebroadcast once each.
  std::vector<TraceRecord> t = {rec(TraceEvent::Send, 1, 0, Layer::Router, 7, PacketType::AodvRreq)};
  for (NodeId n = 1; n <= 4; ++n) t.push_back(rec(TraceEvent::Forward, 1 + n * 0.01, n, Layer::Router, 7, PacketType::AodvRreq));
  // Receptions, MAC drops and data forwards are not overhead.
  t.push_back(rec(TraceEvent::Drop, 1.2, 3, Layer::Mac, 7, PacketType::AodvRreq, DropReason::Collision));
  t.push_back(rec(TraceEvent::Forward, 1.3, 2, Layer::Router, 8));
  EXPECT_EQ(routing_overhead(t), 5u);
}

TEST(MetricsAccumulator, StreamingMatchesSpanFunctions) {
  auto t = sends_and_receives(20, 12);
  t.push_back(rec(TraceEvent::Drop, 30, 2, Layer::Router, 15, PacketType::Cbr, DropReason::Callback));
  const auto r = compute_metrics(t);
  EXPECT_EQ(r.generated, 20u);
  EXPECT_EQ(r.delivered, 12u);
  EXPECT_EQ(r.dropped, 1u);
  EXPECT_EQ(r.residual(), 7u);
  EXPECT_DOUBLE_EQ(*r.throughput, throughput(t));
  EXPECT_DOUBLE_EQ(*r.avg_delay_s, average_delay(t));

  std::ostringstream text;
  for (const auto& x : t) text << format(x) << '\n';
  std::istringstream in(text.str());
  const auto r2 = compute_metrics(in);
  EXPECT_EQ(r2.generated, r.generated);
  EXPECT_EQ(r2.delivered, r.delivered);
  EXPECT_EQ(*r2.avg_delay_s, *r.avg_delay_s);
}

TEST(MetricsAccumulator, ParseErrorsCarryLineNumber) {
  std::istringstream in("s 1.000000000 0 AGT 1 cbr 512 0 1 -\ns 2.0 0 AGT 2 cbr 512 0 1 -\n");
  try {
    compute_metrics(in);
    FAIL();
  } catch (const TraceParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

// Injecting drop records can only lower throughput and raise the drop count.
TEST(MetricsProperty, InjectedDropsAreMonotone) {
  RandomStream rng(4, StreamLabel::Protocol);
  for (int trial = 0; trial < 50; ++trial) {
    const int sent = 5 + static_cast<int>(rng.below(50));
    const int recv = static_cast<int>(rng.below(static_cast<std::uint64_t>(sent) + 1));
    auto t = sends_and_receives(sent, recv);
    const auto before = compute_metrics(t);
    // Drop some of the undelivered packets.
    for (int i = recv; i < sent; ++i) {
      if (rng.below(2)) t.push_back(rec(TraceEvent::Drop, 200, 3, Layer::Router, i, PacketType::Cbr, DropReason::Timeout));
    }
    const auto after = compute_metrics(t);
    EXPECT_LE(after.throughput.value_or(0), before.throughput.value_or(0));
    EXPECT_GE(after.dropped, before.dropped);
    EXPECT_EQ(after.generated, after.delivered + after.dropped + after.residual());
  }
}

TEST(MetricsCsv, RowFormatAndParse) {
  RunKey k{"aodv", 20, 10, 2, 7};
  MetricsReport r;
  r.generated = 100;
  r.delivered = 95;
  r.dropped = 3;
  r.overhead = 1234;
  r.throughput = 0.95;
  r.avg_delay_s = 0.0125;
  const std::string line = format_metrics_row(k, r);
  EXPECT_EQ(line, "aodv,20,10,2,7,0.95,0.0125,3,1234,100,95");
  const auto back = parse_metrics_row(line);
  EXPECT_EQ(back.key.protocol, "aodv");
  EXPECT_EQ(back.report.delivered, 95u);
  EXPECT_DOUBLE_EQ(*back.report.throughput, 0.95);
  EXPECT_THROW(parse_metrics_row("aodv,20"), std::runtime_error);
  EXPECT_EQ(std::string(kMetricsCsvHeader),
            "protocol,nodes,pause,speed,seed,throughput,avg_delay_s,dropped,overhead,generated,delivered");
}

TEST(TraceWriter, DigestCoversExactBytes) {
  std::ostringstream out;
  TraceWriter w(&out);
  w.record(parse_trace_line("s 1.000000000 0 AGT 1 cbr 512 0 1 -"));
  EXPECT_EQ(out.str(), "s 1.000000000 0 AGT 1 cbr 512 0 1 -\n");
  EXPECT_EQ(w.digest_hex(), sha256_hex(out.str()));
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
