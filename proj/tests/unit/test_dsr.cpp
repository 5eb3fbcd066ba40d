#include <gtest/gtest.h>

#include "manet/dsr.hpp"
#include "manet/harness.hpp"
#include "manet/simulation.hpp"
#include "support.hpp"

using namespace manet;

namespace {

using Route = std::vector<NodeId>;

Packet source_routed(PacketType type, Route route, std::uint32_t index, RoutingMessage msg = {}) {
  Packet p;
  p.uid = 300;
  p.type = type;
  p.src = route.front();
  p.dst = route.back();
  p.ttl = 32;
  p.route = std::move(route);
  p.route_index = index;
  if (type != PacketType::Cbr) p.message = make_message(std::move(msg));
  return p;
}

Packet rreq(NodeId originator, std::uint32_t id, NodeId target, Route record) {
  Packet p;
  p.uid = 400 + id;
  p.type = PacketType::DsrRreq;
  p.src = originator;
  p.dst = kBroadcast;
  p.ttl = 32;
  p.message = make_message(DsrRreq{originator, id, target, std::move(record)});
  return p;
}

}  // namespace

TEST(RouteCache, FindsShortestPrefix) {
  RouteCache c(0, 64, seconds(300));
  c.add({0, 1, 2, 3}, {});
  c.add({0, 4, 3}, {});
  EXPECT_EQ(c.find(2, {}), (Route{0, 1, 2}));
  EXPECT_EQ(c.find(3, {}), (Route{0, 4, 3}));
  EXPECT_FALSE(c.find(5, {}));
  EXPECT_FALSE(c.find(0, {}));
}

TEST(RouteCache, RejectsForeignLoopingAndTrivialRoutes) {
  RouteCache c(0, 64, seconds(300));
  c.add({1, 2, 3}, {});
  c.add({0, 1, 0, 2}, {});
  c.add({0}, {});
  EXPECT_TRUE(c.entries().empty());
}

TEST(RouteCache, ExpiredRoutesAreMisses) {
  RouteCache c(0, 64, seconds(300));
  c.add({0, 1, 2}, {});
  EXPECT_TRUE(c.find(2, seconds(300)));
  EXPECT_FALSE(c.find(2, seconds(301)));
  // Re-adding refreshes.
  c.add({0, 1, 2}, seconds(301));
  EXPECT_TRUE(c.find(2, seconds(400)));
  EXPECT_EQ(c.entries().size(), 1u);
}

TEST(RouteCache, EvictsOldestAtCapacity) {
  RouteCache c(0, 3, seconds(300));
  for (NodeId d = 1; d <= 4; ++d) c.add({0, d}, {});
  ASSERT_EQ(c.entries().size(), 3u);
  EXPECT_FALSE(c.find(1, {}));
  EXPECT_TRUE(c.find(4, {}));
}

TEST(RouteCache, RemoveLinkIsDirected) {
  RouteCache c(0, 64, seconds(300));
  c.add({0, 1, 2, 3}, {});
  c.add({0, 2, 1}, {});
  c.add({0, 4}, {});
  c.remove_link(1, 2);
  ASSERT_EQ(c.entries().size(), 2u);
  EXPECT_EQ(c.find(1, {}), (Route{0, 2, 1}));
  EXPECT_FALSE(c.find(3, {}));
}

TEST(DsrSend, CacheHitStampsTheRoute) {
  support::FakeContext ctx(0, 3);
  DsrAgent a(ctx, {});
  // A reply delivered to 0 seeds the cache with [0,1,2].
  a.on_packet_from_net(source_routed(PacketType::DsrRrep, {2, 1, 0}, 1, DsrRrep{{0, 1, 2}}), 1);
  ASSERT_EQ(a.cache().find(2, {}), (Route{0, 1, 2}));
  EXPECT_EQ(a.on_data_from_app(support::data_packet(0, 2)), DispatchOutcome::Forwarded);
  ASSERT_EQ(ctx.sent.size(), 1u);
  EXPECT_EQ(ctx.sent[0].pkt.route, (Route{0, 1, 2}));
  EXPECT_EQ(ctx.sent[0].pkt.route_index, 0u);
  EXPECT_EQ(ctx.sent[0].next_hop, 1);
  EXPECT_EQ(ctx.sent[0].pkt.size, 512u + 12u);
}

TEST(DsrSend, MissBroadcastsRequestWithOwnRecord) {
  support::FakeContext ctx(0, 3);
  DsrAgent a(ctx, {});
  EXPECT_EQ(a.on_data_from_app(support::data_packet(0, 2)), DispatchOutcome::Buffered);
  ASSERT_EQ(ctx.sent.size(), 1u);
  EXPECT_EQ(ctx.sent[0].next_hop, kBroadcast);
  const auto& q = ctx.sent[0].pkt.as<DsrRreq>();
  EXPECT_EQ(q.record, (Route{0}));
  EXPECT_EQ(q.target, 2);
  // Unanswered requests back off: 0.5 s, 1 s, 2 s, ...
  ctx.engine.run_until(SimTime::from_seconds(3.6));
  EXPECT_EQ(ctx.sent.size(), 4u);
}

TEST(DsrRequest, TargetRepliesAlongReversedRecord) {
  support::FakeContext ctx(3, 4);
  DsrAgent a(ctx, {});
  a.on_packet_from_net(rreq(0, 1, 3, {0, 1, 2}), 2);
  ASSERT_EQ(ctx.sent.size(), 1u);
  const auto& p = ctx.sent[0].pkt;
  EXPECT_EQ(p.type, PacketType::DsrRrep);
  EXPECT_EQ(p.route, (Route{3, 2, 1, 0}));
  EXPECT_EQ(ctx.sent[0].next_hop, 2);
  EXPECT_EQ(p.as<DsrRrep>().route, (Route{0, 1, 2, 3}));
}

TEST(DsrRequest, RelayAppendsItselfOnce) {
  support::FakeContext ctx(1, 4);
  DsrAgent a(ctx, {});
  a.on_packet_from_net(rreq(0, 1, 3, {0}), 0);
  a.on_packet_from_net(rreq(0, 1, 3, {0, 2}), 2);
  ctx.engine.run_until(seconds(1));
  ASSERT_EQ(ctx.sent.size(), 1u);
  EXPECT_EQ(ctx.sent[0].pkt.as<DsrRreq>().record, (Route{0, 1}));
}

TEST(DsrRequest, NodeAlreadyInRecordDiscards) {
  support::FakeContext ctx(1, 4);
  DsrAgent a(ctx, {});
  a.on_packet_from_net(rreq(0, 1, 3, {0, 1, 2}), 2);
  ctx.engine.run_until(seconds(1));
  EXPECT_TRUE(ctx.sent.empty());
}

TEST(DsrRequest, CachedRouteAnswersFromIntermediate) {
  support::FakeContext ctx(1, 5);
  DsrAgent a(ctx, {});
  // Forwarding data along [4,1,2,3] teaches node 1 the suffix [1,2,3].
  a.on_packet_from_net(source_routed(PacketType::Cbr, {4, 1, 2, 3}, 0), 4);
  ctx.sent.clear();
  a.on_packet_from_net(rreq(0, 1, 3, {0}), 0);
  ASSERT_EQ(ctx.sent.size(), 1u);
  EXPECT_EQ(ctx.sent[0].pkt.type, PacketType::DsrRrep);
  EXPECT_EQ(ctx.sent[0].pkt.as<DsrRrep>().route, (Route{0, 1, 2, 3}));
  EXPECT_EQ(ctx.sent[0].pkt.route, (Route{1, 0}));
}

TEST(DsrMaintenance, BreakMidRouteReportsToSourceAndPrunes) {
  // Route [0,1,2,3]; the link 2 -> 3 fails at node 2.
  support::FakeContext c2(2, 4);
  DsrAgent n2(c2, {});
  Packet data = source_routed(PacketType::Cbr, {0, 1, 2, 3}, 2);
  n2.on_link_break(3, data);
  ASSERT_EQ(c2.dropped.size(), 1u);
  EXPECT_EQ(c2.dropped[0].second, DropReason::Callback);
  ASSERT_EQ(c2.sent.size(), 1u);
  Packet err = c2.sent[0].pkt;
  EXPECT_EQ(err.type, PacketType::DsrRerr);
  EXPECT_EQ(err.route, (Route{2, 1, 0}));
  EXPECT_EQ(c2.sent[0].next_hop, 1);
  EXPECT_EQ(err.as<DsrRerr>().from, 2);
  EXPECT_EQ(err.as<DsrRerr>().to, 3);

  support::FakeContext c1(1, 4);
  DsrAgent n1(c1, {});
  n1.on_packet_from_net(source_routed(PacketType::Cbr, {0, 1, 2, 3}, 0), 0);
  ASSERT_TRUE(n1.cache().find(3, {}));
  c1.sent.clear();
  n1.on_packet_from_net(err, 2);
  // Routes using 2 -> 3 are deleted whole; the reverse route survives.
  EXPECT_FALSE(n1.cache().find(3, {}));
  EXPECT_EQ(n1.cache().find(0, {}), (Route{1, 0}));
  ASSERT_EQ(c1.sent.size(), 1u);
  EXPECT_EQ(c1.sent[0].next_hop, 0);

  support::FakeContext c0(0, 4);
  DsrAgent n0(c0, {});
  n0.on_packet_from_net(source_routed(PacketType::DsrRrep, {3, 2, 1, 0}, 2, DsrRrep{{0, 1, 2, 3}}), 1);
  ASSERT_TRUE(n0.cache().find(3, {}));
  n0.on_packet_from_net(c1.sent[0].pkt, 1);
  EXPECT_FALSE(n0.cache().find(3, {}));
}

TEST(DsrMaintenance, BystanderCacheUnchanged) {
  support::FakeContext ctx(5, 8);
  DsrAgent a(ctx, {});
  a.on_packet_from_net(source_routed(PacketType::Cbr, {6, 5, 7}, 0), 6);
  const auto before = a.cache().entries().size();
  // An error for a link this node never used passes through untouched.
  a.on_packet_from_net(source_routed(PacketType::DsrRerr, {2, 5, 0}, 0, DsrRerr{2, 3}), 2);
  EXPECT_EQ(a.cache().entries().size(), before);
}

TEST(DsrMaintenance, SourceRetriesAlternateRouteWithoutDiscovery) {
  support::FakeContext ctx(0, 4);
  DsrAgent a(ctx, {});
  a.on_packet_from_net(source_routed(PacketType::DsrRrep, {3, 1, 0}, 1, DsrRrep{{0, 1, 3}}), 1);
  a.on_packet_from_net(source_routed(PacketType::DsrRrep, {3, 2, 0}, 1, DsrRrep{{0, 2, 3}}), 2);
  ASSERT_EQ(a.on_data_from_app(support::data_packet(0, 3)), DispatchOutcome::Forwarded);
  const Packet first = ctx.sent.back().pkt;
  const NodeId broken = ctx.sent.back().next_hop;
  ctx.sent.clear();
  a.on_link_break(broken, first);
  ASSERT_EQ(ctx.sent.size(), 1u);
  EXPECT_EQ(ctx.sent[0].pkt.type, PacketType::Cbr);
  EXPECT_NE(ctx.sent[0].next_hop, broken);
  EXPECT_TRUE(ctx.dropped.empty());
}

TEST(DsrNetwork, ChainDiscoveryLearnsFullRoute) {
  TraceBuffer trace;
  Simulation sim(support::static_setup(Protocol::Dsr, support::chain(3), {support::flow(0, 2, 1.0)}, 10), trace);
  sim.run();
  EXPECT_EQ(sim.agent_as<DsrAgent>(0).cache().find(2, sim.engine().now()), (Route{0, 1, 2}));
  const auto recv = support::count(trace.records, [](const TraceRecord& r) {
    return r.event == TraceEvent::Receive && r.layer == Layer::Agent;
  });
  EXPECT_EQ(recv, 36u);
}

TEST(DsrNetwork, SilentWithoutTraffic) {
  TraceBuffer trace;
  Simulation sim(support::static_setup(Protocol::Dsr, support::grid(3, 3), {}, 150), trace);
  sim.run();
  EXPECT_EQ(support::count(trace.records, support::is_overhead), 0u);
}

// Under mobility every cached route still starts at its owner and never repeats a node.
TEST(DsrNetwork, CachedRoutesStayWellFormed) {
  ScenarioConfig cfg;
  cfg.protocol = Protocol::Dsr;
  cfg.nodes = 20;
  cfg.pause_s = 0;
  cfg.speed_max = 20;
  cfg.duration_s = 60;
  cfg.seed = 3;
  const Scenario scen = generate_scenario(cfg);
  SimulationSetup setup;
  setup.protocol = Protocol::Dsr;
  setup.mobility = scen.mobility;
  setup.traffic = scen.traffic;
  setup.seed = cfg.seed;
  setup.duration_s = cfg.duration_s;
  NullTraceSink sink;
  Simulation sim(setup, sink);
  sim.run();
  std::size_t routes = 0;
  for (NodeId n = 0; n < cfg.nodes; ++n) {
    for (const auto& e : sim.agent_as<DsrAgent>(n).cache().entries()) {
      EXPECT_EQ(e.route.front(), n);
      EXPECT_FALSE(has_duplicates(e.route));
      ++routes;
    }
  }
  EXPECT_GT(routes, 0u);
}
