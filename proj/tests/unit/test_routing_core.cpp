#include <gtest/gtest.h>

#include "manet/routing.hpp"
#include "support.hpp"

using namespace manet;

TEST(SendBuffer, HoldsUntilTimeout) {
  support::FakeContext ctx(0, 3);
  SendBuffer buf(ctx, {});
  buf.push(support::data_packet(0, 2, 1));
  ctx.engine.run_until(SimTime::from_seconds(29.9));
  EXPECT_TRUE(ctx.dropped.empty());
  EXPECT_TRUE(buf.has(2));
  ctx.engine.run_until(seconds(31));
  ASSERT_EQ(ctx.dropped.size(), 1u);
  EXPECT_EQ(ctx.dropped[0].first.uid, 1u);
  EXPECT_EQ(ctx.dropped[0].second, DropReason::Timeout);
  EXPECT_EQ(buf.size(), 0u);
}

TEST(SendBuffer, OverflowEvictsOldest) {
  support::FakeContext ctx(0, 3);
  SendBuffer buf(ctx, {});
  for (PacketUid u = 0; u < 65; ++u) buf.push(support::data_packet(0, 1 + u % 2, u));
  EXPECT_EQ(buf.size(), 64u);
  ASSERT_EQ(ctx.dropped.size(), 1u);
  EXPECT_EQ(ctx.dropped[0].first.uid, 0u);
  EXPECT_EQ(ctx.dropped[0].second, DropReason::IfqSendBuffer);
}

TEST(SendBuffer, TakeReturnsArrivalOrderForOneDestination) {
  support::FakeContext ctx(0, 4);
  SendBuffer buf(ctx, {});
  buf.push(support::data_packet(0, 1, 10));
  buf.push(support::data_packet(0, 2, 11));
  buf.push(support::data_packet(0, 1, 12));
  const auto got = buf.take(1);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].uid, 10u);
  EXPECT_EQ(got[1].uid, 12u);
  EXPECT_FALSE(buf.has(1));
  EXPECT_TRUE(buf.has(2));
  buf.drop_all(2, DropReason::NoRoute);
  ASSERT_EQ(ctx.dropped.size(), 1u);
  EXPECT_EQ(ctx.dropped[0].second, DropReason::NoRoute);
}

TEST(SendBuffer, StaggeredArrivalsExpireIndividually) {
  support::FakeContext ctx(0, 3);
  SendBuffer buf(ctx, {});
  buf.push(support::data_packet(0, 1, 1));
  ctx.engine.schedule(seconds(10), 0, EventKind::Timer, [&] { buf.push(support::data_packet(0, 1, 2)); });
  ctx.engine.run_until(SimTime::from_seconds(30.5));
  EXPECT_EQ(ctx.dropped.size(), 1u);
  ctx.engine.run_until(SimTime::from_seconds(40.5));
  EXPECT_EQ(ctx.dropped.size(), 2u);
}
