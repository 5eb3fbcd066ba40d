#pragma once

#include <optional>
#include <vector>

#include "manet/routing.hpp"

namespace manet {

struct DsdvParams {
  SimTime periodic_interval = seconds(15);
  int full_dump_every = 3;
  SimTime min_trigger_gap = seconds(1);
  /// Periodic intervals of silence before a neighbor is declared lost.
  int missed_updates = 3;
  SimTime trigger_jitter = milliseconds(10);
};

struct DsdvEntry {
  NodeId dest = 0;
  NodeId next_hop = 0;
  std::uint32_t metric = kInfiniteMetric;
  std::uint32_t seq = 0;
  SimTime installed;
  bool changed_since_full = false;
  bool changed_since_advert = false;
};

class DsdvAgent final : public RoutingAgent {
 public:
  DsdvAgent(RoutingContext& ctx, const DsdvParams& params);

  void start() override;
  DispatchOutcome on_data_from_app(Packet pkt) override;
  void on_packet_from_net(Packet pkt, NodeId from) override;
  void on_link_break(NodeId next_hop, Packet pkt) override;
  std::size_t buffered_data() const override { return 0; }

  const std::optional<DsdvEntry>& entry(NodeId dest) const { return table_[static_cast<std::size_t>(dest)]; }
  std::uint32_t own_seq() const { return own_seq_; }
  std::uint64_t updates_sent() const { return updates_sent_; }

  /// Applies one advertisement heard from neighbor `from`; returns true if the
  /// entry changed. Exposed for unit tests.
  bool integrate(const DsdvAdvert& advert, NodeId from);

 private:
  void periodic_tick();
  void request_trigger();
  void send_update(bool full);
  void lose_neighbor(NodeId neighbor);
  void mark(DsdvEntry& e);
  std::optional<NodeId> next_hop_for(NodeId dst) const;

  DsdvParams params_;
  std::vector<std::optional<DsdvEntry>> table_;
  std::vector<std::optional<SimTime>> last_heard_;
  std::uint32_t own_seq_ = 0;
  std::uint64_t ticks_ = 0;
  std::uint64_t updates_sent_ = 0;
  std::optional<SimTime> last_sent_;
  std::optional<EventId> trigger_timer_;
};

}  // namespace manet
