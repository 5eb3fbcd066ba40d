#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "manet/engine.hpp"

namespace manet {

using PacketUid = std::uint64_t;

inline constexpr NodeId kBroadcast = -1;

/// Trace type tag. Cbr is application data; every other value is a routing
/// packet of one protocol.
enum class PacketType : std::uint8_t {
  Cbr,
  Dsdv,
  AodvRreq,
  AodvRrep,
  AodvRerr,
  AodvHello,
  DsrRreq,
  DsrRrep,
  DsrRerr,
  ZrpBeacon,
  ZrpIarp,
  ZrpIerpQuery,
  ZrpIerpReply,
  ZrpIerpError,
};

std::string_view to_string(PacketType type);
std::optional<PacketType> packet_type_from(std::string_view tag);
inline bool is_routing(PacketType type) { return type != PacketType::Cbr; }

// ---- protocol messages -----------------------------------------------------

inline constexpr std::uint32_t kInfiniteMetric = 0xffffffffu;

struct DsdvAdvert {
  NodeId dest = 0;
  std::uint32_t metric = 0;
  std::uint32_t seq = 0;
  bool operator==(const DsdvAdvert&) const = default;
};

struct DsdvUpdate {
  bool full_dump = false;
  std::vector<DsdvAdvert> entries;
};

struct AodvRreq {
  NodeId originator = 0;
  std::uint32_t rreq_id = 0;
  std::uint32_t originator_seq = 0;
  NodeId dest = 0;
  std::uint32_t dest_seq = 0;
  bool dest_seq_known = false;
  std::uint32_t hops = 0;
};

struct AodvRrep {
  NodeId dest = 0;
  std::uint32_t dest_seq = 0;
  NodeId originator = 0;
  std::uint32_t hops = 0;
  SimTime lifetime;
};

struct AodvRerr {
  std::vector<std::pair<NodeId, std::uint32_t>> unreachable;
};

struct AodvHello {
  std::uint32_t seq = 0;
};

struct DsrRreq {
  NodeId originator = 0;
  std::uint32_t request_id = 0;
  NodeId target = 0;
  std::vector<NodeId> record;
};

/// Carries the discovered route; travels back along the packet's source route.
struct DsrRrep {
  std::vector<NodeId> route;
};

/// Reports the broken link from -> to back to the data source.
struct DsrRerr {
  NodeId from = 0;
  NodeId to = 0;
};

struct ZrpBeacon {};

struct ZrpIarp {
  NodeId origin = 0;
  std::uint32_t seq = 0;
  std::vector<NodeId> neighbors;
};

struct ZrpQuery {
  NodeId originator = 0;
  std::uint32_t query_id = 0;
  NodeId target = 0;
  /// Bordercast tree of the latest bordercaster: its zone path to each
  /// peripheral node the query is sent to.
  std::vector<std::vector<NodeId>> relay_paths;
  std::vector<NodeId> accumulated;
  /// Bitset of node ids whose zones are already covered by the query.
  std::vector<std::uint64_t> covered;
};

struct ZrpReply {
  NodeId originator = 0;
  std::uint32_t query_id = 0;
  NodeId target = 0;
  std::vector<NodeId> route;
};

struct ZrpError {
  NodeId from = 0;
  NodeId to = 0;
  NodeId target = 0;
};

using RoutingMessage = std::variant<std::monostate, DsdvUpdate, AodvRreq, AodvRrep, AodvRerr, AodvHello, DsrRreq,
                                    DsrRrep, DsrRerr, ZrpBeacon, ZrpIarp, ZrpQuery, ZrpReply, ZrpError>;

/// A data or routing packet. Routing payloads are shared immutably between
/// the copies a broadcast produces; agents build a new message to modify one.
struct Packet {
  PacketUid uid = 0;
  PacketType type = PacketType::Cbr;
  /// Flow endpoints for data; originator and addressee (or kBroadcast) for routing packets.
  NodeId src = 0;
  NodeId dst = 0;
  std::uint32_t flow_seq = 0;
  std::uint32_t size = 0;
  SimTime origin;
  int ttl = 0;
  /// Source route (DSR data and control, ZRP inter-zone traffic); empty when hop-by-hop.
  std::vector<NodeId> route;
  /// Index into `route` of the node currently holding the packet.
  std::uint32_t route_index = 0;
  std::shared_ptr<const RoutingMessage> message;

  bool is_data() const { return type == PacketType::Cbr; }

  template <class T>
  const T& as() const {
    return std::get<T>(*message);
  }
};

inline constexpr std::uint32_t kDataPayloadBytes = 512;
inline constexpr int kDataTtl = 32;
inline constexpr std::uint32_t kIpHeaderBytes = 20;
inline constexpr std::uint32_t kSourceRouteBytesPerHop = 4;

/// Network-layer size of a routing message (IP header plus message body).
std::uint32_t routing_packet_size(const RoutingMessage& msg);

template <class T>
std::shared_ptr<const RoutingMessage> make_message(T&& body) {
  return std::make_shared<const RoutingMessage>(std::forward<T>(body));
}

}  // namespace manet
