#include "manet/packet.hpp"

#include <array>

namespace manet {

namespace {

constexpr std::array<std::pair<PacketType, std::string_view>, 14> kTags{{
    {PacketType::Cbr, "cbr"},
    {PacketType::Dsdv, "dsdv"},
    {PacketType::AodvRreq, "aodv:rreq"},
    {PacketType::AodvRrep, "aodv:rrep"},
    {PacketType::AodvRerr, "aodv:rerr"},
    {PacketType::AodvHello, "aodv:hello"},
    {PacketType::DsrRreq, "dsr:rreq"},
    {PacketType::DsrRrep, "dsr:rrep"},
    {PacketType::DsrRerr, "dsr:rerr"},
    {PacketType::ZrpBeacon, "zrp:beacon"},
    {PacketType::ZrpIarp, "zrp:iarp"},
    {PacketType::ZrpIerpQuery, "zrp:ierp_q"},
    {PacketType::ZrpIerpReply, "zrp:ierp_r"},
    {PacketType::ZrpIerpError, "zrp:ierp_e"},
}};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::uint32_t list_bytes(const std::vector<NodeId>& v) { return 4u * static_cast<std::uint32_t>(v.size()); }

}  // namespace

std::string_view to_string(PacketType type) {
  for (const auto& [t, tag] : kTags) {
    if (t == type) return tag;
  }
  return "?";
}

std::optional<PacketType> packet_type_from(std::string_view tag) {
  for (const auto& [t, name] : kTags) {
    if (name == tag) return t;
  }
  return std::nullopt;
}

// Message bodies follow the field layouts of the respective drafts: 4 bytes
// per address or sequence number, plus a small fixed header.
std::uint32_t routing_packet_size(const RoutingMessage& msg) {
  const std::uint32_t body = std::visit(
      Overloaded{
          [](const std::monostate&) { return 0u; },
          [](const DsdvUpdate& m) { return 4u + 12u * static_cast<std::uint32_t>(m.entries.size()); },
          [](const AodvRreq&) { return 24u; },
          [](const AodvRrep&) { return 20u; },
          [](const AodvRerr& m) { return 4u + 8u * static_cast<std::uint32_t>(m.unreachable.size()); },
          [](const AodvHello&) { return 20u; },
          [](const DsrRreq& m) { return 8u + list_bytes(m.record); },
          [](const DsrRrep& m) { return 8u + list_bytes(m.route); },
          [](const DsrRerr&) { return 16u; },
          [](const ZrpBeacon&) { return 8u; },
          [](const ZrpIarp& m) { return 12u + list_bytes(m.neighbors); },
          [](const ZrpQuery& m) {
            std::uint32_t paths = 0;
            for (const auto& p : m.relay_paths) paths += list_bytes(p);
            return 16u + list_bytes(m.accumulated) + paths + 8u * static_cast<std::uint32_t>(m.covered.size());
          },
          [](const ZrpReply& m) { return 16u + list_bytes(m.route); },
          [](const ZrpError&) { return 16u; },
      },
      msg);
  return kIpHeaderBytes + body;
}

}  // namespace manet
