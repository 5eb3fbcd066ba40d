#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "manet/engine.hpp"
#include "manet/packet.hpp"

namespace manet {

enum class TraceEvent : char { Send = 's', Receive = 'r', Drop = 'd', Forward = 'f' };
enum class Layer : std::uint8_t { Agent, Router, Mac };
enum class DropReason : std::uint8_t { Ifq, IfqSendBuffer, NoRoute, Ttl, Callback, Collision, Timeout };

std::string_view to_string(Layer layer);
std::string_view to_string(DropReason reason);
std::optional<DropReason> drop_reason_from(std::string_view code);

/// One trace line:
///   <s|r|d|f> <time, 9 decimals> <node> <AGT|RTR|MAC> <uid> <ptype> <size> <flow src> <flow dst> <reason|->
struct TraceRecord {
  TraceEvent event = TraceEvent::Send;
  SimTime time;
  NodeId node = 0;
  Layer layer = Layer::Agent;
  PacketUid uid = 0;
  PacketType ptype = PacketType::Cbr;
  std::uint32_t size = 0;
  NodeId flow_src = 0;
  NodeId flow_dst = 0;
  std::optional<DropReason> reason;

  bool operator==(const TraceRecord&) const = default;
};

class TraceParseError : public std::runtime_error {
 public:
  TraceParseError(std::string field, const std::string& what)
      : std::runtime_error("trace parse error in field '" + field + "': " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Appends the line (without newline) to `out`.
void format_to(std::string& out, const TraceRecord& rec);
std::string format(const TraceRecord& rec);
/// Strict inverse of format(); throws TraceParseError naming the bad field.
TraceRecord parse_trace_line(std::string_view line);

class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void record(const TraceRecord& rec) = 0;
};

/// Formats every record once and feeds the line to an optional stream and
/// an optional SHA-256 digest.
class TraceWriter final : public TraceSink {
 public:
  explicit TraceWriter(std::ostream* out, bool digest = true);
  ~TraceWriter() override;
  TraceWriter(const TraceWriter&) = delete;
  TraceWriter& operator=(const TraceWriter&) = delete;

  void record(const TraceRecord& rec) override;
  /// Hex SHA-256 of every byte written so far (lines including newlines).
  std::string digest_hex();
  std::uint64_t lines() const { return lines_; }

 private:
  struct DigestState;
  std::ostream* out_;
  std::unique_ptr<DigestState> digest_;
  std::string line_;
  std::uint64_t lines_ = 0;
};

/// Fans records out to several sinks in order.
class TraceTee final : public TraceSink {
 public:
  explicit TraceTee(std::vector<TraceSink*> sinks) : sinks_(std::move(sinks)) {}
  void record(const TraceRecord& rec) override {
    for (TraceSink* s : sinks_) s->record(rec);
  }

 private:
  std::vector<TraceSink*> sinks_;
};

/// Keeps every record in memory.
class TraceBuffer final : public TraceSink {
 public:
  void record(const TraceRecord& rec) override { records.push_back(rec); }
  std::vector<TraceRecord> records;
};

class NullTraceSink final : public TraceSink {
 public:
  void record(const TraceRecord&) override {}
};

/// Hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

}  // namespace manet
