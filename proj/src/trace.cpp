#include "manet/trace.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <ostream>

namespace manet {

namespace {

constexpr std::array<std::string_view, 7> kReasonCodes{"IFQ", "IFQ-SB", "NRTE", "TTL", "CBK", "COL", "TOUT"};

void append_int(std::string& out, std::int64_t v) {
  char buf[24];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, p);
}

template <class Int>
Int parse_int(std::string_view tok, const char* field) {
  if (tok.empty()) throw TraceParseError(field, "empty");
  // Canonical decimal only, so that format(parse(line)) == line.
  const bool neg = tok.front() == '-';
  const std::string_view digits = neg ? tok.substr(1) : tok;
  if (digits.empty() || (digits.size() > 1 && digits.front() == '0') || (neg && digits == "0")) {
    throw TraceParseError(field, "not a canonical integer: '" + std::string(tok) + "'");
  }
  Int v{};
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size()) {
    throw TraceParseError(field, "not an integer: '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace

std::string_view to_string(Layer layer) {
  switch (layer) {
    case Layer::Agent: return "AGT";
    case Layer::Router: return "RTR";
    case Layer::Mac: return "MAC";
  }
  return "?";
}

std::string_view to_string(DropReason reason) { return kReasonCodes[static_cast<std::size_t>(reason)]; }

std::optional<DropReason> drop_reason_from(std::string_view code) {
  for (std::size_t i = 0; i < kReasonCodes.size(); ++i) {
    if (kReasonCodes[i] == code) return static_cast<DropReason>(i);
  }
  return std::nullopt;
}

void format_to(std::string& out, const TraceRecord& rec) {
  out.push_back(static_cast<char>(rec.event));
  out.push_back(' ');
  const std::int64_t ns = rec.time.ns();
  append_int(out, ns / 1000000000);
  out.push_back('.');
  char frac[10];
  std::int64_t f = ns % 1000000000;
  for (int i = 8; i >= 0; --i) {
    frac[i] = static_cast<char>('0' + f % 10);
    f /= 10;
  }
  out.append(frac, 9);
  out.push_back(' ');
  append_int(out, rec.node);
  out.push_back(' ');
  out.append(to_string(rec.layer));
  out.push_back(' ');
  append_int(out, static_cast<std::int64_t>(rec.uid));
  out.push_back(' ');
  out.append(to_string(rec.ptype));
  out.push_back(' ');
  append_int(out, rec.size);
  out.push_back(' ');
  append_int(out, rec.flow_src);
  out.push_back(' ');
  append_int(out, rec.flow_dst);
  out.push_back(' ');
  if (rec.reason) {
    out.append(to_string(*rec.reason));
  } else {
    out.push_back('-');
  }
}

std::string format(const TraceRecord& rec) {
  std::string s;
  format_to(s, rec);
  return s;
}

TraceRecord parse_trace_line(std::string_view line) {
  static constexpr std::array<const char*, 10> kFields{"event", "time",  "node",     "layer",    "uid",
                                                       "ptype", "size", "flow_src", "flow_dst", "reason"};
  std::array<std::string_view, 10> tok;
  std::size_t count = 0;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const std::size_t sp = line.find(' ', pos);
    const std::string_view t = line.substr(pos, sp == std::string_view::npos ? std::string_view::npos : sp - pos);
    if (count == tok.size()) throw TraceParseError("reason", "trailing fields");
    if (t.empty()) throw TraceParseError(kFields[count], "empty field");
    tok[count++] = t;
    if (sp == std::string_view::npos) break;
    pos = sp + 1;
  }
  if (count < tok.size()) throw TraceParseError(kFields[count], "missing field");

  TraceRecord rec;
  if (tok[0].size() != 1 || std::string_view("srdf").find(tok[0][0]) == std::string_view::npos) {
    throw TraceParseError("event", "expected one of s r d f");
  }
  rec.event = static_cast<TraceEvent>(tok[0][0]);

  const std::string_view t = tok[1];
  const std::size_t dot = t.find('.');
  if (dot == std::string_view::npos || t.size() - dot - 1 != 9) {
    throw TraceParseError("time", "expected seconds with exactly 9 decimals: '" + std::string(t) + "'");
  }
  const auto whole = parse_int<std::int64_t>(t.substr(0, dot), "time");
  const std::string_view frac = t.substr(dot + 1);
  std::int64_t f = 0;
  for (char c : frac) {
    if (c < '0' || c > '9') throw TraceParseError("time", "non-digit in fraction");
    f = f * 10 + (c - '0');
  }
  if (whole < 0) throw TraceParseError("time", "negative time");
  rec.time = nanoseconds(whole * 1000000000 + f);

  rec.node = parse_int<NodeId>(tok[2], "node");

  if (tok[3] == "AGT") {
    rec.layer = Layer::Agent;
  } else if (tok[3] == "RTR") {
    rec.layer = Layer::Router;
  } else if (tok[3] == "MAC") {
    rec.layer = Layer::Mac;
  } else {
    throw TraceParseError("layer", "expected AGT, RTR or MAC");
  }

  rec.uid = parse_int<PacketUid>(tok[4], "uid");
  const auto ptype = packet_type_from(tok[5]);
  if (!ptype) throw TraceParseError("ptype", "unknown packet type '" + std::string(tok[5]) + "'");
  rec.ptype = *ptype;
  rec.size = parse_int<std::uint32_t>(tok[6], "size");
  rec.flow_src = parse_int<NodeId>(tok[7], "flow_src");
  rec.flow_dst = parse_int<NodeId>(tok[8], "flow_dst");

  if (tok[9] == "-") {
    if (rec.event == TraceEvent::Drop) throw TraceParseError("reason", "drop record without a reason");
  } else {
    const auto reason = drop_reason_from(tok[9]);
    if (!reason) throw TraceParseError("reason", "unknown drop reason '" + std::string(tok[9]) + "'");
    if (rec.event != TraceEvent::Drop) throw TraceParseError("reason", "reason on a non-drop record");
    rec.reason = reason;
  }
  return rec;
}

struct TraceWriter::DigestState {
  EVP_MD_CTX* ctx = nullptr;
  DigestState() : ctx(EVP_MD_CTX_new()) { EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr); }
  ~DigestState() { EVP_MD_CTX_free(ctx); }
};

TraceWriter::TraceWriter(std::ostream* out, bool digest)
    : out_(out), digest_(digest ? std::make_unique<DigestState>() : nullptr) {}

TraceWriter::~TraceWriter() = default;

void TraceWriter::record(const TraceRecord& rec) {
  line_.clear();
  format_to(line_, rec);
  line_.push_back('\n');
  if (out_) out_->write(line_.data(), static_cast<std::streamsize>(line_.size()));
  if (digest_) EVP_DigestUpdate(digest_->ctx, line_.data(), line_.size());
  ++lines_;
}

namespace {
std::string to_hex(const unsigned char* p, unsigned int n) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < n; ++i) {
    s.push_back(kHex[p[i] >> 4]);
    s.push_back(kHex[p[i] & 15]);
  }
  return s;
}
}  // namespace

std::string TraceWriter::digest_hex() {
  if (!digest_) return {};
  EVP_MD_CTX* copy = EVP_MD_CTX_new();
  EVP_MD_CTX_copy_ex(copy, digest_->ctx);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int n = 0;
  EVP_DigestFinal_ex(copy, md, &n);
  EVP_MD_CTX_free(copy);
  return to_hex(md, n);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int n = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &n, EVP_sha256(), nullptr);
  return to_hex(md, n);
}

}  // namespace manet
