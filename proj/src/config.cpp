#include "manet/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>

#include "manet/traffic.hpp"

namespace manet {

int ScenarioConfig::connection_count() const { return connections > 0 ? connections : connections_for_nodes(nodes); }

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

SimTime to_seconds(const std::string& key, const std::string& v) {
  const double s = to_double(key, v);
  if (s < 0) throw ConfigError(key + ": must not be negative");
  return SimTime::from_seconds(s);
}

int positive(const std::string& key, std::int64_t v) {
  if (v < 1 || v > 1000000) throw ConfigError(key + ": must be a positive integer");
  return static_cast<int>(v);
}

using Setter = std::function<void(ScenarioConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto num = [](auto member) {
      return [member](ScenarioConfig& c, const std::string& k, const std::string& v) { member(c) = to_double(k, v); };
    };
    auto count = [](auto member) {
      return [member](ScenarioConfig& c, const std::string& k, const std::string& v) {
        member(c) = positive(k, to_int(k, v));
      };
    };
    auto secs = [](auto member) {
      return [member](ScenarioConfig& c, const std::string& k, const std::string& v) { member(c) = to_seconds(k, v); };
    };
    auto flag = [](auto member) {
      return [member](ScenarioConfig& c, const std::string& k, const std::string& v) { member(c) = to_bool(k, v); };
    };
    auto micros = [](auto member) {
      return [member](ScenarioConfig& c, const std::string& k, const std::string& v) {
        member(c) = SimTime::from_seconds(to_double(k, v) * 1e-6);
      };
    };

    t["scenario.protocol"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      auto p = protocol_from(v);
      if (!p) throw ConfigError(k + ": unknown protocol '" + v + "'");
      c.protocol = *p;
    };
    t["scenario.nodes"] = count([](ScenarioConfig& c) -> int& { return c.nodes; });
    t["scenario.area_width_m"] = num([](ScenarioConfig& c) -> double& { return c.area.width; });
    t["scenario.area_height_m"] = num([](ScenarioConfig& c) -> double& { return c.area.height; });
    t["scenario.duration_s"] = num([](ScenarioConfig& c) -> double& { return c.duration_s; });
    t["scenario.pause_s"] = num([](ScenarioConfig& c) -> double& { return c.pause_s; });
    t["scenario.speed_min"] = num([](ScenarioConfig& c) -> double& { return c.speed_min; });
    t["scenario.speed_max"] = num([](ScenarioConfig& c) -> double& { return c.speed_max; });
    t["scenario.connections"] = count([](ScenarioConfig& c) -> int& { return c.connections; });
    t["scenario.seed"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.seed = to_uint(k, v); };

    t["radio.range_m"] = num([](ScenarioConfig& c) -> double& { return c.radio.range_m; });
    t["radio.data_rate_bps"] = num([](ScenarioConfig& c) -> double& { return c.radio.data_rate_bps; });
    t["radio.frame_overhead"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.radio.frame_overhead = static_cast<std::uint32_t>(to_uint(k, v));
    };
    t["radio.ifq_capacity"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.radio.ifq_capacity = static_cast<std::size_t>(positive(k, to_int(k, v)));
    };
    t["radio.retry_limit"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.radio.retry_limit = static_cast<int>(std::clamp<std::int64_t>(to_int(k, v), 0, 1000));
    };
    t["radio.backoff_min_us"] = micros([](ScenarioConfig& c) -> SimTime& { return c.radio.backoff_min; });
    t["radio.backoff_max_us"] = micros([](ScenarioConfig& c) -> SimTime& { return c.radio.backoff_max; });
    t["radio.backoff_doublings"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.radio.backoff_doublings = static_cast<int>(std::clamp<std::int64_t>(to_int(k, v), 0, 20));
    };
    t["radio.ack_time_us"] = micros([](ScenarioConfig& c) -> SimTime& { return c.radio.ack_time; });

    t["buffer.capacity"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      const auto n = static_cast<std::size_t>(positive(k, to_int(k, v)));
      c.params.aodv.buffer.capacity = c.params.dsr.buffer.capacity = c.params.zrp.buffer.capacity = n;
    };
    t["buffer.timeout_s"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      const SimTime s = to_seconds(k, v);
      c.params.aodv.buffer.timeout = c.params.dsr.buffer.timeout = c.params.zrp.buffer.timeout = s;
    };

    t["dsdv.periodic_interval_s"] = secs([](ScenarioConfig& c) -> SimTime& { return c.params.dsdv.periodic_interval; });
    t["dsdv.full_dump_every"] = count([](ScenarioConfig& c) -> int& { return c.params.dsdv.full_dump_every; });
    t["dsdv.min_trigger_gap_s"] = secs([](ScenarioConfig& c) -> SimTime& { return c.params.dsdv.min_trigger_gap; });
    t["dsdv.missed_updates"] = count([](ScenarioConfig& c) -> int& { return c.params.dsdv.missed_updates; });

    t["aodv.hello_interval_s"] = secs([](ScenarioConfig& c) -> SimTime& { return c.params.aodv.hello_interval; });
    t["aodv.allowed_hello_loss"] = count([](ScenarioConfig& c) -> int& { return c.params.aodv.allowed_hello_loss; });
    t["aodv.active_route_timeout_s"] =
        secs([](ScenarioConfig& c) -> SimTime& { return c.params.aodv.active_route_timeout; });
    t["aodv.node_traversal_time_s"] =
        secs([](ScenarioConfig& c) -> SimTime& { return c.params.aodv.node_traversal_time; });
    t["aodv.ttl_start"] = count([](ScenarioConfig& c) -> int& { return c.params.aodv.ttl_start; });
    t["aodv.ttl_increment"] = count([](ScenarioConfig& c) -> int& { return c.params.aodv.ttl_increment; });
    t["aodv.ttl_threshold"] = count([](ScenarioConfig& c) -> int& { return c.params.aodv.ttl_threshold; });
    t["aodv.net_diameter"] = count([](ScenarioConfig& c) -> int& { return c.params.aodv.net_diameter; });
    t["aodv.rreq_retries"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.params.aodv.rreq_retries = static_cast<int>(std::clamp<std::int64_t>(to_int(k, v), 0, 100));
    };
    t["aodv.hellos"] = flag([](ScenarioConfig& c) -> bool& { return c.params.aodv.hellos; });
    t["aodv.link_layer_detection"] = flag([](ScenarioConfig& c) -> bool& { return c.params.aodv.link_layer_detection; });

    t["dsr.cache_capacity"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.params.dsr.cache_capacity = static_cast<std::size_t>(positive(k, to_int(k, v)));
    };
    t["dsr.cache_expiry_s"] = secs([](ScenarioConfig& c) -> SimTime& { return c.params.dsr.cache_expiry; });
    t["dsr.rreq_backoff_s"] = secs([](ScenarioConfig& c) -> SimTime& { return c.params.dsr.rreq_backoff; });
    t["dsr.rreq_backoff_max_s"] = secs([](ScenarioConfig& c) -> SimTime& { return c.params.dsr.rreq_backoff_max; });

    t["zrp.radius"] = count([](ScenarioConfig& c) -> int& { return c.params.zrp.radius; });
    t["zrp.beacon_interval_s"] = secs([](ScenarioConfig& c) -> SimTime& { return c.params.zrp.beacon_interval; });
    t["zrp.neighbor_timeout_s"] = secs([](ScenarioConfig& c) -> SimTime& { return c.params.zrp.neighbor_timeout; });
    t["zrp.iarp_refresh_s"] = secs([](ScenarioConfig& c) -> SimTime& { return c.params.zrp.iarp_refresh; });
    t["zrp.link_state_hold_s"] = secs([](ScenarioConfig& c) -> SimTime& { return c.params.zrp.link_state_hold; });
    t["zrp.query_backoff_s"] = secs([](ScenarioConfig& c) -> SimTime& { return c.params.zrp.query_backoff; });
    t["zrp.query_backoff_max_s"] = secs([](ScenarioConfig& c) -> SimTime& { return c.params.zrp.query_backoff_max; });
    return t;
  }();
  return table;
}

}  // namespace

void apply_override(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
  const auto& t = setters();
  auto it = t.find(key);
  if (it == t.end()) throw ConfigError("unknown key '" + key + "'");
  it->second(cfg, key, value);
}

std::vector<std::string> override_keys() {
  std::vector<std::string> out;
  for (const auto& [k, _] : setters()) out.push_back(k);
  return out;
}

std::vector<std::pair<std::string, std::string>> read_key_values(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

void apply_overrides(ScenarioConfig& cfg, std::istream& in) {
  for (const auto& [k, v] : read_key_values(in)) apply_override(cfg, k, v);
}

void apply_overrides_file(ScenarioConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  try {
    apply_overrides(cfg, in);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void write_scenario_keys(std::ostream& out, const ScenarioConfig& cfg) {
  char buf[64];
  auto put = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << key << " = " << buf << '\n';
  };
  out << "scenario.nodes = " << cfg.nodes << '\n';
  put("scenario.area_width_m", cfg.area.width);
  put("scenario.area_height_m", cfg.area.height);
  put("scenario.duration_s", cfg.duration_s);
  put("scenario.pause_s", cfg.pause_s);
  put("scenario.speed_min", cfg.speed_min);
  put("scenario.speed_max", cfg.speed_max);
  out << "scenario.connections = " << cfg.connection_count() << '\n';
  out << "scenario.seed = " << cfg.seed << '\n';
}

}  // namespace manet
