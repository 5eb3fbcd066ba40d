#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "manet/medium.hpp"
#include "manet/mobility.hpp"
#include "manet/simulation.hpp"

namespace manet {

/// Complete, seed-reproducible description of one run.
struct ScenarioConfig {
  Protocol protocol = Protocol::Aodv;
  int nodes = 10;
  Area area;
  double duration_s = 150.0;
  double pause_s = 0.0;
  double speed_min = 1.0;
  double speed_max = 2.0;
  /// 0 picks the default for the node count.
  int connections = 0;
  /// Drives mobility, traffic, MAC jitter and protocol streams.
  std::uint64_t seed = 0;
  RadioConfig radio;
  ProtocolParams params;

  int connection_count() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sets one `section.name` key. Throws ConfigError for an unknown key or a
/// value that does not parse.
void apply_override(ScenarioConfig& cfg, const std::string& key, const std::string& value);

/// Reads flat `key = value` lines; `#` starts a comment. Errors carry the line number.
std::vector<std::pair<std::string, std::string>> read_key_values(std::istream& in);
void apply_overrides(ScenarioConfig& cfg, std::istream& in);
void apply_overrides_file(ScenarioConfig& cfg, const std::string& path);

/// Keys accepted by apply_override, sorted.
std::vector<std::string> override_keys();

/// The scenario keys (`scenario.*`) of `cfg` in the override syntax.
void write_scenario_keys(std::ostream& out, const ScenarioConfig& cfg);

}  // namespace manet
