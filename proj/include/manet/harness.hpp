#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "manet/config.hpp"
#include "manet/metrics.hpp"
#include "manet/mobility.hpp"
#include "manet/traffic.hpp"

namespace manet {

/// One cell of the experiment matrix. Pause-sweep cells run at max speed
/// 2 m/s, speed-sweep cells at pause 2 s.
struct MatrixCell {
  int nodes = 0;
  double pause_s = 0.0;
  double speed_max = 0.0;
  bool speed_sweep = false;

  bool operator==(const MatrixCell&) const = default;
};

inline constexpr int kMatrixNodes[] = {10, 20, 30, 40, 50};
inline constexpr double kMatrixPauses[] = {10, 50, 100, 150, 200};
inline constexpr double kMatrixSpeeds[] = {5, 10, 15, 20, 25};

/// The 25 pause-sweep cells followed by the 25 speed-sweep cells.
std::vector<MatrixCell> matrix_cells();
/// Which sweep a (pause, max speed) pair belongs to.
bool is_speed_sweep(double pause_s, double speed_max);

/// Scenario seed of the `index`-th repetition of a cell. Independent of the
/// protocol, so all protocols see the same movement and traffic.
std::uint64_t cell_seed(const MatrixCell& cell, int index);
ScenarioConfig cell_config(const MatrixCell& cell, int seed_index, Protocol protocol);
/// cells x protocols x seeds configs, grouped by (cell, seed).
std::vector<ScenarioConfig> gen_matrix(int seeds, const std::vector<Protocol>& protocols);

struct Scenario {
  MobilityPlan mobility;
  TrafficPlan traffic;
};

Scenario generate_scenario(const ScenarioConfig& cfg);

inline constexpr const char* kMovementFile = "movement.txt";
inline constexpr const char* kTrafficFile = "traffic.txt";
inline constexpr const char* kScenarioFile = "scenario.cfg";

/// Writes movement.txt, traffic.txt and scenario.cfg into `dir` (created if needed).
void write_scenario_dir(const std::filesystem::path& dir, const ScenarioConfig& cfg, const Scenario& scenario);
/// Loads scenario.cfg into `cfg` and parses the movement and traffic files.
Scenario read_scenario_dir(const std::filesystem::path& dir, ScenarioConfig& cfg);

struct RunResult {
  MetricsReport report;
  std::string trace_digest;
  std::uint64_t trace_lines = 0;
  /// Data still buffered or airborne when the clock stopped.
  std::uint64_t held = 0;
  std::uint64_t events = 0;
  std::uint64_t delivered_paths_checked = 0;
  std::uint64_t loop_violations = 0;
  std::uint64_t monotonicity_steps = 0;
  std::uint64_t monotonicity_violations = 0;
  double wall_s = 0.0;

  bool conserved() const { return report.generated == report.delivered + report.dropped + held; }
};

struct RunOptions {
  /// Trace destination; nullptr keeps only the digest.
  std::ostream* trace = nullptr;
  /// Loop and sequence-number audits.
  bool audit = false;
};

RunResult execute_run(const ScenarioConfig& cfg, const Scenario& scenario, const RunOptions& opts = {});

/// Manifest: the scenario keys, protocol, every override applied, digests of
/// the movement and traffic files, and the trace digest.
void write_manifest(std::ostream& out, const ScenarioConfig& cfg,
                    const std::vector<std::pair<std::string, std::string>>& overrides, const Scenario& scenario,
                    const RunResult& result);

struct Manifest {
  ScenarioConfig cfg;
  std::string movement_digest;
  std::string traffic_digest;
  std::string trace_digest;
};

/// Rebuilds the config a manifest describes. Throws ConfigError.
Manifest read_manifest(std::istream& in);

std::string movement_digest(const MobilityPlan& plan);
std::string traffic_digest(const TrafficPlan& plan);

struct SweepOptions {
  int seeds = 5;
  std::vector<Protocol> protocols{std::begin(kAllProtocols), std::end(kAllProtocols)};
  int jobs = 1;
  bool audit = true;
  /// Applied to every run after the cell's own scenario keys.
  std::vector<std::pair<std::string, std::string>> overrides;
  std::function<void(std::size_t done, std::size_t total)> progress;
};

struct SweepRun {
  ScenarioConfig cfg;
  MatrixCell cell;
  int seed_index = 0;
  RunResult result;
};

/// Runs the whole matrix; runs execute concurrently on `jobs` threads and
/// are returned in matrix order regardless of completion order.
std::vector<SweepRun> run_sweep(const SweepOptions& opts);

RunKey run_key(const ScenarioConfig& cfg);
std::vector<MetricsRow> to_rows(const std::vector<SweepRun>& runs);

/// Writes metrics.csv, runs.csv (digests and audit counters) and one pivot
/// CSV per metric into `dir`.
void write_sweep_results(const std::filesystem::path& dir, const std::vector<SweepRun>& runs);
void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics_csv(std::istream& in);
/// pivot_<metric>.csv: one line per (group, nodes), one column per protocol,
/// values are means over seeds.
void write_pivots(const std::filesystem::path& dir, const std::vector<MetricsRow>& rows);

}  // namespace manet
