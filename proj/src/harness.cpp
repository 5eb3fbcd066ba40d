#include "manet/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "manet/checks.hpp"
#include "manet/simulation.hpp"

namespace manet {

namespace fs = std::filesystem;

std::vector<MatrixCell> matrix_cells() {
  std::vector<MatrixCell> cells;
  for (double pause : kMatrixPauses) {
    for (int n : kMatrixNodes) cells.push_back({n, pause, 2.0, false});
  }
  for (double speed : kMatrixSpeeds) {
    for (int n : kMatrixNodes) cells.push_back({n, 2.0, speed, true});
  }
  return cells;
}

bool is_speed_sweep(double pause_s, double speed_max) { return !(speed_max == 2.0 && pause_s != 2.0); }

std::uint64_t cell_seed(const MatrixCell& cell, int index) {
  std::uint64_t h = fnv1a64("matrix-cell");
  h = splitmix64(h ^ static_cast<std::uint64_t>(cell.nodes));
  h = splitmix64(h ^ static_cast<std::uint64_t>(std::llround(cell.pause_s * 1000)));
  h = splitmix64(h ^ static_cast<std::uint64_t>(std::llround(cell.speed_max * 1000)));
  h = splitmix64(h ^ static_cast<std::uint64_t>(index));
  // Keep seeds readable in CSVs and shells.
  return h >> 16;
}

ScenarioConfig cell_config(const MatrixCell& cell, int seed_index, Protocol protocol) {
  ScenarioConfig cfg;
  cfg.protocol = protocol;
  cfg.nodes = cell.nodes;
  cfg.pause_s = cell.pause_s;
  cfg.speed_min = 1.0;
  cfg.speed_max = cell.speed_max;
  cfg.seed = cell_seed(cell, seed_index);
  return cfg;
}

std::vector<ScenarioConfig> gen_matrix(int seeds, const std::vector<Protocol>& protocols) {
  if (seeds < 1) throw std::invalid_argument("seeds must be at least 1");
  std::vector<ScenarioConfig> out;
  for (const MatrixCell& cell : matrix_cells()) {
    for (int s = 0; s < seeds; ++s) {
      for (Protocol p : protocols) out.push_back(cell_config(cell, s, p));
    }
  }
  return out;
}

Scenario generate_scenario(const ScenarioConfig& cfg) {
  MobilityParams mp;
  mp.nodes = cfg.nodes;
  mp.area = cfg.area;
  mp.pause_s = cfg.pause_s;
  mp.speed_min = cfg.speed_min;
  mp.speed_max = cfg.speed_max;
  mp.duration_s = cfg.duration_s;
  RandomStream mobility(cfg.seed, StreamLabel::Mobility);

  TrafficParams tp;
  tp.nodes = cfg.nodes;
  tp.max_connections = cfg.connection_count();
  tp.duration_s = cfg.duration_s;
  RandomStream traffic(cfg.seed, StreamLabel::Traffic);

  return Scenario{generate_plan(mp, mobility), generate_traffic_plan(tp, traffic)};
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  return in;
}

std::string movement_text(const MobilityPlan& plan) {
  std::ostringstream os;
  write_movement_file(os, plan);
  return os.str();
}

std::string traffic_text(const TrafficPlan& plan) {
  std::ostringstream os;
  write_traffic_file(os, plan);
  return os.str();
}

}  // namespace

std::string movement_digest(const MobilityPlan& plan) { return sha256_hex(movement_text(plan)); }
std::string traffic_digest(const TrafficPlan& plan) { return sha256_hex(traffic_text(plan)); }

void write_scenario_dir(const fs::path& dir, const ScenarioConfig& cfg, const Scenario& scenario) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error(dir.string() + ": " + ec.message());
  write_file(dir / kMovementFile, movement_text(scenario.mobility));
  write_file(dir / kTrafficFile, traffic_text(scenario.traffic));
  std::ostringstream os;
  write_scenario_keys(os, cfg);
  write_file(dir / kScenarioFile, os.str());
}

Scenario read_scenario_dir(const fs::path& dir, ScenarioConfig& cfg) {
  apply_overrides_file(cfg, (dir / kScenarioFile).string());
  Scenario s;
  {
    auto in = open_input(dir / kMovementFile);
    try {
      s.mobility = read_movement_file(in, cfg.area, cfg.duration_s);
    } catch (const std::exception& e) {
      throw std::runtime_error((dir / kMovementFile).string() + ": " + e.what());
    }
  }
  {
    auto in = open_input(dir / kTrafficFile);
    try {
      s.traffic = read_traffic_file(in);
    } catch (const std::exception& e) {
      throw std::runtime_error((dir / kTrafficFile).string() + ": " + e.what());
    }
  }
  if (s.mobility.node_count() != cfg.nodes) {
    throw std::runtime_error(dir.string() + ": movement file has " + std::to_string(s.mobility.node_count()) +
                             " nodes, scenario.cfg says " + std::to_string(cfg.nodes));
  }
  return s;
}

RunResult execute_run(const ScenarioConfig& cfg, const Scenario& scenario, const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  SimulationSetup setup;
  setup.protocol = cfg.protocol;
  setup.mobility = scenario.mobility;
  setup.traffic = scenario.traffic;
  setup.radio = cfg.radio;
  setup.params = cfg.params;
  setup.seed = cfg.seed;
  setup.duration_s = cfg.duration_s;

  TraceWriter writer(opts.trace, true);
  MetricsAccumulator metrics;
  LoopAuditor loops;
  MonotonicityAuditor mono;
  std::vector<TraceSink*> sinks{&writer, &metrics};
  if (opts.audit) sinks.push_back(&loops);
  TraceTee tee(std::move(sinks));

  Simulation sim(std::move(setup), tee);
  if (opts.audit && cfg.protocol == Protocol::Aodv) {
    sim.set_forward_observer([&mono](const ForwardStep& step) { mono.observe(step); });
  }
  const RunSummary summary = sim.run();

  RunResult r;
  r.report = metrics.report();
  r.trace_digest = writer.digest_hex();
  r.trace_lines = writer.lines();
  r.held = sim.data_held();
  r.events = summary.events_dispatched;
  r.delivered_paths_checked = loops.checked();
  r.loop_violations = loops.violations();
  r.monotonicity_steps = mono.steps();
  r.monotonicity_violations = mono.violations();
  r.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

void write_manifest(std::ostream& out, const ScenarioConfig& cfg,
                    const std::vector<std::pair<std::string, std::string>>& overrides, const Scenario& scenario,
                    const RunResult& result) {
  out << "scenario.protocol = " << to_string(cfg.protocol) << '\n';
  write_scenario_keys(out, cfg);
  for (const auto& [k, v] : overrides) {
    if (k.rfind("scenario.", 0) != 0) out << k << " = " << v << '\n';
  }
  out << "run.movement_sha256 = " << movement_digest(scenario.mobility) << '\n';
  out << "run.traffic_sha256 = " << traffic_digest(scenario.traffic) << '\n';
  out << "run.trace_sha256 = " << result.trace_digest << '\n';
  out << "run.trace_lines = " << result.trace_lines << '\n';
  out << "run.generated = " << result.report.generated << '\n';
  out << "run.delivered = " << result.report.delivered << '\n';
  out << "run.dropped = " << result.report.dropped << '\n';
  out << "run.residual = " << result.held << '\n';
}

Manifest read_manifest(std::istream& in) {
  Manifest m;
  for (const auto& [k, v] : read_key_values(in)) {
    if (k == "run.movement_sha256") {
      m.movement_digest = v;
    } else if (k == "run.traffic_sha256") {
      m.traffic_digest = v;
    } else if (k == "run.trace_sha256") {
      m.trace_digest = v;
    } else if (k.rfind("run.", 0) == 0) {
      continue;
    } else {
      apply_override(m.cfg, k, v);
    }
  }
  return m;
}

std::vector<SweepRun> run_sweep(const SweepOptions& opts) {
  if (opts.seeds < 1) throw std::invalid_argument("seeds must be at least 1");
  if (opts.protocols.empty()) throw std::invalid_argument("no protocols selected");

  // One scenario per (cell, seed), shared by every protocol.
  struct Slot {
    MatrixCell cell;
    int seed_index;
  };
  std::vector<Slot> slots;
  for (const MatrixCell& cell : matrix_cells()) {
    for (int s = 0; s < opts.seeds; ++s) slots.push_back({cell, s});
  }

  std::vector<SweepRun> runs;
  for (const Slot& slot : slots) {
    for (Protocol p : opts.protocols) {
      SweepRun r;
      r.cfg = cell_config(slot.cell, slot.seed_index, p);
      for (const auto& [k, v] : opts.overrides) apply_override(r.cfg, k, v);
      r.cell = slot.cell;
      r.seed_index = slot.seed_index;
      runs.push_back(std::move(r));
    }
  }

  const std::size_t per_slot = opts.protocols.size();
  std::atomic<std::size_t> next_slot{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mu;
  std::mutex error_mu;
  std::exception_ptr error;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next_slot.fetch_add(1);
      if (i >= slots.size()) return;
      try {
        const Scenario scenario = generate_scenario(runs[i * per_slot].cfg);
        for (std::size_t k = 0; k < per_slot; ++k) {
          SweepRun& run = runs[i * per_slot + k];
          RunOptions ro;
          ro.audit = opts.audit;
          run.result = execute_run(run.cfg, scenario, ro);
          const std::size_t d = ++done;
          if (opts.progress) {
            std::lock_guard lock(progress_mu);
            opts.progress(d, runs.size());
          }
        }
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next_slot = slots.size();
        return;
      }
    }
  };

  const int jobs = std::max(1, opts.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return runs;
}

RunKey run_key(const ScenarioConfig& cfg) {
  RunKey k;
  k.protocol = std::string(to_string(cfg.protocol));
  k.nodes = cfg.nodes;
  k.pause = cfg.pause_s;
  k.speed = cfg.speed_max;
  k.seed = cfg.seed;
  return k;
}

std::vector<MetricsRow> to_rows(const std::vector<SweepRun>& runs) {
  std::vector<MetricsRow> rows;
  rows.reserve(runs.size());
  for (const SweepRun& r : runs) rows.push_back({run_key(r.cfg), r.result.report});
  return rows;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << kMetricsCsvHeader << '\n';
  for (const MetricsRow& r : rows) out << format_metrics_row(r.key, r.report) << '\n';
}

std::vector<MetricsRow> read_metrics_csv(std::istream& in) {
  std::vector<MetricsRow> rows;
  std::string line;
  if (!std::getline(in, line)) return rows;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMetricsCsvHeader) throw std::runtime_error("unexpected metrics header: " + line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(parse_metrics_row(line));
  }
  return rows;
}

namespace {

std::string group_label(const CellId& id) {
  std::ostringstream os;
  if (is_speed_sweep(id.pause, id.speed)) {
    os << "speed=" << id.speed;
  } else {
    os << "pause=" << id.pause;
  }
  return os.str();
}

}  // namespace

void write_pivots(const fs::path& dir, const std::vector<MetricsRow>& rows) {
  const CellTable table = summarize(rows);
  std::vector<std::string> protocols;
  for (Protocol p : kAllProtocols) protocols.emplace_back(to_string(p));

  struct Metric {
    const char* name;
    const Series CellSummary::*series;
  };
  const Metric metrics[] = {{"throughput", &CellSummary::throughput},
                            {"avg_delay_s", &CellSummary::avg_delay},
                            {"dropped", &CellSummary::dropped},
                            {"overhead", &CellSummary::overhead}};
  for (const Metric& m : metrics) {
    std::ostringstream os;
    os << "group,nodes";
    for (const auto& p : protocols) os << ',' << p;
    os << '\n';
    // Pause sweep first, then speed sweep, each by group then node count.
    std::vector<std::pair<bool, CellId>> order;
    for (const auto& [id, _] : table) order.emplace_back(is_speed_sweep(id.pause, id.speed), id);
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return !a.first;
      const double ga = a.first ? a.second.speed : a.second.pause;
      const double gb = b.first ? b.second.speed : b.second.pause;
      if (ga != gb) return ga < gb;
      return a.second.nodes < b.second.nodes;
    });
    for (const auto& [_, id] : order) {
      os << group_label(id) << ',' << id.nodes;
      const auto& by_proto = table.at(id);
      for (const auto& p : protocols) {
        os << ',';
        auto it = by_proto.find(p);
        if (it == by_proto.end()) continue;
        const Series& s = it->second.*m.series;
        if (s.values.empty()) continue;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", s.mean());
        os << buf;
      }
      os << '\n';
    }
    write_file(dir / (std::string("pivot_") + m.name + ".csv"), os.str());
  }
}

void write_sweep_results(const fs::path& dir, const std::vector<SweepRun>& runs) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error(dir.string() + ": " + ec.message());
  const auto rows = to_rows(runs);
  {
    std::ostringstream os;
    write_metrics_csv(os, rows);
    write_file(dir / "metrics.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "protocol,nodes,pause,speed,seed,trace_sha256,trace_lines,residual,conserved,paths_checked,"
          "loop_violations,monotonic_steps,monotonic_violations,events,wall_s\n";
    for (const SweepRun& r : runs) {
      const RunResult& x = r.result;
      char wall[32];
      std::snprintf(wall, sizeof wall, "%.3f", x.wall_s);
      os << to_string(r.cfg.protocol) << ',' << r.cfg.nodes << ',' << r.cfg.pause_s << ',' << r.cfg.speed_max << ','
         << r.cfg.seed << ',' << x.trace_digest << ',' << x.trace_lines << ',' << x.held << ','
         << (x.conserved() ? 1 : 0) << ',' << x.delivered_paths_checked << ',' << x.loop_violations << ','
         << x.monotonicity_steps << ',' << x.monotonicity_violations << ',' << x.events << ',' << wall << '\n';
    }
    write_file(dir / "runs.csv", os.str());
  }
  write_pivots(dir, rows);
}

}  // namespace manet
