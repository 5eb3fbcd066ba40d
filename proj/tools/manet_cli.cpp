#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "manet/checks.hpp"
#include "manet/config.hpp"
#include "manet/harness.hpp"
#include "manet/metrics.hpp"
#include "manet/plot.hpp"

namespace fs = std::filesystem;
using namespace manet;

namespace {

enum Exit { kOk = 0, kBadArgs = 1, kRuntime = 2, kCheckFailed = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::pair<std::string, std::string>> load_overrides(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw UsageError(path + ": cannot open");
  try {
    return read_key_values(in);
  } catch (const ConfigError& e) {
    throw UsageError(path + ": " + e.what());
  }
}

void apply_all(ScenarioConfig& cfg, const std::vector<std::pair<std::string, std::string>>& kv,
               const std::string& origin) {
  for (const auto& [k, v] : kv) {
    try {
      apply_override(cfg, k, v);
    } catch (const ConfigError& e) {
      throw UsageError(origin + ": " + e.what());
    }
  }
}

Protocol parse_protocol(const std::string& s) {
  auto p = protocol_from(s);
  if (!p) throw UsageError("unknown protocol '" + s + "' (expected dsdv, aodv, dsr or zrp)");
  return *p;
}

void print_report(const MetricsReport& r) {
  std::printf("generated %llu delivered %llu dropped %llu overhead %llu\n",
              static_cast<unsigned long long>(r.generated), static_cast<unsigned long long>(r.delivered),
              static_cast<unsigned long long>(r.dropped), static_cast<unsigned long long>(r.overhead));
  if (r.throughput) std::printf("throughput %.6f\n", *r.throughput);
  if (r.avg_delay_s) std::printf("avg_delay_s %.6f\n", *r.avg_delay_s);
}

int run_trace(const ScenarioConfig& cfg, const Scenario& scenario, const std::string& out_path,
              const std::vector<std::pair<std::string, std::string>>& overrides, const std::string& expect_digest) {
  std::ofstream trace(out_path, std::ios::binary);
  if (!trace) throw std::runtime_error(out_path + ": cannot open for writing");
  RunOptions opts;
  opts.trace = &trace;
  const RunResult result = execute_run(cfg, scenario, opts);
  trace.flush();
  if (!trace) throw std::runtime_error(out_path + ": write failed");

  const std::string manifest_path = out_path + ".manifest";
  std::ofstream manifest(manifest_path);
  if (!manifest) throw std::runtime_error(manifest_path + ": cannot open for writing");
  write_manifest(manifest, cfg, overrides, scenario, result);
  if (!manifest) throw std::runtime_error(manifest_path + ": write failed");

  print_report(result.report);
  std::printf("residual %llu\ntrace_sha256 %s\n", static_cast<unsigned long long>(result.held),
              result.trace_digest.c_str());
  if (!expect_digest.empty() && expect_digest != result.trace_digest) {
    std::fprintf(stderr, "trace digest differs from manifest (%s)\n", expect_digest.c_str());
    return kRuntime;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mobile ad-hoc network routing simulator and benchmark harness"};
  app.require_subcommand(1);

  // scen gen
  auto* scen = app.add_subcommand("scen", "Scenario files");
  scen->require_subcommand(1);
  auto* gen = scen->add_subcommand("gen", "Generate movement and traffic files");
  ScenarioConfig gen_cfg;
  std::string gen_out;
  gen->add_option("--nodes", gen_cfg.nodes, "Node count")->required()->check(CLI::Range(2, 100000));
  gen->add_option("--pause", gen_cfg.pause_s, "Pause time (s)")->required()->check(CLI::NonNegativeNumber);
  gen->add_option("--speed-max", gen_cfg.speed_max, "Maximum speed (m/s)")->required()->check(CLI::NonNegativeNumber);
  gen->add_option("--speed-min", gen_cfg.speed_min, "Minimum speed (m/s)")->capture_default_str();
  gen->add_option("--seed", gen_cfg.seed, "Scenario seed")->required();
  gen->add_option("--duration", gen_cfg.duration_s, "Simulated seconds")->capture_default_str();
  gen->add_option("--connections", gen_cfg.connections, "CBR flows (default by node count)");
  gen->add_option("--out", gen_out, "Output directory")->required();

  // run
  auto* run = app.add_subcommand("run", "Simulate one protocol over a scenario directory");
  std::string run_protocol, run_scenario, run_out, run_config;
  run->add_option("--protocol", run_protocol, "dsdv|aodv|dsr|zrp")->required();
  run->add_option("--scenario", run_scenario, "Directory written by 'scen gen'")->required();
  run->add_option("--out", run_out, "Trace file")->required();
  run->add_option("--config", run_config, "Overrides file (key = value)");

  // replay
  auto* replay = app.add_subcommand("replay", "Regenerate a trace from its run manifest");
  std::string replay_manifest, replay_out;
  replay->add_option("--manifest", replay_manifest, "Manifest written next to a trace")->required();
  replay->add_option("--out", replay_out, "Trace file")->required();

  // metrics
  auto* metrics = app.add_subcommand("metrics", "Compute metrics from a trace file");
  std::string metrics_trace, metrics_out;
  metrics->add_option("--trace", metrics_trace, "Trace file")->required();
  metrics->add_option("--out", metrics_out, "CSV report")->required();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run the full experiment matrix");
  int sweep_seeds = 5;
  std::string sweep_out, sweep_protocols = "dsdv,aodv,dsr,zrp", sweep_config;
  int sweep_jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  bool sweep_check = false;
  bool sweep_quiet = false;
  sweep->add_option("--seeds", sweep_seeds, "Seeds per cell")->capture_default_str()->check(CLI::PositiveNumber);
  sweep->add_option("--out", sweep_out, "Results directory")->required();
  sweep->add_option("--protocols", sweep_protocols, "Comma-separated protocol list")->capture_default_str();
  sweep->add_option("--jobs", sweep_jobs, "Concurrent runs")->capture_default_str()->check(CLI::PositiveNumber);
  sweep->add_option("--config", sweep_config, "Overrides file applied to every run");
  sweep->add_flag("--check", sweep_check, "Evaluate trend and audit checks; exit 3 on failure");
  sweep->add_flag("--quiet", sweep_quiet, "No progress output");

  // plot
  auto* plot = app.add_subcommand("plot", "Emit SVG charts from metrics.csv");
  std::string plot_results, plot_out;
  plot->add_option("--results", plot_results, "metrics.csv from a sweep")->required();
  plot->add_option("--out", plot_out, "Chart directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadArgs;
  }

  try {
    if (gen->parsed()) {
      if (gen_cfg.speed_min > gen_cfg.speed_max) {
        // A zero or small maximum means a slow (or static) scenario.
        gen_cfg.speed_min = gen_cfg.speed_max;
      }
      Scenario s;
      try {
        s = generate_scenario(gen_cfg);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      write_scenario_dir(gen_out, gen_cfg, s);
      std::printf("wrote %s (%d nodes, %zu connections)\n", gen_out.c_str(), gen_cfg.nodes,
                  s.traffic.connections.size());
      return kOk;
    }

    if (run->parsed()) {
      ScenarioConfig cfg;
      cfg.protocol = parse_protocol(run_protocol);
      if (!fs::is_directory(run_scenario)) throw UsageError(run_scenario + ": not a scenario directory");
      const Scenario s = read_scenario_dir(run_scenario, cfg);
      const auto overrides = load_overrides(run_config);
      apply_all(cfg, overrides, run_config);
      return run_trace(cfg, s, run_out, overrides, "");
    }

    if (replay->parsed()) {
      std::ifstream in(replay_manifest);
      if (!in) throw UsageError(replay_manifest + ": cannot open");
      Manifest m;
      try {
        m = read_manifest(in);
      } catch (const ConfigError& e) {
        throw UsageError(replay_manifest + ": " + e.what());
      }
      const Scenario s = generate_scenario(m.cfg);
      if (movement_digest(s.mobility) != m.movement_digest || traffic_digest(s.traffic) != m.traffic_digest) {
        throw std::runtime_error(replay_manifest + ": scenario files do not match the seed");
      }
      // Overrides are already folded into m.cfg; re-emit them for the new manifest.
      std::ifstream again(replay_manifest);
      std::vector<std::pair<std::string, std::string>> kv;
      for (auto& p : read_key_values(again)) {
        if (p.first.rfind("run.", 0) != 0) kv.push_back(std::move(p));
      }
      return run_trace(m.cfg, s, replay_out, kv, m.trace_digest);
    }

    if (metrics->parsed()) {
      std::ifstream in(metrics_trace, std::ios::binary);
      if (!in) throw UsageError(metrics_trace + ": cannot open");
      MetricsReport report;
      try {
        report = compute_metrics(in);
      } catch (const TraceParseError& e) {
        throw std::runtime_error(metrics_trace + ": " + e.what());
      }
      RunKey key;
      std::ifstream manifest(metrics_trace + ".manifest");
      if (manifest) key = run_key(read_manifest(manifest).cfg);
      std::ofstream out(metrics_out);
      if (!out) throw std::runtime_error(metrics_out + ": cannot open for writing");
      write_metrics_csv(out, {MetricsRow{key, report}});
      if (!out) throw std::runtime_error(metrics_out + ": write failed");
      print_report(report);
      return kOk;
    }

    if (sweep->parsed()) {
      SweepOptions opts;
      opts.seeds = sweep_seeds;
      opts.jobs = sweep_jobs;
      opts.protocols.clear();
      std::stringstream ss(sweep_protocols);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (!item.empty()) opts.protocols.push_back(parse_protocol(item));
      }
      if (opts.protocols.empty()) throw UsageError("--protocols is empty");
      opts.overrides = load_overrides(sweep_config);
      {
        ScenarioConfig probe;
        apply_all(probe, opts.overrides, sweep_config);
      }
      if (!sweep_quiet) {
        opts.progress = [](std::size_t done, std::size_t total) {
          if (done % 20 == 0 || done == total) std::fprintf(stderr, "\r%zu/%zu runs", done, total);
          if (done == total) std::fputc('\n', stderr);
        };
      }
      const auto runs = run_sweep(opts);
      write_sweep_results(sweep_out, runs);
      std::printf("wrote %zu runs to %s\n", runs.size(), sweep_out.c_str());
      if (!sweep_check) return kOk;

      bool ok = true;
      for (const CriterionResult& c : evaluate_trends(to_rows(runs))) {
        std::printf("%s trend %d: %s: %s\n", c.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), c.detail.c_str());
        ok = ok && c.pass;
      }
      std::size_t unconserved = 0, loops = 0, mono = 0;
      for (const SweepRun& r : runs) {
        unconserved += r.result.conserved() ? 0 : 1;
        loops += r.result.loop_violations;
        mono += r.result.monotonicity_violations;
      }
      std::printf("%s conservation: %zu runs unbalanced\n", unconserved ? "FAIL" : "PASS", unconserved);
      std::printf("%s loop freedom: %zu looping paths, %zu monotonicity violations\n",
                  loops + mono ? "FAIL" : "PASS", loops, mono);
      ok = ok && unconserved == 0 && loops + mono == 0;
      return ok ? kOk : kCheckFailed;
    }

    if (plot->parsed()) {
      std::ifstream in(plot_results);
      if (!in) throw UsageError(plot_results + ": cannot open");
      const auto rows = read_metrics_csv(in);
      if (rows.empty()) throw std::runtime_error(plot_results + ": no rows");
      const PlotResult res = write_charts(rows, plot_out);
      if (!res.missing.empty()) {
        std::fprintf(stderr, "warning: %zu absent cells, charts have gaps:\n", res.missing.size());
        for (const auto& m : res.missing) std::fprintf(stderr, "  %s\n", m.c_str());
      }
      std::printf("wrote %zu charts to %s\n", res.files.size(), plot_out.c_str());
      return kOk;
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBadArgs;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntime;
  }
  return kBadArgs;
}
