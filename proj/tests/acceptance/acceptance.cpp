// Acceptance suite: one PASS/FAIL line per criterion. Exit status 1 if any fails.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <cmath>
#include <string>
#include <vector>

#include "manet/checks.hpp"
#include "manet/dsdv.hpp"
#include "manet/dsr.hpp"
#include "manet/aodv.hpp"
#include "manet/harness.hpp"
#include "manet/plot.hpp"
#include "manet/simulation.hpp"
#include "manet/zrp.hpp"
#include "support.hpp"

using namespace manet;

namespace {

struct Line {
  int id;
  bool pass;
  std::string text;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SimulationSetup setup_from(const ScenarioConfig& cfg, const Scenario& scen) {
  SimulationSetup s;
  s.protocol = cfg.protocol;
  s.mobility = scen.mobility;
  s.traffic = scen.traffic;
  s.radio = cfg.radio;
  s.params = cfg.params;
  s.seed = cfg.seed;
  s.duration_s = cfg.duration_s;
  return s;
}

// ---- 7: determinism -------------------------------------------------------

Line determinism(int configs) {
  RandomStream rng(7007, StreamLabel::Traffic);
  struct Case {
    ScenarioConfig cfg;
    Scenario scen;
    std::string digest;
    std::uint64_t lines = 0;
  };
  std::vector<Case> cases;
  for (int i = 0; i < configs; ++i) {
    ScenarioConfig cfg;
    cfg.protocol = kAllProtocols[rng.below(4)];
    cfg.nodes = 5 + static_cast<int>(rng.below(46));
    cfg.pause_s = std::round(rng.uniform(0, 200));
    cfg.speed_max = std::round(rng.uniform(2, 25));
    cfg.duration_s = std::round(rng.uniform(20, 60));
    cfg.seed = rng.next_u64() >> 20;
    cases.push_back({cfg, generate_scenario(cfg), {}, 0});
  }
  for (auto& c : cases) {
    const auto r = execute_run(c.cfg, c.scen);
    c.digest = r.trace_digest;
    c.lines = r.trace_lines;
  }
  // Second pass in reverse order, scenarios regenerated from the config.
  int mismatched = 0;
  for (auto it = cases.rbegin(); it != cases.rend(); ++it) {
    const auto r = execute_run(it->cfg, generate_scenario(it->cfg));
    if (r.trace_digest != it->digest || r.trace_lines != it->lines) ++mismatched;
  }
  return {7, mismatched == 0,
          fmt("determinism: %d/%d randomized configs reproduce a byte-identical trace", configs - mismatched, configs)};
}

// ---- 8: static sanity -----------------------------------------------------

Line static_sanity(int seeds) {
  const auto pos = support::grid(5, 5);
  double worst = 1.0;
  std::string worst_case;
  int failing = 0;
  for (Protocol p : kAllProtocols) {
    for (int s = 1; s <= seeds; ++s) {
      ScenarioConfig cfg;
      cfg.protocol = p;
      cfg.nodes = 25;
      cfg.connections = 4;
      cfg.seed = static_cast<std::uint64_t>(s);
      Scenario scen = generate_scenario(cfg);
      scen.mobility = static_plan(support::area_for(pos), cfg.duration_s, pos);
      TraceBuffer trace;
      Simulation sim(setup_from(cfg, scen), trace);
      sim.run();
      std::set<PacketUid> counted;
      std::size_t sent = 0, received = 0;
      for (const auto& r : trace.records) {
        if (r.ptype != PacketType::Cbr || r.layer != Layer::Agent) continue;
        if (r.event == TraceEvent::Send && r.time >= seconds(10)) {
          counted.insert(r.uid);
          ++sent;
        } else if (r.event == TraceEvent::Receive && counted.count(r.uid)) {
          ++received;
        }
      }
      const double ratio = sent ? static_cast<double>(received) / static_cast<double>(sent) : 0.0;
      if (ratio < 0.99) ++failing;
      if (worst_case.empty() || ratio < worst) {
        worst = ratio;
        worst_case = fmt("%s seed %d", std::string(to_string(p)).c_str(), s);
      }
    }
  }
  return {8, failing == 0,
          fmt("static sanity: 5x5 grid, 4 flows, 10 s warm-up: %d/%d runs below 0.99; lowest %.4f (%s)", failing,
              4 * seeds, worst, worst_case.c_str())};
}

// ---- 9: BFS oracle --------------------------------------------------------

std::vector<Position> random_connected(RandomStream& rng, int n) {
  const double side = std::sqrt(static_cast<double>(n)) * 170.0;
  for (;;) {
    std::vector<Position> pos;
    for (int i = 0; i < n; ++i) pos.push_back({rng.uniform(0, side), rng.uniform(0, side)});
    const auto d = support::bfs_all(pos);
    bool connected = true;
    for (int v = 0; v < n; ++v) connected = connected && d[0][static_cast<std::size_t>(v)] >= 0;
    if (connected) return pos;
  }
}

Line bfs_oracle(int topologies) {
  RandomStream rng(9009, StreamLabel::Mobility);
  int dsdv_bad = 0, zrp_bad = 0, aodv_bad = 0, dsr_bad = 0;
  std::size_t aodv_routes = 0, dsr_routes = 0;
  for (int t = 0; t < topologies; ++t) {
    const int n = 2 + static_cast<int>(rng.below(14));
    const auto pos = random_connected(rng, n);
    const auto bfs = support::bfs_all(pos);
    const auto seed = static_cast<std::uint64_t>(t + 1);

    {
      NullTraceSink sink;
      Simulation sim(support::static_setup(Protocol::Dsdv, pos, {}, 150, seed), sink);
      sim.run_until(seconds(135));  // three full-dump intervals
      bool ok = true;
      for (NodeId s = 0; s < n; ++s) {
        auto& a = sim.agent_as<DsdvAgent>(s);
        for (NodeId d = 0; d < n; ++d) {
          const auto& e = a.entry(d);
          ok = ok && e && e->metric == static_cast<std::uint32_t>(bfs[s][d]);
        }
      }
      dsdv_bad += ok ? 0 : 1;
    }
    {
      NullTraceSink sink;
      auto setup = support::static_setup(Protocol::Zrp, pos, {}, 30, seed);
      const int r = setup.params.zrp.radius;
      Simulation sim(setup, sink);
      sim.run_until(seconds(20));
      bool ok = true;
      for (NodeId s = 0; s < n; ++s) {
        std::vector<NodeId> zone, periph;
        for (NodeId v = 0; v < n; ++v) {
          if (bfs[s][v] <= r) zone.push_back(v);
          if (bfs[s][v] == r) periph.push_back(v);
        }
        auto& a = sim.agent_as<ZrpAgent>(s);
        ok = ok && a.zone() == zone && a.peripheral() == periph;
      }
      zrp_bad += ok ? 0 : 1;
    }

    // Three flows between distinct random pairs, for the reactive protocols.
    std::vector<Connection> flows;
    if (n >= 2) {
      std::set<std::pair<NodeId, NodeId>> pairs;
      while (pairs.size() < std::min<std::size_t>(3, static_cast<std::size_t>(n * (n - 1)))) {
        const auto a = static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(n)));
        const auto b = static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(n)));
        if (a != b) pairs.insert({a, b});
      }
      double start = 1.0;
      for (const auto& [a, b] : pairs) {
        flows.push_back(support::flow(a, b, start));
        start += 0.5;
      }
    }
    {
      NullTraceSink sink;
      Simulation sim(support::static_setup(Protocol::Aodv, pos, flows, 20, seed), sink);
      sim.run();
      bool ok = true;
      for (const auto& f : flows) {
        const AodvRoute* route = sim.agent_as<AodvAgent>(f.src).valid_route(f.dst);
        ok = ok && route && route->hops <= static_cast<std::uint32_t>(bfs[f.src][f.dst] + 1);
        ++aodv_routes;
      }
      aodv_bad += ok ? 0 : 1;
    }
    {
      NullTraceSink sink;
      Simulation sim(support::static_setup(Protocol::Dsr, pos, flows, 20, seed), sink);
      sim.run();
      bool ok = true;
      for (NodeId s = 0; s < n; ++s) {
        for (const auto& e : sim.agent_as<DsrAgent>(s).cache().entries()) {
          ok = ok && e.route.front() == s && !has_duplicates(e.route);
          for (std::size_t i = 0; i + 1 < e.route.size(); ++i) {
            ok = ok && distance(pos[static_cast<std::size_t>(e.route[i])], pos[static_cast<std::size_t>(e.route[i + 1])]) <= 250.0;
          }
          ++dsr_routes;
        }
      }
      dsr_bad += ok ? 0 : 1;
    }
  }
  const bool pass = dsdv_bad + zrp_bad + aodv_bad + dsr_bad == 0;
  return {9, pass,
          fmt("BFS oracle over %d static topologies: topologies failing DSDV hops=%d, ZRP zones=%d, AODV length<=BFS+1=%d "
              "(%zu routes), DSR valid paths=%d (%zu cached routes)",
              topologies, dsdv_bad, zrp_bad, aodv_bad, aodv_routes, dsr_bad, dsr_routes)};
}

// ---- 12: DSR silence ------------------------------------------------------

Line dsr_silence() {
  const std::vector<std::vector<Position>> topologies = {support::chain(5), support::grid(3, 3), support::grid(5, 5)};
  std::uint64_t dsr_packets = 0;
  bool dsdv_ok = true;
  std::string dsdv_detail;
  for (const auto& pos : topologies) {
    const int n = static_cast<int>(pos.size());
    TraceBuffer dsr_trace;
    Simulation dsr(support::static_setup(Protocol::Dsr, pos, {}, 150), dsr_trace);
    dsr.run();
    dsr_packets += support::count(dsr_trace.records, support::is_overhead);

    TraceBuffer dsdv_trace;
    Simulation dsdv(support::static_setup(Protocol::Dsdv, pos, {}, 150), dsdv_trace);
    dsdv.run();
    const auto sent = support::count(dsdv_trace.records, support::is_overhead);
    const auto floor = static_cast<std::size_t>(n) * 10;
    dsdv_ok = dsdv_ok && sent >= floor;
    dsdv_detail += fmt(" n=%d: %zu (floor %zu);", n, sent, floor);
  }
  return {12, dsr_packets == 0 && dsdv_ok,
          fmt("silence: DSR routing packets with no traffic = %llu; DSDV periodic sends:%s",
              static_cast<unsigned long long>(dsr_packets), dsdv_detail.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  int seeds = 5;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::string out = "acceptance_results";
  app.add_option("--seeds", seeds, "Seeds per matrix cell")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--jobs", jobs, "Concurrent sweep runs")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--out", out, "Directory for sweep results and charts")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<Line> lines;

  SweepOptions opts;
  opts.seeds = seeds;
  opts.jobs = jobs;
  opts.audit = true;
  opts.progress = [](std::size_t done, std::size_t total) {
    if (done % 50 == 0 || done == total) std::fprintf(stderr, "sweep %zu/%zu\n", done, total);
  };
  const auto runs = run_sweep(opts);
  const auto rows = to_rows(runs);
  write_sweep_results(out, runs);
  write_charts(rows, std::filesystem::path(out) / "charts");
  const double sweep_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  for (const CriterionResult& c : evaluate_trends(rows)) lines.push_back({c.id, c.pass, c.name + ": " + c.detail});

  {
    std::size_t unbalanced = 0;
    for (const auto& r : runs) unbalanced += r.result.conserved() ? 0 : 1;
    lines.push_back({10, unbalanced == 0,
                     fmt("conservation: generated = delivered + dropped + residual in %zu/%zu runs",
                         runs.size() - unbalanced, runs.size())});
  }
  {
    std::map<std::string, std::uint64_t> loops, mono, paths;
    std::uint64_t loop_total = 0, mono_total = 0, steps = 0;
    for (const auto& r : runs) {
      const std::string p(to_string(r.cfg.protocol));
      loops[p] += r.result.loop_violations;
      mono[p] += r.result.monotonicity_violations;
      paths[p] += r.result.delivered_paths_checked;
      loop_total += r.result.loop_violations;
      mono_total += r.result.monotonicity_violations;
      steps += r.result.monotonicity_steps;
    }
    std::string per;
    for (const auto& [p, v] : loops) {
      per += fmt(" %s %llu/%llu;", p.c_str(), static_cast<unsigned long long>(v),
                 static_cast<unsigned long long>(paths[p]));
    }
    lines.push_back({11, loop_total == 0 && mono_total == 0,
                     fmt("loop freedom: delivered paths revisiting a node:%s AODV (seq,-hops) violations %llu over %llu "
                         "forwarding steps",
                         per.c_str(), static_cast<unsigned long long>(mono_total),
                         static_cast<unsigned long long>(steps))});
  }

  lines.push_back(determinism(50));
  lines.push_back(static_sanity(5));
  lines.push_back(bfs_oracle(100));
  lines.push_back(dsr_silence());

  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) { return a.id < b.id; });
  int passed = 0;
  for (const Line& l : lines) {
    std::printf("%s criterion %d: %s\n", l.pass ? "PASS" : "FAIL", l.id, l.text.c_str());
    passed += l.pass ? 1 : 0;
  }
  const double total_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("acceptance: %d/%zu criteria passed (sweep of %zu runs %.0f s, total %.0f s; results in %s)\n", passed,
              lines.size(), runs.size(), sweep_s, total_s, out.c_str());
  return passed == static_cast<int>(lines.size()) ? 0 : 1;
}
