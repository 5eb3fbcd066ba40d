#include "manet/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "manet/harness.hpp"

namespace manet {

void LoopAuditor::record(const TraceRecord& rec) {
  if (rec.ptype != PacketType::Cbr) return;
  if (rec.event == TraceEvent::Send && rec.layer == Layer::Agent) {
    paths_[rec.uid] = {rec.node};
  } else if (rec.event == TraceEvent::Forward && rec.layer == Layer::Router) {
    auto it = paths_.find(rec.uid);
    if (it != paths_.end()) it->second.push_back(rec.node);
  } else if (rec.event == TraceEvent::Receive && rec.layer == Layer::Agent) {
    auto it = paths_.find(rec.uid);
    if (it == paths_.end()) return;
    std::vector<NodeId> path = std::move(it->second);
    paths_.erase(it);
    path.push_back(rec.node);
    ++checked_;
    std::sort(path.begin(), path.end());
    if (std::adjacent_find(path.begin(), path.end()) != path.end()) ++violations_;
  } else if (rec.event == TraceEvent::Drop) {
    paths_.erase(rec.uid);
  }
}

void MonotonicityAuditor::observe(const ForwardStep& step) {
  const PacketUid uid = step.packet.uid;
  if (step.node == step.packet.src || !step.route) {
    if (step.route) {
      last_[uid] = *step.route;
    } else {
      last_.erase(uid);
    }
    return;
  }
  ++steps_;
  auto it = last_.find(uid);
  if (it != last_.end()) {
    const RouteSnapshot& prev = it->second;
    const RouteSnapshot& cur = *step.route;
    const bool better = cur.dest_seq > prev.dest_seq || (cur.dest_seq == prev.dest_seq && cur.hops < prev.hops);
    if (!better) ++violations_;
  }
  last_[uid] = *step.route;
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

double Series::mean() const {
  if (values.empty()) return std::nan("");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}
double Series::min() const { return values.empty() ? std::nan("") : *std::min_element(values.begin(), values.end()); }
double Series::max() const { return values.empty() ? std::nan("") : *std::max_element(values.begin(), values.end()); }

CellTable summarize(const std::vector<MetricsRow>& rows) {
  CellTable t;
  for (const MetricsRow& r : rows) {
    CellSummary& s = t[CellId{r.key.nodes, r.key.pause, r.key.speed}][r.key.protocol];
    if (r.report.throughput) s.throughput.values.push_back(*r.report.throughput);
    if (r.report.avg_delay_s) s.avg_delay.values.push_back(*r.report.avg_delay_s);
    s.dropped.values.push_back(static_cast<double>(r.report.dropped));
    s.overhead.values.push_back(static_cast<double>(r.report.overhead));
  }
  return t;
}

namespace {

const CellSummary* find(const std::map<std::string, CellSummary>& m, const char* p) {
  auto it = m.find(p);
  return it == m.end() ? nullptr : &it->second;
}

std::string fraction(int hits, int total) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%d/%d cells (%.1f%%)", hits, total, total ? 100.0 * hits / total : 0.0);
  return buf;
}

template <class Pred>
CriterionResult cell_fraction(int id, std::string name, const CellTable& t, double threshold, Pred pred) {
  int hits = 0;
  int total = 0;
  for (const auto& [cell, by_proto] : t) {
    ++total;
    if (pred(by_proto)) ++hits;
  }
  CriterionResult r{id, std::move(name), false, fraction(hits, total)};
  r.pass = total > 0 && static_cast<double>(hits) >= threshold * total - 1e-9;
  char buf[32];
  std::snprintf(buf, sizeof buf, ", need >= %.0f%%", threshold * 100);
  r.detail += buf;
  return r;
}

}  // namespace

std::vector<CriterionResult> evaluate_trends(const std::vector<MetricsRow>& rows) {
  const CellTable t = summarize(rows);
  using M = std::map<std::string, CellSummary>;
  std::vector<CriterionResult> out;

  out.push_back(cell_fraction(1, "AODV throughput >= every other protocol", t, 0.6, [](const M& m) {
    const CellSummary* a = find(m, "aodv");
    if (!a || a->throughput.values.empty()) return false;
    for (const char* p : {"dsdv", "dsr", "zrp"}) {
      const CellSummary* o = find(m, p);
      if (!o || o->throughput.values.empty()) return false;
      if (a->throughput.mean() < o->throughput.mean()) return false;
    }
    return true;
  }));

  out.push_back(cell_fraction(2, "DSDV drops > AODV and DSR drops", t, 0.6, [](const M& m) {
    const CellSummary *d = find(m, "dsdv"), *a = find(m, "aodv"), *s = find(m, "dsr");
    if (!d || !a || !s) return false;
    return d->dropped.mean() > a->dropped.mean() && d->dropped.mean() > s->dropped.mean();
  }));

  out.push_back(cell_fraction(3, "max(ZRP, AODV) overhead > max(DSR, DSDV) overhead", t, 0.7, [](const M& m) {
    const CellSummary *z = find(m, "zrp"), *a = find(m, "aodv"), *s = find(m, "dsr"), *d = find(m, "dsdv");
    if (!z || !a || !s || !d) return false;
    return std::max(z->overhead.mean(), a->overhead.mean()) > std::max(s->overhead.mean(), d->overhead.mean());
  }));

  {
    // Sweep rows: fixed pause (pause sweep) or fixed max speed (speed sweep).
    std::map<std::pair<bool, double>, std::map<std::string, std::vector<std::pair<int, double>>>> series;
    for (const auto& [cell, by_proto] : t) {
      const bool speed = is_speed_sweep(cell.pause, cell.speed);
      for (const auto& [p, s] : by_proto) {
        series[{speed, speed ? cell.speed : cell.pause}][p].emplace_back(cell.nodes, s.overhead.mean());
      }
    }
    CriterionResult r{4, "overhead rank-correlates with node count (Spearman >= 0.7 per protocol and row)", true, ""};
    int checked = 0;
    int failed = 0;
    double worst = 1.0;
    std::string worst_where;
    for (const auto& [row, by_proto] : series) {
      for (const auto& [p, pts] : by_proto) {
        std::vector<double> x, y;
        for (const auto& [n, v] : pts) {
          x.push_back(n);
          y.push_back(v);
        }
        ++checked;
        const auto rho = spearman(x, y);
        const double v = rho.value_or(0.0);
        if (pts.size() < 2 || v < 0.7) ++failed;
        if (worst_where.empty() || v < worst) {
          worst = v;
          char buf[64];
          std::snprintf(buf, sizeof buf, "%s %s=%g", p.c_str(), row.first ? "speed" : "pause", row.second);
          worst_where = buf;
        }
      }
    }
    r.pass = checked > 0 && failed == 0;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d/%d rows below 0.7; lowest rho %.3f (%s)", failed, checked, worst,
                  worst_where.c_str());
    r.detail = buf;
    out.push_back(r);
  }

  out.push_back(cell_fraction(5, "DSDV average delay < AODV average delay", t, 0.6, [](const M& m) {
    const CellSummary *d = find(m, "dsdv"), *a = find(m, "aodv");
    if (!d || !a || d->avg_delay.values.empty() || a->avg_delay.values.empty()) return false;
    return d->avg_delay.mean() < a->avg_delay.mean();
  }));

  out.push_back(cell_fraction(6, "DSR drops <= AODV drops", t, 0.5, [](const M& m) {
    const CellSummary *s = find(m, "dsr"), *a = find(m, "aodv");
    if (!s || !a) return false;
    return s->dropped.mean() <= a->dropped.mean();
  }));
  return out;
}

}  // namespace manet
