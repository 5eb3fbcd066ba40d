#include "manet/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "manet/checks.hpp"
#include "manet/harness.hpp"
#include "manet/simulation.hpp"

namespace manet {

namespace fs = std::filesystem;

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 420;
constexpr double kLeft = 70;
constexpr double kRight = 120;
constexpr double kTop = 40;
constexpr double kBottom = 50;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

struct Metric {
  const char* file;
  const char* label;
  const Series CellSummary::*series;
};

const Metric kMetrics[] = {{"throughput", "Throughput (delivered / generated)", &CellSummary::throughput},
                           {"avg_delay", "Average delay (s)", &CellSummary::avg_delay},
                           {"dropped", "Dropped packets", &CellSummary::dropped},
                           {"overhead", "Routing overhead (packets)", &CellSummary::overhead}};

struct Point {
  double x;
  double mean, lo, hi;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

/// Round the axis top up to 1, 2 or 5 times a power of ten.
double nice_ceiling(double v) {
  if (v <= 0) return 1;
  const double p = std::pow(10.0, std::floor(std::log10(v)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * p >= v) return m * p;
  }
  return 10 * p;
}

std::string render(const std::string& title, const Metric& metric, const std::vector<std::vector<std::optional<Point>>>& lines) {
  double ymax = 0;
  for (const auto& line : lines) {
    for (const auto& p : line) {
      if (p) ymax = std::max(ymax, p->hi);
    }
  }
  ymax = nice_ceiling(ymax);
  const double x0 = kMatrixNodes[0];
  const double x1 = kMatrixNodes[std::size(kMatrixNodes) - 1];
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return kTop + ph - y / ymax * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  // Axes and grid.
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw << "\" y2=\"" << kTop + ph
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + ph
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double v = ymax * i / 5;
    os << "<line x1=\"" << kLeft << "\" y1=\"" << num(sy(v)) << "\" x2=\"" << kLeft + pw << "\" y2=\"" << num(sy(v))
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(sy(v) + 4) << "\" text-anchor=\"end\">" << tick_label(v)
       << "</text>\n";
  }
  for (int n : kMatrixNodes) {
    os << "<text x=\"" << num(sx(n)) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">" << n
       << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">Number of nodes</text>\n";
  os << "<text transform=\"translate(16," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << metric.label
     << "</text>\n";

  for (std::size_t k = 0; k < lines.size(); ++k) {
    const char* color = kColors[k % std::size(kColors)];
    // Consecutive present points form one polyline; a missing cell breaks it.
    std::string pts;
    auto flush = [&] {
      if (!pts.empty()) {
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"" << pts << "\"/>\n";
      }
      pts.clear();
    };
    for (const auto& p : lines[k]) {
      if (!p) {
        flush();
        continue;
      }
      if (!pts.empty()) pts += ' ';
      pts += num(sx(p->x)) + "," + num(sy(p->mean));
    }
    flush();
    for (const auto& p : lines[k]) {
      if (!p) continue;
      const std::string x = num(sx(p->x));
      os << "<line x1=\"" << x << "\" y1=\"" << num(sy(p->lo)) << "\" x2=\"" << x << "\" y2=\"" << num(sy(p->hi))
         << "\" stroke=\"" << color << "\"/>\n";
      os << "<circle cx=\"" << x << "\" cy=\"" << num(sy(p->mean)) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    const double ly = kTop + 10 + 18 * static_cast<double>(k);
    os << "<line x1=\"" << kWidth - kRight + 15 << "\" y1=\"" << ly << "\" x2=\"" << kWidth - kRight + 35
       << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    std::string name(to_string(kAllProtocols[k]));
    std::transform(name.begin(), name.end(), name.begin(), ::toupper);
    os << "<text x=\"" << kWidth - kRight + 40 << "\" y=\"" << ly + 4 << "\">" << name << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace

PlotResult write_charts(const std::vector<MetricsRow>& rows, const fs::path& out_dir) {
  if (rows.empty()) throw std::invalid_argument("no metrics rows to plot");
  const CellTable table = summarize(rows);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error(out_dir.string() + ": " + ec.message());

  struct Group {
    bool speed_sweep;
    double value;
  };
  std::vector<Group> groups;
  for (double p : kMatrixPauses) groups.push_back({false, p});
  for (double s : kMatrixSpeeds) groups.push_back({true, s});

  PlotResult result;
  for (const Group& g : groups) {
    const double pause = g.speed_sweep ? 2.0 : g.value;
    const double speed = g.speed_sweep ? g.value : 2.0;
    for (int n : kMatrixNodes) {
      auto it = table.find(CellId{n, pause, speed});
      for (Protocol p : kAllProtocols) {
        const std::string name(to_string(p));
        if (it == table.end() || !it->second.count(name)) {
          char buf[96];
          std::snprintf(buf, sizeof buf, "%s nodes=%d pause=%g speed=%g", name.c_str(), n, pause, speed);
          result.missing.emplace_back(buf);
        }
      }
    }
    for (const Metric& m : kMetrics) {
      std::vector<std::vector<std::optional<Point>>> lines;
      for (Protocol p : kAllProtocols) {
        const std::string name(to_string(p));
        std::vector<std::optional<Point>> line;
        for (int n : kMatrixNodes) {
          auto it = table.find(CellId{n, pause, speed});
          if (it == table.end() || !it->second.count(name)) {
            line.emplace_back();
            continue;
          }
          const Series& s = it->second.at(name).*m.series;
          if (s.values.empty()) {
            line.emplace_back();
          } else {
            line.push_back(Point{static_cast<double>(n), s.mean(), s.min(), s.max()});
          }
        }
        lines.push_back(std::move(line));
      }
      char stem[64];
      char title[96];
      if (g.speed_sweep) {
        std::snprintf(stem, sizeof stem, "%s_speed%g.svg", m.file, g.value);
        std::snprintf(title, sizeof title, "%s, max speed %g m/s, pause 2 s", m.label, g.value);
      } else {
        std::snprintf(stem, sizeof stem, "%s_pause%g.svg", m.file, g.value);
        std::snprintf(title, sizeof title, "%s, pause %g s, max speed 2 m/s", m.label, g.value);
      }
      const fs::path path = out_dir / stem;
      std::ofstream out(path);
      if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
      out << render(title, m, lines);
      if (!out) throw std::runtime_error(path.string() + ": write failed");
      result.files.push_back(path);
    }
  }
  return result;
}

}  // namespace manet
