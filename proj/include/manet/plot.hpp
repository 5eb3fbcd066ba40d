#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "manet/metrics.hpp"

namespace manet {

struct PlotResult {
  std::vector<std::filesystem::path> files;
  /// Matrix cells (and protocols) that had no rows, one entry per gap.
  std::vector<std::string> missing;
};

/// One SVG per (metric, sweep group): x = node count, one polyline per
/// protocol through the seed means, min-max whiskers. Absent cells leave
/// gaps and are listed in PlotResult::missing. Throws std::invalid_argument
/// on empty input without writing anything.
PlotResult write_charts(const std::vector<MetricsRow>& rows, const std::filesystem::path& out_dir);

}  // namespace manet
