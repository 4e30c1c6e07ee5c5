#pragma once

#include <span>
#include <string>
#include <vector>

namespace ccmap {

struct XY {
  double x = 0.0;
  double y = 0.0;
};

struct SvgSeries {
  std::string name;
  std::string color = "#333333";
  std::vector<XY> points;
  bool line = false;  // polyline instead of markers
  bool dashed = false;
};

/// Standalone SVG plot. Every series is also embedded as CSV inside <metadata> so the file
/// can be read without a plotting tool.
std::string render_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                       std::span<const SvgSeries> series);

}  // namespace ccmap
