#pragma once

#include <string>
#include <vector>

namespace robust_unmix::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  /// Plot the x axis decreasing from left to right (SNR sweeps read best-to-worst).
  bool reverse_x = false;
  bool markers = true;
};

/// Stand-alone SVG document with axes, ticks, one polyline per series and a legend.
/// Non-finite points are skipped. Output depends only on the input values.
std::string render_svg(const LinePlot& plot);

void write_svg(const LinePlot& plot, const std::string& path);

}  // namespace robust_unmix::cli
