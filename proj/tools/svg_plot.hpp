#pragma once

#include <string>
#include <vector>

namespace rtdcm::tools {

struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  std::string label;
  bool markers = false;
  bool dashed = false;
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::vector<double> vertical_lines;  // e.g. disk positions
  bool equal_aspect = false;
};

/// Static line plot, panels laid out in a grid with `columns` columns.
std::string render_svg(const std::vector<Panel>& panels, int columns = 1, int panel_width = 560,
                       int panel_height = 300);

}  // namespace rtdcm::tools
