#pragma once

#include <string>
#include <vector>

namespace playkit {

struct SvgSeries {
  std::string label;
  std::vector<double> ys;  // x is the index
  std::string color;
};

// Minimal line plot with axes, ticks and a legend. `metadata` is embedded as
// an XML comment (config hash, seed list).
void write_line_plot_svg(const std::string& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::vector<SvgSeries>& series,
                         const std::string& metadata);

}  // namespace playkit
