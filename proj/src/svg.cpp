#include "playkit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace playkit {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

void write_line_plot_svg(const std::string& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::vector<SvgSeries>& series,
                         const std::string& metadata) {
  const double W = 640, H = 420;
  const double ml = 56, mr = 140, mt = 36, mb = 48;
  const double pw = W - ml - mr, ph = H - mt - mb;

  size_t n = 0;
  double ymax = 1.0;
  for (const auto& s : series) {
    n = std::max(n, s.ys.size());
    for (double y : s.ys) ymax = std::max(ymax, y);
  }
  const double xmax = n > 1 ? static_cast<double>(n - 1) : 1.0;
  ymax *= 1.05;

  auto px = [&](double x) { return ml + pw * (x / xmax); };
  auto py = [&](double y) { return mt + ph * (1.0 - y / ymax); };

  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write SVG '" + path + "'");
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
     << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  os << "<!-- " << metadata << " -->\n";
  os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"14\">"
     << title << "</text>\n";

  // Axes.
  os << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw
     << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
     << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmax * i / 4.0;
    const double yv = ymax * i / 4.0;
    os << "<text x=\"" << px(xv) << "\" y=\"" << mt + ph + 16
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"10\">"
       << fmt(xv) << "</text>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << py(yv) + 3
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
       << fmt(yv) << "</text>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << py(yv) << "\" x2=\"" << ml + pw
       << "\" y2=\"" << py(yv)
       << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
  }
  os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 10
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
     << x_label << "</text>\n";
  os << "<text x=\"14\" y=\"" << mt + ph / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        "transform=\"rotate(-90 14 "
     << mt + ph / 2 << ")\">" << y_label << "</text>\n";

  // Series.
  double legend_y = mt + 10;
  for (const auto& s : series) {
    if (s.ys.empty()) continue;
    os << "<polyline fill=\"none\" stroke=\"" << s.color
       << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < s.ys.size(); ++i)
      os << fmt(px(static_cast<double>(i))) << "," << fmt(py(s.ys[i])) << " ";
    os << "\"/>\n";
    os << "<line x1=\"" << ml + pw + 8 << "\" y1=\"" << legend_y << "\" x2=\""
       << ml + pw + 28 << "\" y2=\"" << legend_y << "\" stroke=\"" << s.color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << ml + pw + 32 << "\" y=\"" << legend_y + 4
       << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label
       << "</text>\n";
    legend_y += 18;
  }
  os << "</svg>\n";
}

}  // namespace playkit
