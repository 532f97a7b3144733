#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace aniso {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (x, y)
};

/// Self-contained SVG line plot; y is clamped to [0, 1] (convergence rates).
inline std::string line_plot_svg(const std::string& title, const std::string& xlabel,
                                 const std::string& ylabel,
                                 const std::vector<PlotSeries>& series) {
  const int width = 640, height = 480;
  const int ml = 60, mr = 120, mt = 40, mb = 50;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double xmin = 0.0, xmax = 1.0;
  bool first = true;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (first) {
        xmin = xmax = x;
        first = false;
      }
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
    }
  }
  if (xmax <= xmin) xmax = xmin + 1.0;

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + (1.0 - std::clamp(y, 0.0, 1.0)) * ph; };

  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
  char buf[256];
  std::string svg;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                "viewBox=\"0 0 %d %d\">\n",
                width, height, width, height);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  std::snprintf(buf, sizeof buf,
                "<text x=\"%d\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" "
                "text-anchor=\"middle\">%s</text>\n",
                ml + static_cast<int>(pw / 2), title.c_str());
  svg += buf;

  // axes box and ticks
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%d\" y=\"%d\" width=\"%.0f\" height=\"%.0f\" fill=\"none\" "
                "stroke=\"black\"/>\n",
                ml, mt, pw, ph);
  svg += buf;
  for (double y = 0.0; y <= 1.0001; y += 0.2) {
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%d\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#ddd\"/>"
                  "<text x=\"%d\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\" "
                  "text-anchor=\"end\">%.1f</text>\n",
                  ml, py(y), ml + pw, py(y), ml - 6, py(y) + 4, y);
    svg += buf;
  }
  const int x0 = static_cast<int>(std::ceil(xmin));
  for (int x = x0; x <= static_cast<int>(std::floor(xmax)); ++x) {
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" y1=\"%d\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#ddd\"/>"
                  "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\" "
                  "text-anchor=\"middle\">%d</text>\n",
                  px(x), mt, px(x), mt + ph, px(x), mt + ph + 16, x);
    svg += buf;
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%d\" y=\"%d\" font-family=\"sans-serif\" font-size=\"13\" "
                "text-anchor=\"middle\">%s</text>\n",
                ml + static_cast<int>(pw / 2), height - 12, xlabel.c_str());
  svg += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"16\" y=\"%d\" font-family=\"sans-serif\" font-size=\"13\" "
                "text-anchor=\"middle\" transform=\"rotate(-90 16 %d)\">%s</text>\n",
                mt + static_cast<int>(ph / 2), mt + static_cast<int>(ph / 2), ylabel.c_str());
  svg += buf;

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = palette[s % 8];
    std::string pts;
    for (const auto& [x, y] : series[s].points) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(x), py(y));
      pts += buf;
    }
    std::snprintf(buf, sizeof buf,
                  "<polyline points=\"%s\" fill=\"none\" stroke=\"%s\" stroke-width=\"1.5\"/>\n",
                  pts.c_str(), color);
    svg += buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.0f\" y1=\"%.0f\" x2=\"%.0f\" y2=\"%.0f\" stroke=\"%s\" "
                  "stroke-width=\"2\"/><text x=\"%.0f\" y=\"%.0f\" font-family=\"sans-serif\" "
                  "font-size=\"11\">%s</text>\n",
                  ml + pw + 10, mt + 14.0 * s + 10, ml + pw + 30, mt + 14.0 * s + 10, color,
                  ml + pw + 34, mt + 14.0 * s + 14, series[s].label.c_str());
    svg += buf;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace aniso
