#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace rtdcm::tools {

namespace {

constexpr int kMarginLeft = 64;
constexpr int kMarginRight = 16;
constexpr int kMarginTop = 28;
constexpr int kMarginBottom = 40;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) lo = hi = 0.0;
    if (hi - lo < 1e-12) {
      const double pad = std::max(std::abs(lo) * 0.1, 1e-9);
      lo -= pad;
      hi += pad;
    } else {
      const double pad = 0.05 * (hi - lo);
      lo -= pad;
      hi += pad;
    }
  }
};

void render_panel(std::ostringstream& out, const Panel& p, double ox, double oy, int w, int h) {
  Range xr;
  Range yr;
  for (const auto& s : p.series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  for (double v : p.vertical_lines) xr.add(v);
  xr.finish();
  yr.finish();

  const double pw = w - kMarginLeft - kMarginRight;
  const double ph = h - kMarginTop - kMarginBottom;
  if (p.equal_aspect) {
    const double scale = std::max((xr.hi - xr.lo) / pw, (yr.hi - yr.lo) / ph);
    const double xc = 0.5 * (xr.lo + xr.hi);
    const double yc = 0.5 * (yr.lo + yr.hi);
    xr.lo = xc - 0.5 * scale * pw;
    xr.hi = xc + 0.5 * scale * pw;
    yr.lo = yc - 0.5 * scale * ph;
    yr.hi = yc + 0.5 * scale * ph;
  }
  const double x0 = ox + kMarginLeft;
  const double y0 = oy + kMarginTop;
  auto px = [&](double v) { return x0 + (v - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double v) { return y0 + ph - (v - yr.lo) / (yr.hi - yr.lo) * ph; };

  out << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(pw)
      << "\" height=\"" << fmt(ph) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  out << "<text x=\"" << fmt(x0 + pw / 2) << "\" y=\"" << fmt(oy + 18)
      << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(p.title) << "</text>\n";
  out << "<text x=\"" << fmt(x0 + pw / 2) << "\" y=\"" << fmt(oy + h - 6)
      << "\" text-anchor=\"middle\" font-size=\"11\">" << escape(p.x_label) << "</text>\n";
  out << "<text x=\"" << fmt(ox + 12) << "\" y=\"" << fmt(y0 + ph / 2)
      << "\" text-anchor=\"middle\" font-size=\"11\" transform=\"rotate(-90 " << fmt(ox + 12)
      << ' ' << fmt(y0 + ph / 2) << ")\">" << escape(p.y_label) << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = xr.lo + (xr.hi - xr.lo) * k / 4.0;
    const double yv = yr.lo + (yr.hi - yr.lo) * k / 4.0;
    out << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << fmt(y0 + ph + 14)
        << "\" text-anchor=\"middle\" font-size=\"9\">" << tick(xv) << "</text>\n";
    out << "<text x=\"" << fmt(x0 - 4) << "\" y=\"" << fmt(py(yv) + 3)
        << "\" text-anchor=\"end\" font-size=\"9\">" << tick(yv) << "</text>\n";
  }
  if (yr.lo < 0.0 && yr.hi > 0.0) {
    out << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(py(0)) << "\" x2=\"" << fmt(x0 + pw)
        << "\" y2=\"" << fmt(py(0)) << "\" stroke=\"#999\" stroke-width=\"0.5\"/>\n";
  }
  for (double v : p.vertical_lines) {
    out << "<line x1=\"" << fmt(px(v)) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(px(v))
        << "\" y2=\"" << fmt(y0 + ph) << "\" stroke=\"#bbb\" stroke-dasharray=\"3,3\"/>\n";
  }
  int legend_row = 0;
  for (const auto& s : p.series) {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (n == 0) continue;
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
        << (s.dashed ? " stroke-dasharray=\"6,3\"" : "") << " points=\"";
    for (std::size_t i = 0; i < n; ++i) out << (i ? " " : "") << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i]));
    out << "\"/>\n";
    if (s.markers) {
      for (std::size_t i = 0; i < n; ++i) {
        out << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\"" << fmt(py(s.y[i]))
            << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
      }
    }
    if (!s.label.empty()) {
      const double ly = y0 + 12 + 13 * legend_row++;
      out << "<line x1=\"" << fmt(x0 + pw - 110) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\""
          << fmt(x0 + pw - 92) << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << s.color
          << "\" stroke-width=\"2\"/>\n";
      out << "<text x=\"" << fmt(x0 + pw - 88) << "\" y=\"" << fmt(ly)
          << "\" font-size=\"10\">" << escape(s.label) << "</text>\n";
    }
  }
}

}  // namespace

std::string render_svg(const std::vector<Panel>& panels, int columns, int panel_width,
                       int panel_height) {
  columns = std::max(columns, 1);
  const int n = static_cast<int>(panels.size());
  const int rows = std::max(1, (n + columns - 1) / columns);
  const int width = columns * panel_width;
  const int height = rows * panel_height;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int i = 0; i < n; ++i) {
    render_panel(out, panels[i], (i % columns) * panel_width, (i / columns) * panel_height,
                 panel_width, panel_height);
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace rtdcm::tools
