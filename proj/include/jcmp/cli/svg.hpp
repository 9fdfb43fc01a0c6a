#pragma once

// Contour rendering of a WignerField as a standalone SVG document.  Filled
// cells on a coarse raster carry a diverging colour scale centred at zero;
// isolines come from marching squares on the full grid; the zero level is
// dashed.  Output depends only on the field and the style.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "jcmp/wigner.hpp"

namespace jcmp::cli {

struct ContourStyle {
  int width = 480;
  int height = 480;
  int levels_per_sign = 8;  // isolines at +-k vmax / (levels_per_sign + 1)
  int fill_cells = 80;      // raster resolution of the colour fill along each axis
  std::string title;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string fmt_level(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

/// Blue-white-red scale for t in [-1, 1].
inline std::string diverging_color(double t) {
  t = std::clamp(t, -1.0, 1.0);
  const std::array<double, 3> white{247, 247, 247}, red{178, 24, 43}, blue{33, 102, 172};
  const auto& end = t >= 0 ? red : blue;
  const double s = std::abs(t);
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(white[0] + s * (end[0] - white[0]))),
                static_cast<int>(std::lround(white[1] + s * (end[1] - white[1]))),
                static_cast<int>(std::lround(white[2] + s * (end[2] - white[2]))));
  return buf;
}

struct Segment {
  double x0, y0, x1, y1;
};

/// Marching squares for one level on the grid; coordinates in field units.
inline std::vector<Segment> isoline(const WignerField& f, double level) {
  std::vector<Segment> out;
  const auto& v = f.values;
  const auto& g = f.grid;
  auto lerp = [&](double xa, double ya, double va, double xb, double yb, double vb) {
    const double t = (level - va) / (vb - va);
    return std::array<double, 2>{xa + t * (xb - xa), ya + t * (yb - ya)};
  };
  for (int i = 0; i + 1 < g.nx; ++i) {
    for (int j = 0; j + 1 < g.ny; ++j) {
      const double x0 = g.x(i), x1 = g.x(i + 1), y0 = g.y(j), y1 = g.y(j + 1);
      // Corners counter-clockwise from (x0, y0).
      const double c[4] = {v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)};
      int mask = 0;
      for (int k = 0; k < 4; ++k) {
        if (c[k] > level) mask |= 1 << k;
      }
      if (mask == 0 || mask == 15) continue;
      const double px[4] = {x0, x1, x1, x0}, py[4] = {y0, y0, y1, y1};
      // Crossing point on edge e, which joins corner e and corner (e + 1) % 4.
      auto edge = [&](int e) {
        const int a = e, b = (e + 1) % 4;
        return lerp(px[a], py[a], c[a], px[b], py[b], c[b]);
      };
      std::vector<int> crossed;
      for (int e = 0; e < 4; ++e) {
        const bool ia = (mask >> e) & 1, ib = (mask >> ((e + 1) % 4)) & 1;
        if (ia != ib) crossed.push_back(e);
      }
      if (crossed.size() == 2) {
        const auto p = edge(crossed[0]), q = edge(crossed[1]);
        out.push_back({p[0], p[1], q[0], q[1]});
      } else if (crossed.size() == 4) {
        // Saddle: pair edges according to the value at the cell centre.
        const bool centre_high = 0.25 * (c[0] + c[1] + c[2] + c[3]) > level;
        const bool c0_high = mask & 1;
        const auto e0 = edge(0), e1 = edge(1), e2 = edge(2), e3 = edge(3);
        if (centre_high == c0_high) {
          out.push_back({e0[0], e0[1], e1[0], e1[1]});
          out.push_back({e2[0], e2[1], e3[0], e3[1]});
        } else {
          out.push_back({e3[0], e3[1], e0[0], e0[1]});
          out.push_back({e1[0], e1[1], e2[0], e2[1]});
        }
      }
    }
  }
  return out;
}

}  // namespace detail

inline std::string render_contour(const WignerField& f, const ContourStyle& style = {}) {
  const auto& g = f.grid;
  const double margin = 40.0;
  const double pw = style.width - 2 * margin, ph = style.height - 2 * margin;
  auto sx = [&](double x) { return margin + (x - g.x_min) / (g.x_max - g.x_min) * pw; };
  auto sy = [&](double y) { return margin + (g.y_max - y) / (g.y_max - g.y_min) * ph; };
  const double vmax = std::max(std::abs(f.min()), std::abs(f.max()));
  const double scale = vmax > 0 ? vmax : 1.0;

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(style.width) + "\" height=\"" +
       std::to_string(style.height) + "\" viewBox=\"0 0 " + std::to_string(style.width) + " " +
       std::to_string(style.height) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!style.title.empty()) {
    s += "<text x=\"" + detail::fmt(style.width / 2.0) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">" + style.title + "</text>\n";
  }

  // Coarse fill: average the samples falling into each raster cell.
  const int cx = std::min(style.fill_cells, g.nx), cy = std::min(style.fill_cells, g.ny);
  s += "<g shape-rendering=\"crispEdges\">\n";
  for (int a = 0; a < cx; ++a) {
    const int i0 = a * g.nx / cx, i1 = (a + 1) * g.nx / cx;
    for (int b = 0; b < cy; ++b) {
      const int j0 = b * g.ny / cy, j1 = (b + 1) * g.ny / cy;
      double sum = 0;
      for (int i = i0; i < i1; ++i) {
        for (int j = j0; j < j1; ++j) sum += f.values(i, j);
      }
      const double mean = sum / ((i1 - i0) * (j1 - j0));
      const double xa = sx(g.x_min + (g.x_max - g.x_min) * a / cx), xb = sx(g.x_min + (g.x_max - g.x_min) * (a + 1) / cx);
      const double yb = sy(g.y_min + (g.y_max - g.y_min) * b / cy), ya = sy(g.y_min + (g.y_max - g.y_min) * (b + 1) / cy);
      s += "<rect x=\"" + detail::fmt(xa) + "\" y=\"" + detail::fmt(ya) + "\" width=\"" + detail::fmt(xb - xa) +
           "\" height=\"" + detail::fmt(yb - ya) + "\" fill=\"" + detail::diverging_color(mean / scale) + "\"/>\n";
    }
  }
  s += "</g>\n";

  auto emit = [&](double level, const char* cls, const char* extra) {
    const auto segs = detail::isoline(f, level);
    if (segs.empty()) return;
    s += "<path class=\"" + std::string(cls) + "\" data-level=\"" + detail::fmt_level(level) + "\" fill=\"none\" " + extra +
         " d=\"";
    for (const auto& seg : segs) {
      s += "M" + detail::fmt(sx(seg.x0)) + " " + detail::fmt(sy(seg.y0)) + "L" + detail::fmt(sx(seg.x1)) + " " +
           detail::fmt(sy(seg.y1));
    }
    s += "\"/>\n";
  };
  for (int k = 1; k <= style.levels_per_sign; ++k) {
    const double lv = k * vmax / (style.levels_per_sign + 1);
    emit(lv, "contour", "stroke=\"#444444\" stroke-width=\"0.6\"");
    emit(-lv, "contour", "stroke=\"#444444\" stroke-width=\"0.6\"");
  }
  // The zero level is drawn only where the field is genuinely negative.
  if (f.min() < -1e-6 * scale) {
    emit(0.0, "zero-contour", "stroke=\"black\" stroke-width=\"1.2\" stroke-dasharray=\"4 3\"");
  }

  // Frame and axis labels.
  s += "<rect x=\"" + detail::fmt(margin) + "\" y=\"" + detail::fmt(margin) + "\" width=\"" + detail::fmt(pw) +
       "\" height=\"" + detail::fmt(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  auto label = [&](double x, double y, const std::string& text, const char* anchor) {
    s += "<text x=\"" + detail::fmt(x) + "\" y=\"" + detail::fmt(y) + "\" text-anchor=\"" + anchor +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + text + "</text>\n";
  };
  label(margin, style.height - margin + 16, detail::fmt(g.x_min), "middle");
  label(margin + pw, style.height - margin + 16, detail::fmt(g.x_max), "middle");
  label(margin + pw / 2, style.height - 8, "x", "middle");
  label(margin - 6, margin + ph + 4, detail::fmt(g.y_min), "end");
  label(margin - 6, margin + 4, detail::fmt(g.y_max), "end");
  label(12, margin + ph / 2, "y", "middle");
  label(style.width - margin, margin - 8, "|W| max " + detail::fmt_level(vmax), "end");
  s += "</svg>\n";
  return s;
}

}  // namespace jcmp::cli
