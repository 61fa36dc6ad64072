#pragma once

// Deterministic SVG rendering of tile sets and decompositions.  The default
// view is the phase plane: x is spatial position over [0, 2^M], y holds one
// row per dyadic scale with frequency increasing upward (fine tiles on top).
// The half-plane flag switches to the Carleson picture, where the vertical
// coordinate is wavelength and coarse tiles sit on top.

#include <cstdio>
#include <string>

#include "dhap/decompose.hpp"

namespace dhap {

namespace svg_detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

inline const char* label_color(const std::string& label) {
  if (label == "small" || label == "s") return "#4caf50";
  if (label == "heavy" || label == "h") return "#e53935";
  if (label == "light" || label == "l") return "#1e88e5";
  if (label == "buffer" || label == "b") return "#fb8c00";
  if (label == "exceptional") return "#757575";
  if (label == "selected") return "#8e24aa";
  if (label == "removed") return "#e53935";
  return "#1e88e5";
}

}  // namespace svg_detail

struct SvgTile {
  DyadicInterval interval;
  std::string label;
};

/// Renders labeled tiles; byte-identical output for identical input.
inline std::string render_svg(GridConfig g, const std::vector<SvgTile>& tiles,
                              bool half_plane = false) {
  using svg_detail::num;
  const double width = 880, row_h = 26, margin = 40;
  int rows = 2 * g.M + 1;
  double height = rows * row_h + 2 * margin;
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         num(width + 2 * margin) + "\" height=\"" + num(height) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  auto x_of = [&](double coord) { return margin + coord / g.domain_length() * width; };
  // Scale k occupies one row; in the phase plane the coarsest scale (largest
  // wavelength, lowest frequency) is the bottom row.
  auto y_of = [&](int k) {
    int idx = half_plane ? g.M - k : k + g.M;  // 0 = top row of the canvas
    return margin + idx * row_h;
  };

  for (const SvgTile& t : tiles) {
    double x0 = x_of(interval_left(t.interval));
    double x1 = x_of(interval_right(t.interval));
    double y = y_of(t.interval.k);
    out += "<rect x=\"" + num(x0) + "\" y=\"" + num(y) + "\" width=\"" + num(x1 - x0) +
           "\" height=\"" + num(row_h - 2) + "\" fill=\"" +
           svg_detail::label_color(t.label) + "\" fill-opacity=\"0.7\" stroke=\"#263238\" " +
           "stroke-width=\"0.6\"/>\n";
  }

  // Axes: spatial ticks along the bottom, one scale label per row.
  double axis_y = margin + rows * row_h + 6;
  out += "<line x1=\"" + num(margin) + "\" y1=\"" + num(axis_y) + "\" x2=\"" +
         num(margin + width) + "\" y2=\"" + num(axis_y) + "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= (1 << g.M); tick = tick == 0 ? 1 : 2 * tick) {
    double xx = x_of(double(tick));
    out += "<line x1=\"" + num(xx) + "\" y1=\"" + num(axis_y) + "\" x2=\"" + num(xx) +
           "\" y2=\"" + num(axis_y + 4) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(xx) + "\" y=\"" + num(axis_y + 16) +
           "\" font-size=\"10\" text-anchor=\"middle\">" + std::to_string(tick) + "</text>\n";
  }
  for (int k = -g.M; k <= g.M; ++k) {
    double y = y_of(k) + row_h / 2;
    out += "<text x=\"" + num(margin - 6) + "\" y=\"" + num(y) +
           "\" font-size=\"9\" text-anchor=\"end\">2^" + std::to_string(k) + "</text>\n";
  }
  out += std::string("<text x=\"") + num(margin) + "\" y=\"" + num(margin - 10) +
         "\" font-size=\"11\">" +
         (half_plane ? "Carleson half-plane (t = wavelength)" : "phase plane (rows by scale)") +
         "</text>\n";

  // Legend over the distinct labels, in sorted order for stable bytes.
  std::vector<std::string> labels;
  for (const SvgTile& t : tiles)
    if (std::find(labels.begin(), labels.end(), t.label) == labels.end())
      labels.push_back(t.label);
  std::sort(labels.begin(), labels.end());
  double lx = margin + width - 110, ly = margin - 28;
  for (const std::string& label : labels) {
    out += "<rect x=\"" + num(lx) + "\" y=\"" + num(ly) +
           "\" width=\"10\" height=\"10\" fill=\"" + svg_detail::label_color(label) +
           "\" fill-opacity=\"0.7\"/>\n";
    out += "<text x=\"" + num(lx + 14) + "\" y=\"" + num(ly + 9) + "\" font-size=\"9\">" +
           label + "</text>\n";
    ly += 13;
  }
  out += "</svg>\n";
  return out;
}

inline std::string render_svg(const TileSet& S, bool half_plane = false) {
  std::vector<SvgTile> tiles;
  for (IntervalId id : S.ids()) tiles.push_back({interval_of(S.grid(), id), "selected"});
  return render_svg(S.grid(), tiles, half_plane);
}

inline std::string render_svg(const TreeDecomposition& d, bool half_plane = false) {
  std::vector<SvgTile> tiles;
  for (const auto& lt : d.trees)
    for (IntervalId id : lt.tree.members.ids())
      tiles.push_back({interval_of(d.grid, id), lt.label});
  for (IntervalId id : d.exceptional.ids())
    tiles.push_back({interval_of(d.grid, id), "exceptional"});
  return render_svg(d.grid, tiles, half_plane);
}

}  // namespace dhap
