#include "fhj/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fhj {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Range {
  double lo = 0.0, hi = 1.0;

  void grow(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (hi <= lo) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double m = 0.04 * (hi - lo);
    lo -= m;
    hi += m;
  }
};

}  // namespace

std::string to_svg_text(const CsvTable& table, const PlotSpec& plot) {
  if (plot.x_col >= table.cols())
    throw std::invalid_argument("svg: x column out of range");
  std::vector<std::size_t> ys = plot.y_cols;
  if (ys.empty())
    for (std::size_t j = 0; j < table.cols(); ++j)
      if (j != plot.x_col) ys.push_back(j);
  for (std::size_t j : ys)
    if (j >= table.cols()) throw std::invalid_argument("svg: y column out of range");

  const std::vector<double>& xs = table.columns[plot.x_col];
  Range rx, ry;
  if (!xs.empty()) {
    rx = {xs[0], xs[0]};
    bool seeded = false;
    for (std::size_t j : ys)
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double v = table.columns[j][i];
        if (!std::isfinite(v) || !std::isfinite(xs[i])) continue;
        if (!seeded) {
          ry = {v, v};
          seeded = true;
        }
        rx.grow(xs[i]);
        ry.grow(v);
      }
  }
  rx.pad();
  ry.pad();

  const double ml = 62, mr = 14, mt = 28, mb = 40;
  const double pw = plot.width - ml - mr, ph = plot.height - mt - mb;
  auto px = [&](double x) { return ml + pw * (x - rx.lo) / (rx.hi - rx.lo); };
  auto py = [&](double y) { return mt + ph * (ry.hi - y) / (ry.hi - ry.lo); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << plot.width
      << "\" height=\"" << plot.height << "\" viewBox=\"0 0 " << plot.width << " "
      << plot.height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<rect x=\"" << fixed2(ml) << "\" y=\"" << fixed2(mt) << "\" width=\""
      << fixed2(pw) << "\" height=\"" << fixed2(ph)
      << "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
  if (!plot.title.empty())
    out << "<text x=\"" << fixed2(ml) << "\" y=\"18\" font-family=\"monospace\" "
        << "font-size=\"13\">" << plot.title << "</text>\n";

  // axis ticks: ends and midpoint of each range
  for (int k = 0; k <= 2; ++k) {
    const double fx = rx.lo + 0.5 * k * (rx.hi - rx.lo);
    const double fy = ry.lo + 0.5 * k * (ry.hi - ry.lo);
    out << "<text x=\"" << fixed2(px(fx)) << "\" y=\"" << fixed2(mt + ph + 16)
        << "\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"middle\">"
        << label(fx) << "</text>\n";
    out << "<text x=\"" << fixed2(ml - 6) << "\" y=\"" << fixed2(py(fy) + 3)
        << "\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"end\">"
        << label(fy) << "</text>\n";
  }
  out << "<text x=\"" << fixed2(ml + pw / 2) << "\" y=\""
      << fixed2(plot.height - 8.0)
      << "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">"
      << table.names[plot.x_col] << "</text>\n";

  for (std::size_t c = 0; c < ys.size(); ++c) {
    const std::vector<double>& v = table.columns[ys[c]];
    const char* color = kPalette[c % (sizeof kPalette / sizeof *kPalette)];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!std::isfinite(xs[i]) || !std::isfinite(v[i])) continue;
      out << (first ? "" : " ") << fixed2(px(xs[i])) << "," << fixed2(py(v[i]));
      first = false;
    }
    out << "\"/>\n";
    out << "<text x=\"" << fixed2(ml + pw - 4) << "\" y=\""
        << fixed2(mt + 14.0 + 13.0 * static_cast<double>(c))
        << "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\" fill=\""
        << color << "\">" << table.names[ys[c]] << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void write_svg(const std::string& path, const CsvTable& table, const PlotSpec& plot) {
  const std::string text = to_svg_text(table, plot);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("svg: cannot open '" + path + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("svg: write failed for '" + path + "'");
}

}  // namespace fhj
