#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fhj/csv.hpp"

namespace fhj {

/// Static line-plot rendering of CSV columns: one column on the x axis, any
/// subset of the others as polylines.  Output is deterministic (fixed
/// palette, fixed coordinate formatting) and carries no interactivity --
/// it is a plain picture of the numbers already in the table.
struct PlotSpec {
  std::string title;
  std::size_t x_col = 0;
  std::vector<std::size_t> y_cols;  ///< empty = every column except x_col
  int width = 640;
  int height = 420;
};

std::string to_svg_text(const CsvTable& table, const PlotSpec& plot);
void write_svg(const std::string& path, const CsvTable& table, const PlotSpec& plot);

}  // namespace fhj
