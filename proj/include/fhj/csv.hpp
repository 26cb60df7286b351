#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace fhj {

/// Numeric table with named columns and leading `#` metadata lines: the one
/// artifact format every command writes.  Numbers are rendered in scientific
/// notation with 17 significant digits, which is lossless for IEEE doubles
/// and keeps the byte stream deterministic, so re-parsing an artifact
/// reproduces the in-memory arrays exactly.
struct CsvTable {
  std::vector<std::string> comments;         ///< stored without the leading '#'
  std::vector<std::string> names;            ///< header row, one per column
  std::vector<std::vector<double>> columns;  ///< column-major values

  std::size_t rows() const { return columns.empty() ? 0 : columns[0].size(); }
  std::size_t cols() const { return columns.size(); }

  /// Append a named column; every column must have the same length.
  void add(std::string name, std::vector<double> values);
};

/// 17-significant-digit scientific rendering of one value.
std::string format_number(double v);

/// Strict base-10 parse of one cell (accepts scientific notation, inf, nan).
/// Throws std::runtime_error when the token is not a complete number.
double parse_number(const std::string& token);

std::string to_csv_text(const CsvTable& table);
CsvTable parse_csv_text(const std::string& text);

void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

}  // namespace fhj
