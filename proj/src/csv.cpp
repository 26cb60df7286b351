#include "fhj/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fhj {

void CsvTable::add(std::string name, std::vector<double> values) {
  if (!columns.empty() && values.size() != columns[0].size())
    throw std::invalid_argument("CsvTable::add: column '" + name + "' has " +
                                std::to_string(values.size()) + " rows, table has " +
                                std::to_string(columns[0].size()));
  names.push_back(std::move(name));
  columns.push_back(std::move(values));
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

double parse_number(const std::string& token) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  // strtod skips leading spaces; require the token to be fully consumed and
  // nonempty so ragged or corrupted cells fail loudly instead of truncating
  while (end && *end == ' ') ++end;
  if (end == begin || (end && *end != '\0'))
    throw std::runtime_error("csv: malformed number '" + token + "'");
  return v;
}

std::string to_csv_text(const CsvTable& table) {
  for (std::size_t j = 1; j < table.columns.size(); ++j)
    if (table.columns[j].size() != table.columns[0].size())
      throw std::invalid_argument("csv: ragged columns");
  if (table.names.size() != table.columns.size())
    throw std::invalid_argument("csv: header/column count mismatch");

  std::ostringstream out;
  for (const std::string& c : table.comments) out << "# " << c << '\n';
  for (std::size_t j = 0; j < table.names.size(); ++j)
    out << (j ? "," : "") << table.names[j];
  out << '\n';
  for (std::size_t i = 0; i < table.rows(); ++i) {
    for (std::size_t j = 0; j < table.columns.size(); ++j)
      out << (j ? "," : "") << format_number(table.columns[j][i]);
    out << '\n';
  }
  return out.str();
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string::size_type pos = 0;
  for (;;) {
    const auto comma = line.find(',', pos);
    cells.push_back(line.substr(pos, comma == std::string::npos ? comma : comma - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return cells;
}

}  // namespace

CsvTable parse_csv_text(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::size_t start = 1;
      if (start < line.size() && line[start] == ' ') ++start;
      t.comments.push_back(line.substr(start));
      continue;
    }
    if (!have_header) {
      t.names = split_line(line);
      t.columns.assign(t.names.size(), {});
      have_header = true;
      continue;
    }
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != t.names.size())
      throw std::runtime_error("csv: row has " + std::to_string(cells.size()) +
                               " cells, header has " + std::to_string(t.names.size()));
    for (std::size_t j = 0; j < cells.size(); ++j)
      t.columns[j].push_back(parse_number(cells[j]));
  }
  if (!have_header) throw std::runtime_error("csv: missing header row");
  return t;
}

void write_csv(const std::string& path, const CsvTable& table) {
  const std::string text = to_csv_text(table);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("csv: cannot open '" + path + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("csv: write failed for '" + path + "'");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("csv: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv_text(buf.str());
}

}  // namespace fhj
