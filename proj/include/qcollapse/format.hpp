#pragma once

#include <cstdio>
#include <initializer_list>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qcollapse/errors.hpp"

namespace qcollapse {

/// Shortest-safe round-trip text: 17 significant digits.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv_row(std::ostream& os, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) os << ',';
    os << format_double(v);
    first = false;
  }
  os << '\n';
}

/// Column-oriented view of a numeric CSV file with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  bool has(const std::string& name) const {
    for (const auto& h : header)
      if (h == name) return true;
    return false;
  }
  const std::vector<double>& column(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k)
      if (header[k] == name) return columns[k];
    throw InvalidInput("csv: no column named '" + name + "'");
  }
  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

inline std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

inline CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw InvalidInput("csv: empty input");
  t.header = split_commas(line);
  t.columns.resize(t.header.size());
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_commas(line);
    if (cells.size() != t.header.size())
      throw InvalidInput("csv: wrong number of fields on line " + std::to_string(lineno));
    for (std::size_t k = 0; k < cells.size(); ++k) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cells[k], &used);
        if (used != cells[k].size()) throw std::invalid_argument("trailing");
        t.columns[k].push_back(v);
      } catch (const std::exception&) {
        // stod rejects "nan" spellings on some platforms; accept them explicitly.
        if (cells[k] == "nan" || cells[k] == "-nan") {
          t.columns[k].push_back(std::numeric_limits<double>::quiet_NaN());
        } else {
          throw InvalidInput("csv: non-numeric field '" + cells[k] + "' on line " +
                             std::to_string(lineno));
        }
      }
    }
  }
  return t;
}

}  // namespace qcollapse
