#pragma once

// Long-format CSV: a header row, then one row per (point, quantity).
// Numbers are written with 17 significant digits so they reload exactly.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "jcmp/error.hpp"

namespace jcmp::cli {

using Cell = std::variant<double, long long, std::string>;

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(std::vector<Cell> row) {
    if (row.size() != header_.size()) throw DomainError("CsvTable: row width does not match header");
    rows_.push_back(std::move(row));
  }

  std::size_t size() const { return rows_.size(); }

  std::string str() const {
    std::string out;
    append_line(out, header_);
    std::vector<std::string> cells;
    for (const auto& row : rows_) {
      cells.clear();
      for (const auto& c : row) cells.push_back(format_cell(c));
      append_line(out, cells);
    }
    return out;
  }

 private:
  static void append_line(std::string& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

struct CsvData {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline CsvData read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("read_csv: cannot open " + path);
  CsvData d;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      d.header = std::move(cells);
      first = false;
    } else {
      d.rows.push_back(std::move(cells));
    }
  }
  return d;
}

}  // namespace jcmp::cli
