#include "slab/table.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "slab/errors.hpp"

namespace slab {

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != columns_.size()) throw InternalError("Table::add_row: width mismatch");
  for (const auto& cell : row) {
    if (cell.find_first_of(",\n\"") != std::string::npos) {
      throw InternalError("Table::add_row: cell contains a separator");
    }
  }
  rows_.push_back(std::move(row));
}

static void write_line(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << cells[i];
  }
  out << '\n';
}

void Table::write_csv(std::ostream& out) const {
  write_line(out, columns_);
  for (const auto& row : rows_) write_line(out, row);
}

void Table::write_json(std::ostream& out) const {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& row : rows_) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      const std::string& cell = row[i];
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (!cell.empty() && end && *end == '\0' && std::isfinite(v)) {
        obj[columns_[i]] = v;
      } else {
        obj[columns_[i]] = cell;
      }
    }
    arr.push_back(std::move(obj));
  }
  out << arr.dump(1) << '\n';
}

static std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

Table Table::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("csv", "missing header");
  Table t(split_line(line));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != t.columns_.size()) throw ConfigError("csv", "row width mismatch");
    t.rows_.push_back(std::move(cells));
  }
  return t;
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

std::string fmt(std::int64_t x) { return std::to_string(x); }

}  // namespace slab
