#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace slab {

/// A table of preformatted cells. Numbers are rendered once, with 9
/// significant digits, so a written CSV reads back to the same table.
class Table {
 public:
  Table() = default;
  explicit Table(std::vector<std::string> columns);

  void add_row(std::vector<std::string> row);

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  void write_csv(std::ostream& out) const;
  /// Array of objects; numeric cells become JSON numbers.
  void write_json(std::ostream& out) const;
  static Table read_csv(std::istream& in);

  friend bool operator==(const Table&, const Table&) = default;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

std::string fmt(double x);
std::string fmt(std::int64_t x);
inline std::string fmt(int x) { return fmt(static_cast<std::int64_t>(x)); }
inline std::string fmt(bool x) { return x ? "1" : "0"; }

}  // namespace slab
