#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "wqed/scenario.hpp"

namespace wqed {

using Cell = std::variant<double, std::string>;

/// Column-named rows of numbers and labels, written in row order.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  std::size_t column_index(const std::string& name) const;
  double number(std::size_t row, const std::string& column) const;
};

/// Throws NumericalError naming the first NaN/Inf cell.
void require_finite(const Table& table);

/// Comma-separated, `.` decimal, header row, LF line endings. Doubles use the
/// shortest round-trip representation.
std::string to_csv(const Table& table);
/// Array of row objects keyed by column name.
std::string to_json(const Table& table);
std::string render(const Table& table, OutputFormat format);

/// Writes via a sibling temporary file and rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Gnuplot script plotting `y_columns` against `x_column` from a CSV file.
std::string gnuplot_script(const Table& table, const std::filesystem::path& data_file,
                           const std::string& x_column, const std::vector<std::string>& y_columns,
                           bool log_x = false);

}  // namespace wqed
