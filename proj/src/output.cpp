#include "wqed/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "wqed/errors.hpp"

namespace wqed {

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw ParameterError("row has " + std::to_string(row.size()) + " cells, table has " +
                         std::to_string(columns.size()) + " columns");
  }
  rows.push_back(std::move(row));
}

std::size_t Table::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw ParameterError("no column named '" + name + "'");
}

double Table::number(std::size_t row, const std::string& column) const {
  return std::get<double>(rows.at(row).at(column_index(column)));
}

void require_finite(const Table& table) {
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
      const auto* v = std::get_if<double>(&table.rows[i][j]);
      if (v && !std::isfinite(*v)) {
        throw NumericalError("non-finite value in column '" + table.columns[j] + "' at row " +
                             std::to_string(i));
      }
    }
  }
}

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw NumericalError("number formatting failed");
  out.append(buf, end);
}

void append_csv_field(std::string& out, const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) {
    out += s;
    return;
  }
  out += '"';
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

}  // namespace

std::string to_csv(const Table& table) {
  require_finite(table);
  std::string out;
  for (std::size_t j = 0; j < table.columns.size(); ++j) {
    if (j) out += ',';
    append_csv_field(out, table.columns[j]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      if (const auto* v = std::get_if<double>(&row[j])) {
        append_number(out, *v);
      } else {
        append_csv_field(out, std::get<std::string>(row[j]));
      }
    }
    out += '\n';
  }
  return out;
}

std::string to_json(const Table& table) {
  require_finite(table);
  auto arr = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t j = 0; j < row.size(); ++j) {
      std::visit([&](const auto& v) { obj[table.columns[j]] = v; }, row[j]);
    }
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

std::string render(const Table& table, OutputFormat format) {
  return format == OutputFormat::kJson ? to_json(table) : to_csv(table);
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw ConfigError("cannot move output into place at " + path.string() + ": " + ec.message());
  }
}

std::string gnuplot_script(const Table& table, const std::filesystem::path& data_file,
                           const std::string& x_column, const std::vector<std::string>& y_columns,
                           bool log_x) {
  std::string s;
  s += "set datafile separator ','\n";
  s += "set key autotitle columnhead\n";
  s += "set xlabel '" + x_column + "'\n";
  if (log_x) s += "set logscale x\n";
  s += "plot ";
  const auto x = std::to_string(table.column_index(x_column) + 1);
  for (std::size_t i = 0; i < y_columns.size(); ++i) {
    if (i) s += ", \\\n     ";
    s += "'" + data_file.filename().string() + "' using " + x + ":" +
         std::to_string(table.column_index(y_columns[i]) + 1) + " with lines";
  }
  s += "\n";
  return s;
}

}  // namespace wqed
