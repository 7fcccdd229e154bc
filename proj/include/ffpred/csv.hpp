#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ffpred::csv {

// Plain comma-separated values, UTF-8, '.' decimal separator, header row
// required. Fields must not contain commas or newlines; none of the file
// formats used here need quoting.
struct Table {
  std::string source;  // file name or "<string>", for error messages
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // same arity as header
  std::vector<std::size_t> line_numbers;       // 1-based source line per row
};

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  if (line.empty()) out.emplace_back();
  return out;
}

inline Table read_stream(std::istream& in, const std::string& source) {
  Table table;
  table.source = source;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw std::runtime_error(source + ":" + std::to_string(line_no) +
                               ": expected " + std::to_string(table.header.size()) +
                               " columns, got " + std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
    table.line_numbers.push_back(line_no);
  }
  if (!have_header)
    throw std::runtime_error(source + ": missing header row");
  return table;
}

inline Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_stream(in, path);
}

inline Table read_string(const std::string& text, const std::string& source = "<string>") {
  std::istringstream in(text);
  return read_stream(in, source);
}

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

inline std::string join_row(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  out += '\n';
  return out;
}

// Typed access to one row, with errors that name the file, line and column.
class Row {
 public:
  Row(const Table& table, std::size_t row_index) : table_(table), index_(row_index) {}

  const std::string& raw(std::string_view column) const {
    for (std::size_t c = 0; c < table_.header.size(); ++c)
      if (table_.header[c] == column) return table_.rows[index_][c];
    throw std::runtime_error(table_.source + ": missing column '" + std::string(column) + "'");
  }

  std::string str(std::string_view column) const { return raw(column); }

  double num(std::string_view column) const {
    const std::string& cell = raw(column);
    double value = 0.0;
    auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || p != cell.data() + cell.size()) fail(column, cell, "number");
    return value;
  }

  int integer(std::string_view column) const {
    const std::string& cell = raw(column);
    int value = 0;
    auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || p != cell.data() + cell.size()) fail(column, cell, "integer");
    return value;
  }

  std::size_t line() const { return table_.line_numbers[index_]; }

  [[noreturn]] void fail(std::string_view column, const std::string& cell,
                         const char* kind) const {
    throw std::runtime_error(table_.source + ":" + std::to_string(line()) + ": column '" +
                             std::string(column) + "': cannot parse '" + cell + "' as " + kind);
  }

  [[noreturn]] void reject(const std::string& reason) const {
    throw std::runtime_error(table_.source + ":" + std::to_string(line()) + ": " + reason);
  }

 private:
  const Table& table_;
  std::size_t index_;
};

}  // namespace ffpred::csv
