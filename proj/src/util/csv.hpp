#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace cea {

// Minimal CSV support: UTF-8, comma separated, first row is the header,
// blank cells are missing values. Quoting with '"' is accepted on input.
class CsvTable {
public:
  static CsvTable read_file(const std::string& path);
  static CsvTable read_string(const std::string& text, const std::string& origin = "<string>");

  const std::vector<std::string>& header() const { return header_; }
  size_t rows() const { return cells_.size(); }
  size_t cols() const { return header_.size(); }

  bool has_column(const std::string& name) const;
  // Column index; throws a validation error naming the column if absent.
  size_t column(const std::string& name) const;
  std::optional<size_t> find_column(const std::string& name) const;

  // Raw cell, already whitespace-trimmed. Empty string means missing.
  const std::string& cell(size_t row, size_t col) const { return cells_[row][col]; }
  bool is_blank(size_t row, size_t col) const { return cells_[row][col].empty(); }

  // Typed accessors; throw validation errors with file:line context.
  std::optional<double> get_double(size_t row, size_t col) const;
  std::optional<long> get_long(size_t row, size_t col) const;

  // 1-based line number of a data row in the source file (for diagnostics).
  size_t line_number(size_t row) const { return row + 2; }
  const std::string& origin() const { return origin_; }

private:
  std::string origin_;
  std::vector<std::string> header_;
  std::unordered_map<std::string, size_t> index_;
  std::vector<std::vector<std::string>> cells_;
};

// Writer that renders doubles with shortest round-trip formatting so that a
// written file parses back to bit-identical values.
class CsvWriter {
public:
  explicit CsvWriter(std::vector<std::string> header);

  void add_row(const std::vector<std::string>& cells);
  std::string& new_cell();

  std::string to_string() const;
  void write_file(const std::string& path) const;

  static std::string format(double v);            // shortest round-trip
  static std::string format(std::optional<double> v);  // blank when missing

private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace cea
