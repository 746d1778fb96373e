#include "util/csv.hpp"

#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "util/error.hpp"

namespace cea {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

}  // namespace

CsvTable CsvTable::read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return read_string(ss.str(), path);
}

CsvTable CsvTable::read_string(const std::string& text, const std::string& origin) {
  CsvTable t;
  t.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw validation_error(origin + ": empty file, header row required");
  }
  // Strip a UTF-8 BOM if present.
  if (line.size() >= 3 && line.compare(0, 3, "\xef\xbb\xbf") == 0) line.erase(0, 3);
  t.header_ = split_line(line);
  for (size_t i = 0; i < t.header_.size(); ++i) {
    if (t.header_[i].empty()) {
      throw validation_error(origin + ": blank column name in header (column " + std::to_string(i + 1) + ")");
    }
    if (!t.index_.emplace(t.header_[i], i).second) {
      throw validation_error(origin + ": duplicate column name '" + t.header_[i] + "'");
    }
  }
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != t.header_.size()) {
      throw validation_error(origin + ":" + std::to_string(t.cells_.size() + 2) + ": expected " +
                             std::to_string(t.header_.size()) + " cells, found " + std::to_string(cells.size()));
    }
    t.cells_.push_back(std::move(cells));
  }
  return t;
}

bool CsvTable::has_column(const std::string& name) const { return index_.count(name) > 0; }

size_t CsvTable::column(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw validation_error(origin_ + ": missing required column '" + name + "'");
  }
  return it->second;
}

std::optional<size_t> CsvTable::find_column(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> CsvTable::get_double(size_t row, size_t col) const {
  const std::string& s = cells_[row][col];
  if (s.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) {
    throw validation_error(origin_ + ":" + std::to_string(line_number(row)) + ": '" + s +
                           "' is not a number (column '" + header_[col] + "')");
  }
  return v;
}

std::optional<long> CsvTable::get_long(size_t row, size_t col) const {
  const std::string& s = cells_[row][col];
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  long v = std::strtol(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size()) {
    throw validation_error(origin_ + ":" + std::to_string(line_number(row)) + ": '" + s +
                           "' is not an integer (column '" + header_[col] + "')");
  }
  return v;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != header_.size()) throw internal_error("CsvWriter: row width mismatch");
  rows_.push_back(cells);
}

std::string CsvWriter::format(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string CsvWriter::format(std::optional<double> v) {
  return v ? format(*v) : std::string();
}

std::string CsvWriter::to_string() const {
  std::string out;
  for (size_t i = 0; i < header_.size(); ++i) {
    if (i) out += ',';
    out += header_[i];
  }
  out += '\n';
  for (const auto& row : rows_) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

void CsvWriter::write_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write file: " + path);
  out << to_string();
  if (!out) throw io_error("write failed: " + path);
}

}  // namespace cea
