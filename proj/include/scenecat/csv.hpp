#pragma once

#include <charconv>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "scenecat/common.hpp"

namespace scenecat {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline double parse_double_field(std::string_view field, const std::string& context) {
  field = trim(field);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError(context + ": cannot parse '" + std::string(field) + "' as a number");
  }
  return value;
}

inline long parse_long_field(std::string_view field, const std::string& context) {
  field = trim(field);
  long value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError(context + ": cannot parse '" + std::string(field) + "' as an integer");
  }
  return value;
}

// Header-indexed CSV reader for comma-separated files without quoting.
class CsvReader {
 public:
  explicit CsvReader(const std::string& path) : path_(path), stream_(path) {
    if (!stream_) {
      throw IoError("cannot open '" + path + "'");
    }
    std::string header;
    if (!std::getline(stream_, header)) {
      throw ParseError(path + ": empty file, expected a header row");
    }
    const auto names = split_csv_line(header);
    for (std::size_t i = 0; i < names.size(); ++i) {
      columns_.emplace(std::string(trim(names[i])), i);
    }
  }

  int column(const std::string& name) const {
    const auto it = columns_.find(name);
    if (it == columns_.end()) {
      throw ParseError(path_ + ": missing required column '" + name + "'");
    }
    return static_cast<int>(it->second);
  }

  bool has_column(const std::string& name) const { return columns_.count(name) != 0; }

  // Reads the next data row; returns false at EOF. Blank lines are skipped.
  bool next_row(std::vector<std::string_view>& fields) {
    while (std::getline(stream_, line_)) {
      ++line_number_;
      if (trim(line_).empty()) continue;
      fields = split_csv_line(line_);
      return true;
    }
    return false;
  }

  // Field accessors with file/line diagnostics for the current row.
  double parse_double(const std::vector<std::string_view>& fields, int col,
                      const std::string& name) const {
    return parse_double_field(field_at(fields, col, name), context(name));
  }
  long parse_long(const std::vector<std::string_view>& fields, int col,
                  const std::string& name) const {
    return parse_long_field(field_at(fields, col, name), context(name));
  }

  // 1-based data line number (header excluded) of the last row returned.
  long line_number() const { return line_number_; }
  const std::string& path() const { return path_; }

 private:
  std::string context(const std::string& column_name) const {
    return path_ + ", data line " + std::to_string(line_number_) + ", column '" + column_name +
           "'";
  }
  std::string_view field_at(const std::vector<std::string_view>& fields, int col,
                            const std::string& name) const {
    if (col < 0 || static_cast<std::size_t>(col) >= fields.size()) {
      throw ParseError(context(name) + ": row has only " + std::to_string(fields.size()) +
                       " fields");
    }
    return fields[static_cast<std::size_t>(col)];
  }

  std::string path_;
  std::ifstream stream_;
  std::string line_;
  std::unordered_map<std::string, std::size_t> columns_;
  long line_number_ = 0;
};

}  // namespace scenecat
