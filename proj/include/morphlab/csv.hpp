#pragma once

// Minimal reader for the comma-separated inputs: no quoting, one header line,
// blank lines ignored.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "morphlab/error.hpp"

namespace morphlab::csv {

struct Row {
  std::size_t line = 0;  // 1-based, header is line 1
  std::string text;
  std::vector<std::string> fields;

  std::string where() const { return "line " + std::to_string(line) + " '" + text + "'"; }
};

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

/// Reads rows after checking the header matches `header` exactly (after
/// trimming each column name).
inline std::vector<Row> read(std::istream& in, const std::vector<std::string>& header,
                             const std::string& source) {
  std::string line;
  std::size_t n = 0;
  bool have_header = false;
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++n;
    if (n == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (!have_header) {
      if (fields != header) {
        std::string expected;
        for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
        throw InputError(source + ": expected header '" + expected + "', got '" +
                         std::string(trim(line)) + "'");
      }
      have_header = true;
      continue;
    }
    Row row{n, std::string(trim(line)), std::move(fields)};
    if (row.fields.size() != header.size()) {
      throw InputError(source + ": " + row.where() + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(row.fields.size()));
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw InputError(source + ": missing header line");
  return rows;
}

inline std::vector<Row> read_file(const std::filesystem::path& path,
                                  const std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return read(in, header, path.string());
}

inline double parse_double(const std::string& s, const Row& row, const std::string& source) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || s.empty()) {
    throw InputError(source + ": " + row.where() + ": '" + s + "' is not a number");
  }
  return v;
}

inline std::uint64_t parse_index(const std::string& s, const Row& row,
                                 const std::string& source) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw InputError(source + ": " + row.where() + ": '" + s +
                     "' is not a non-negative integer");
  }
  return v;
}

}  // namespace morphlab::csv
