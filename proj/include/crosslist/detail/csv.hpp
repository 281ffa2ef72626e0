#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crosslist/error.hpp"

namespace crosslist::detail {

struct CsvRow {
  std::size_t line = 0;  // 1-based line number in the source file
  std::vector<std::string> fields;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<CsvRow> rows;
};

inline std::string trim(std::string_view text) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

// Splits one line on commas; double-quoted fields may contain commas, which
// is how decimal-comma numbers such as "240,43" survive the format.
inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(trim(current));
  return fields;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::FileNotFound, "cannot open " + path.string());
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
      line.erase(0, 3);
    }
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (!have_header) {
      for (auto& f : fields) {
        std::transform(f.begin(), f.end(), f.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
      }
      table.header = std::move(fields);
      have_header = true;
    } else {
      table.rows.push_back({line_no, std::move(fields)});
    }
  }
  if (!have_header) throw Error(ErrorKind::SchemaMismatch, path.string() + ": missing header row");
  return table;
}

inline void require_header(const CsvTable& table, const std::vector<std::string>& expected,
                           const std::filesystem::path& path) {
  if (table.header != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    std::string got;
    for (const auto& h : table.header) got += (got.empty() ? "" : ",") + h;
    throw Error(ErrorKind::SchemaMismatch,
                path.string() + ": expected header '" + want + "', found '" + got + "'");
  }
}

/// Parses a decimal number, accepting a decimal comma ("5,35") when no
/// decimal point is present. With both present, commas are thousands
/// separators.
inline std::optional<double> parse_decimal(std::string_view raw) {
  std::string text = trim(raw);
  if (text.empty()) return std::nullopt;
  const bool has_point = text.find('.') != std::string::npos;
  if (has_point) {
    text.erase(std::remove(text.begin(), text.end(), ','), text.end());
  } else {
    std::replace(text.begin(), text.end(), ',', '.');
  }
  if (!text.empty() && text.front() == '+') text.erase(0, 1);
  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

/// Like parse_decimal but allows an optional leading '$' and a magnitude
/// suffix (K, M, B, T) as used in market-cap columns ("240,43B").
inline std::optional<double> parse_amount(std::string_view raw) {
  std::string text = trim(raw);
  if (!text.empty() && text.front() == '$') text.erase(0, 1);
  double scale = 1.0;
  if (!text.empty()) {
    switch (std::toupper(static_cast<unsigned char>(text.back()))) {
      case 'K': scale = 1e3; break;
      case 'M': scale = 1e6; break;
      case 'B': scale = 1e9; break;
      case 'T': scale = 1e12; break;
      default: break;
    }
    if (scale != 1.0) text.pop_back();
  }
  auto value = parse_decimal(text);
  if (!value) return std::nullopt;
  return *value * scale;
}

/// Fixed significant-digit formatting used by every emitted CSV.
inline std::string format_number(double value, int significant_digits = 9) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.*g", significant_digits, value);
  return std::string(buf.data());
}

}  // namespace crosslist::detail
