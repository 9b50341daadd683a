// SPDX-License-Identifier: Apache-2.0
//
// Numeric result tables with CSV and JSON encodings.
//
// CSV: `# key: value` metadata lines, a `# columns:` line, then a plain
// header row and one row per record. Numbers use the shortest representation
// that round-trips; infinities are written as `inf`.
// JSON: {"meta": {...}, "columns": [...], "rows": [[...], ...]}; infinities
// are written as null.
#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "qloc/errors.hpp"

namespace qloc {

struct Table {
  /// Ordered string-valued metadata (scheme, seed, units, ...).
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  [[nodiscard]] std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return i;
    }
    throw std::out_of_range("Table: no column '" + name + "'");
  }
};

enum class Format { Csv, Json };

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw std::invalid_argument("unknown format '" + s + "' (expected csv or json)");
}

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

inline double parse_number(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw FormatError("not a number: '" + s + "'");
  return v;
}

namespace detail {

inline std::string meta_text(const nlohmann::ordered_json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

inline std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

inline void write_csv(std::ostream& os, const Table& t) {
  for (const auto& [key, value] : t.meta.items()) os << "# " << key << ": " << detail::meta_text(value) << '\n';
  os << "# columns:";
  for (const auto& c : t.columns) os << ' ' << c;
  os << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
    os << '\n';
  }
}

inline nlohmann::ordered_json to_json(const Table& t) {
  nlohmann::ordered_json j;
  j["meta"] = t.meta;
  j["columns"] = t.columns;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    auto r = nlohmann::ordered_json::array();
    for (double v : row) {
      if (std::isfinite(v)) {
        r.push_back(v);
      } else {
        r.push_back(nullptr);
      }
    }
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j;
}

inline void write_json(std::ostream& os, const Table& t) { os << to_json(t).dump(2) << '\n'; }

inline void write_table(std::ostream& os, const Table& t, Format f) {
  if (f == Format::Csv) {
    write_csv(os, t);
  } else {
    write_json(os, t);
  }
}

/// Reads what write_json produced; null cells become +infinity.
inline Table table_from_json(const nlohmann::ordered_json& j) {
  try {
    Table t;
    t.meta = j.at("meta");
    t.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& r : j.at("rows")) {
      std::vector<double> row;
      for (const auto& v : r) row.push_back(v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>());
      if (row.size() != t.columns.size()) throw FormatError("JSON table row has the wrong number of cells");
      t.rows.push_back(std::move(row));
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed JSON table: ") + e.what());
  }
}

inline Table read_json(std::istream& is) {
  try {
    return table_from_json(nlohmann::ordered_json::parse(is));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed JSON table: ") + e.what());
  }
}

/// Reads what write_csv produced. Metadata values come back as strings.
inline Table read_csv(std::istream& is) {
  Table t;
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = line.substr(line[1] == ' ' ? 2 : 1);
      const auto colon = body.find(": ");
      if (colon != std::string::npos && body.rfind("columns:", 0) != 0) {
        t.meta[body.substr(0, colon)] = body.substr(colon + 2);
      }
      continue;
    }
    if (!have_header) {
      t.columns = detail::split_commas(line);
      have_header = true;
      continue;
    }
    std::vector<double> row;
    for (const auto& cell : detail::split_commas(line)) row.push_back(parse_number(cell));
    if (row.size() != t.columns.size()) throw FormatError("CSV row has the wrong number of cells");
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw FormatError("CSV table has no header row");
  return t;
}

}  // namespace qloc
