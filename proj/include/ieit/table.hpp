#pragma once

// Column tables written as CSV or JSON with 17 significant digits, so every
// double survives a write/read cycle and output bytes are deterministic.

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace ieit {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row) {
    if (row.size() != columns.size()) throw std::logic_error("row width does not match column count");
    rows.push_back(std::move(row));
  }
};

inline std::string format_number(double v) {
  if (!std::isfinite(v)) throw std::domain_error("cannot serialize non-finite value");
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t j = 0; j < t.columns.size(); ++j) os << (j ? "," : "") << t.columns[j];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << format_number(row[j]);
    os << '\n';
  }
}

inline void write_json(std::ostream& os, const Table& t) {
  os << "{\n  \"columns\": [";
  for (std::size_t j = 0; j < t.columns.size(); ++j)
    os << (j ? ", " : "") << nlohmann::json(t.columns[j]).dump();
  os << "],\n  \"rows\": [";
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    os << (i ? ",\n    [" : "\n    [");
    for (std::size_t j = 0; j < t.rows[i].size(); ++j) os << (j ? ", " : "") << format_number(t.rows[i][j]);
    os << ']';
  }
  os << (t.rows.empty() ? "]\n}\n" : "\n  ]\n}\n");
}

inline Table read_json_table(std::istream& is) {
  const auto doc = nlohmann::json::parse(is);
  Table t;
  t.columns = doc.at("columns").get<std::vector<std::string>>();
  for (const auto& row : doc.at("rows")) t.add_row(row.get<std::vector<double>>());
  return t;
}

}  // namespace ieit
