#include "scr/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace scr {

bool Table::has(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

const std::vector<double>& Table::col(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw DataError("column '" + name + "' not found");
  return cols[static_cast<std::size_t>(it - names.begin())];
}

std::string format_double(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& cell) {
  std::string s = cell;
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
    s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && (s[start] == ' ' || s[start] == '\t')) ++start;
  s = s.substr(start);
  if (s.empty()) throw DataError("empty cell");
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw DataError("cannot parse '" + cell + "' as a number");
  return v;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

Table read_csv(std::istream& in, const std::string& what) {
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw DataError(what + ": empty input, header required");
  t.names = split_line(line);
  for (auto& n : t.names) {
    while (!n.empty() && (n.back() == ' ' || n.back() == '\t')) n.pop_back();
    std::size_t s = 0;
    while (s < n.size() && (n[s] == ' ' || n[s] == '\t')) ++s;
    n = n.substr(s);
    if (n.empty()) throw DataError(what + ": empty column name in header");
  }
  t.cols.resize(t.names.size());
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    const auto cells = split_line(line);
    if (cells.size() != t.names.size())
      throw DataError(what + ": row " + std::to_string(row) + " has " +
                      std::to_string(cells.size()) + " fields, expected " +
                      std::to_string(t.names.size()));
    for (std::size_t j = 0; j < cells.size(); ++j) {
      try {
        t.cols[j].push_back(parse_double(cells[j]));
      } catch (const DataError& e) {
        throw DataError(what + ": row " + std::to_string(row) + ", column '" +
                        t.names[j] + "': " + e.what());
      }
    }
  }
  return t;
}

Table read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  return read_csv(in, path);
}

void write_csv(std::ostream& out, const Table& t) {
  for (std::size_t j = 0; j < t.names.size(); ++j) {
    if (j) out << ',';
    out << t.names[j];
  }
  out << '\n';
  const std::size_t n = t.nrow();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < t.cols.size(); ++j) {
      if (j) out << ',';
      out << format_double(t.cols[j][i]);
    }
    out << '\n';
  }
}

void write_csv_file(const std::string& path, const Table& t) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open file for writing: " + path);
  write_csv(out, t);
}

}  // namespace scr
