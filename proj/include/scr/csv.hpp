#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace scr {

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Column-major numeric table.  Every cell is a double; "Inf"/"NaN" spellings
// are accepted case-insensitively on input and written back canonically.
struct Table {
  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;

  std::size_t nrow() const { return cols.empty() ? 0 : cols.front().size(); }
  std::size_t ncol() const { return names.size(); }
  bool has(const std::string& name) const;
  // throws DataError naming the column when absent
  const std::vector<double>& col(const std::string& name) const;
};

// shortest representation that parses back to the same double
std::string format_double(double v);
double parse_double(const std::string& cell);  // throws DataError

Table read_csv(std::istream& in, const std::string& what);
Table read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const Table& t);
void write_csv_file(const std::string& path, const Table& t);

}  // namespace scr
