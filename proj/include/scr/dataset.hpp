#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "scr/csv.hpp"

namespace scr {

// One subject of semi-competing-risks data: time1/event1 describe the
// non-terminal event, time2/event2 the terminal one.  event1 = 0 implies
// time1 == time2 (follow-up for the non-terminal event ends there), and
// event1 = 1 implies time1 < time2 strictly.
struct SemiCompRecord {
  double time1 = 0, event1 = 0, time2 = 0, event2 = 0;
};

// Interval-censored / left-truncated view used by the accelerated-failure
// fitter.  Upper bounds may be +Inf (event not observed by last follow-up).
struct IntervalRecord {
  double lt = 0, y1l = 0, y1u = 0, y2l = 0, y2u = 0;
};

struct UniRecord {
  double time = 0, event = 0;
};

struct Covariates {
  Eigen::MatrixXd x1, x2, x3;  // n rows each; zero columns means no covariates
  std::vector<std::string> names1, names2, names3;
  std::vector<int> cluster;  // empty, or dense 0-based ids of size n
  int n_clusters = 0;
};

struct SemiCompDataset {
  std::vector<SemiCompRecord> rec;
  Covariates cov;
  std::size_t n() const { return rec.size(); }
};

struct IntervalDataset {
  std::vector<IntervalRecord> rec;
  Covariates cov;
  std::size_t n() const { return rec.size(); }
};

struct UniDataset {
  std::vector<UniRecord> rec;
  Eigen::MatrixXd x;
  std::vector<std::string> names;
  std::vector<int> cluster;
  int n_clusters = 0;
  std::size_t n() const { return rec.size(); }
};

struct ColumnBinding {
  std::string time1 = "time1", event1 = "event1", time2 = "time2", event2 = "event2";
  std::vector<std::string> x1, x2, x3;
  std::string cluster;  // empty: none
};

struct IntervalBinding {
  std::string lt = "LT", y1l = "y1L", y1u = "y1U", y2l = "y2L", y2u = "y2U";
  std::vector<std::string> x1, x2, x3;
};

struct UniBinding {
  std::string time = "time", event = "event";
  std::vector<std::string> x;
  std::string cluster;
};

struct Violation {
  std::size_t row = 0;  // 1-based data row
  std::string message;
};

SemiCompDataset load_semicomp(const Table& t, const ColumnBinding& b);
SemiCompDataset load_semicomp_csv(const std::string& path, const ColumnBinding& b);
IntervalDataset load_interval(const Table& t, const IntervalBinding& b);
UniDataset load_uni(const Table& t, const UniBinding& b);
UniDataset load_uni_csv(const std::string& path, const UniBinding& b);

std::vector<Violation> validate(const SemiCompDataset& d);
std::vector<Violation> validate(const IntervalDataset& d);
std::vector<Violation> validate(const UniDataset& d);

// Maps right-censored records onto intervals: an observed event becomes a
// degenerate interval at its time, an unobserved one gets upper bound +Inf.
// Requires a dataset that passes validate.
IntervalDataset to_interval_representation(const SemiCompDataset& d);

Table to_table(const SemiCompDataset& d, const ColumnBinding& b = {});
Table to_table(const UniDataset& d, const UniBinding& b = {});

}  // namespace scr
