#include "scr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace scr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd bind_matrix(const Table& t, const std::vector<std::string>& names) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(t.nrow()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto& c = t.col(names[j]);
    for (std::size_t i = 0; i < c.size(); ++i)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c[i];
  }
  return x;
}

std::pair<std::vector<int>, int> bind_cluster(const Table& t, const std::string& name) {
  if (name.empty()) return {{}, 0};
  const auto& c = t.col(name);
  std::map<double, int> ids;
  for (const double v : c) {
    if (!std::isfinite(v)) throw DataError("cluster column '" + name + "' has a non-finite label");
    ids.emplace(v, 0);
  }
  int next = 0;
  for (auto& kv : ids) kv.second = next++;
  std::vector<int> out;
  out.reserve(c.size());
  for (const double v : c) out.push_back(ids[v]);
  return {out, next};
}

void check_header_unique(const Table& t) {
  std::set<std::string> seen;
  for (const auto& n : t.names)
    if (!seen.insert(n).second) throw DataError("duplicate column '" + n + "' in header");
}

bool is_flag(double v) { return v == 0.0 || v == 1.0; }

}  // namespace

SemiCompDataset load_semicomp(const Table& t, const ColumnBinding& b) {
  check_header_unique(t);
  SemiCompDataset d;
  const auto& t1 = t.col(b.time1);
  const auto& e1 = t.col(b.event1);
  const auto& t2 = t.col(b.time2);
  const auto& e2 = t.col(b.event2);
  d.rec.resize(t.nrow());
  for (std::size_t i = 0; i < t.nrow(); ++i) d.rec[i] = {t1[i], e1[i], t2[i], e2[i]};
  d.cov.x1 = bind_matrix(t, b.x1);
  d.cov.x2 = bind_matrix(t, b.x2);
  d.cov.x3 = bind_matrix(t, b.x3);
  d.cov.names1 = b.x1;
  d.cov.names2 = b.x2;
  d.cov.names3 = b.x3;
  std::tie(d.cov.cluster, d.cov.n_clusters) = bind_cluster(t, b.cluster);
  return d;
}

SemiCompDataset load_semicomp_csv(const std::string& path, const ColumnBinding& b) {
  return load_semicomp(read_csv_file(path), b);
}

IntervalDataset load_interval(const Table& t, const IntervalBinding& b) {
  check_header_unique(t);
  IntervalDataset d;
  const auto& lt = t.col(b.lt);
  const auto& y1l = t.col(b.y1l);
  const auto& y1u = t.col(b.y1u);
  const auto& y2l = t.col(b.y2l);
  const auto& y2u = t.col(b.y2u);
  d.rec.resize(t.nrow());
  for (std::size_t i = 0; i < t.nrow(); ++i) d.rec[i] = {lt[i], y1l[i], y1u[i], y2l[i], y2u[i]};
  d.cov.x1 = bind_matrix(t, b.x1);
  d.cov.x2 = bind_matrix(t, b.x2);
  d.cov.x3 = bind_matrix(t, b.x3);
  d.cov.names1 = b.x1;
  d.cov.names2 = b.x2;
  d.cov.names3 = b.x3;
  return d;
}

UniDataset load_uni(const Table& t, const UniBinding& b) {
  check_header_unique(t);
  UniDataset d;
  const auto& tt = t.col(b.time);
  const auto& ee = t.col(b.event);
  d.rec.resize(t.nrow());
  for (std::size_t i = 0; i < t.nrow(); ++i) d.rec[i] = {tt[i], ee[i]};
  d.x = bind_matrix(t, b.x);
  d.names = b.x;
  std::tie(d.cluster, d.n_clusters) = bind_cluster(t, b.cluster);
  return d;
}

UniDataset load_uni_csv(const std::string& path, const UniBinding& b) {
  return load_uni(read_csv_file(path), b);
}

std::vector<Violation> validate(const SemiCompDataset& d) {
  std::vector<Violation> out;
  for (std::size_t i = 0; i < d.rec.size(); ++i) {
    const auto& r = d.rec[i];
    const std::size_t row = i + 1;
    if (!std::isfinite(r.time1) || !std::isfinite(r.time2) || r.time1 < 0 || r.time2 < 0) {
      out.push_back({row, "times must be finite and non-negative"});
      continue;
    }
    if (!is_flag(r.event1)) out.push_back({row, "event1 must be exactly 0 or 1"});
    if (!is_flag(r.event2)) out.push_back({row, "event2 must be exactly 0 or 1"});
    if (r.time1 > r.time2) out.push_back({row, "time1 exceeds time2"});
    if (r.event1 == 0.0 && r.time1 != r.time2)
      out.push_back({row, "event1 = 0 requires time1 == time2"});
    if (r.event1 == 1.0 && !(r.time1 < r.time2))
      out.push_back({row, "event1 = 1 requires time1 < time2 (ties are rejected)"});
  }
  return out;
}

std::vector<Violation> validate(const IntervalDataset& d) {
  std::vector<Violation> out;
  for (std::size_t i = 0; i < d.rec.size(); ++i) {
    const auto& r = d.rec[i];
    const std::size_t row = i + 1;
    if (std::isnan(r.lt) || std::isnan(r.y1l) || std::isnan(r.y1u) || std::isnan(r.y2l) ||
        std::isnan(r.y2u)) {
      out.push_back({row, "interval bounds must not be NaN"});
      continue;
    }
    if (!(r.lt >= 0) || std::isinf(r.lt)) out.push_back({row, "LT must be finite and >= 0"});
    if (std::isinf(r.y1l) || std::isinf(r.y2l))
      out.push_back({row, "lower bounds must be finite"});
    if (r.y1l > r.y1u) out.push_back({row, "y1L exceeds y1U"});
    if (r.y2l > r.y2u) out.push_back({row, "y2L exceeds y2U"});
    if (r.lt > r.y1l) out.push_back({row, "LT exceeds y1L"});
    if (r.lt > r.y2l) out.push_back({row, "LT exceeds y2L"});
    if (r.y1l > r.y2u) out.push_back({row, "y1L exceeds y2U"});
  }
  return out;
}

std::vector<Violation> validate(const UniDataset& d) {
  std::vector<Violation> out;
  for (std::size_t i = 0; i < d.rec.size(); ++i) {
    const auto& r = d.rec[i];
    const std::size_t row = i + 1;
    if (!std::isfinite(r.time) || r.time < 0)
      out.push_back({row, "time must be finite and non-negative"});
    if (!is_flag(r.event)) out.push_back({row, "event must be exactly 0 or 1"});
  }
  return out;
}

IntervalDataset to_interval_representation(const SemiCompDataset& d) {
  if (const auto v = validate(d); !v.empty())
    throw DataError("to_interval_representation: dataset fails validation at row " +
                    std::to_string(v.front().row) + ": " + v.front().message);
  IntervalDataset out;
  out.cov = d.cov;
  out.rec.resize(d.rec.size());
  for (std::size_t i = 0; i < d.rec.size(); ++i) {
    const auto& r = d.rec[i];
    IntervalRecord iv;
    iv.lt = 0.0;
    iv.y1l = r.time1;
    iv.y1u = r.event1 == 1.0 ? r.time1 : kInf;
    iv.y2l = r.time2;
    iv.y2u = r.event2 == 1.0 ? r.time2 : kInf;
    out.rec[i] = iv;
  }
  return out;
}

Table to_table(const SemiCompDataset& d, const ColumnBinding& b) {
  Table t;
  const std::size_t n = d.rec.size();
  auto add = [&](const std::string& name, auto get) {
    t.names.push_back(name);
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = get(i);
    t.cols.push_back(std::move(c));
  };
  add(b.time1, [&](std::size_t i) { return d.rec[i].time1; });
  add(b.event1, [&](std::size_t i) { return d.rec[i].event1; });
  add(b.time2, [&](std::size_t i) { return d.rec[i].time2; });
  add(b.event2, [&](std::size_t i) { return d.rec[i].event2; });
  // covariate columns are emitted once each even when transitions share them
  std::set<std::string> seen(t.names.begin(), t.names.end());
  auto add_block = [&](const Eigen::MatrixXd& x, const std::vector<std::string>& names) {
    for (std::size_t j = 0; j < names.size(); ++j) {
      if (!seen.insert(names[j]).second) continue;
      t.names.push_back(names[j]);
      std::vector<double> c(n);
      for (std::size_t i = 0; i < n; ++i)
        c[i] = x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      t.cols.push_back(std::move(c));
    }
  };
  add_block(d.cov.x1, d.cov.names1);
  add_block(d.cov.x2, d.cov.names2);
  add_block(d.cov.x3, d.cov.names3);
  if (!d.cov.cluster.empty()) {
    const std::string name = b.cluster.empty() ? "cluster" : b.cluster;
    if (seen.insert(name).second) {
      t.names.push_back(name);
      std::vector<double> c(n);
      for (std::size_t i = 0; i < n; ++i) c[i] = d.cov.cluster[i];
      t.cols.push_back(std::move(c));
    }
  }
  return t;
}

Table to_table(const UniDataset& d, const UniBinding& b) {
  Table t;
  const std::size_t n = d.rec.size();
  t.names = {b.time, b.event};
  t.cols.resize(2);
  t.cols[0].resize(n);
  t.cols[1].resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.cols[0][i] = d.rec[i].time;
    t.cols[1][i] = d.rec[i].event;
  }
  for (std::size_t j = 0; j < d.names.size(); ++j) {
    t.names.push_back(d.names[j]);
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i)
      c[i] = d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    t.cols.push_back(std::move(c));
  }
  if (!d.cluster.empty()) {
    t.names.push_back(b.cluster.empty() ? "cluster" : b.cluster);
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = d.cluster[i];
    t.cols.push_back(std::move(c));
  }
  return t;
}

}  // namespace scr
