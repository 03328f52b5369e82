#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "scr/csv.hpp"
#include "scr/dataset.hpp"
#include "scr/rng.hpp"

using namespace scr;
using Catch::Approx;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

Table table_from(const std::string& csv) {
  std::istringstream in(csv);
  return read_csv(in, "csv");
}

std::string to_csv(const Table& t) {
  std::ostringstream out;
  write_csv(out, t);
  return out.str();
}
}  // namespace

TEST_CASE("csv write then read is bitwise lossless") {
  Rng rng(31);
  Table t;
  t.names = {"a", "b", "c"};
  t.cols.resize(3);
  for (int i = 0; i < 60; ++i) {
    t.cols[0].push_back(rng.normal(0, 1e-7));
    t.cols[1].push_back(rng.normal(1e12, 1));
    t.cols[2].push_back(rng.unif01());
  }
  t.cols[0][0] = 0.1;  // not exactly representable
  t.cols[1][1] = -0.0;
  t.cols[2][2] = 12345678901234567.0;
  const Table back = table_from(to_csv(t));
  REQUIRE(back.names == t.names);
  for (int j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < t.cols[j].size(); ++i) {
      INFO("col " << j << " row " << i);
      // bitwise equality, not approximate
      CHECK(std::memcmp(&back.cols[j][i], &t.cols[j][i], sizeof(double)) == 0);
    }
}

TEST_CASE("csv handles infinities, NaN, and reports bad cells") {
  const Table t = table_from("x,y\n1,Inf\n-inf,nan\n");
  CHECK(t.cols[1][0] == kInf);
  CHECK(t.cols[0][1] == -kInf);
  CHECK(std::isnan(t.cols[1][1]));
  const Table back = table_from(to_csv(t));
  CHECK(back.cols[0][1] == -kInf);
  CHECK(std::isnan(back.cols[1][1]));

  CHECK_THROWS_WITH(table_from("x,y\n1,frog\n"),
                    Catch::Matchers::ContainsSubstring("row 1") &&
                        Catch::Matchers::ContainsSubstring("frog"));
  CHECK_THROWS_WITH(table_from("x,y\n1\n"), Catch::Matchers::ContainsSubstring("row 1"));
  CHECK_THROWS_AS(table_from(""), DataError);
  CHECK_THROWS_WITH(load_uni(table_from("time,event,time\n1,0,2\n"), UniBinding{}),
                    Catch::Matchers::ContainsSubstring("duplicate column 'time'"));
}

TEST_CASE("semicompeting loader binds the requested columns") {
  const Table t = table_from(
      "time1,event1,time2,event2,age,sex,id\n"
      "0.5,1,2,1,63,1,10\n"
      "3,0,3,0,41,0,7\n");
  ColumnBinding b;
  b.x1 = {"age"};
  b.x2 = {"age", "sex"};
  b.x3 = {"sex"};
  b.cluster = "id";
  const SemiCompDataset d = load_semicomp(t, b);
  REQUIRE(d.rec.size() == 2);
  CHECK(d.rec[0].time1 == 0.5);
  CHECK(d.rec[0].event1 == 1.0);
  CHECK(d.rec[0].time2 == 2.0);
  CHECK(d.rec[1].event2 == 0.0);
  CHECK(d.cov.x1(0, 0) == 63.0);
  CHECK(d.cov.x2(1, 1) == 0.0);
  CHECK(d.cov.x3(0, 0) == 1.0);
  // cluster labels are densified to 0-based ids in sorted order
  CHECK(d.cov.n_clusters == 2);
  CHECK(d.cov.cluster[0] == 1);
  CHECK(d.cov.cluster[1] == 0);
  CHECK(validate(d).empty());
}

TEST_CASE("loader reports a missing column by name") {
  const Table t = table_from("time1,event1,time2\n1,0,1\n");
  CHECK_THROWS_WITH(load_semicomp(t, ColumnBinding{}),
                    Catch::Matchers::ContainsSubstring("event2"));
  ColumnBinding b;
  b.x1 = {"bmi"};
  const Table t2 = table_from("time1,event1,time2,event2\n1,0,1,0\n");
  CHECK_THROWS_WITH(load_semicomp(t2, b), Catch::Matchers::ContainsSubstring("bmi"));
}

TEST_CASE("semicompeting validation flags each malformed row once") {
  SemiCompDataset d;
  d.rec = {
      {2.0, 0.0, 2.0, 1.0},   // terminal without non-terminal: fine
      {1.0, 1.0, 2.0, 1.0},   // both events: fine
      {2.0, 0.0, 3.0, 0.0},   // gap with no non-terminal event
      {2.0, 1.0, 2.0, 1.0},   // tie with event1 = 1
      {3.0, 0.0, 2.0, 0.0},   // time1 > time2
      {-1.0, 0.0, -1.0, 0.0}, // negative time
      {1.0, 2.0, 2.0, 0.0},   // event flag outside {0,1}
  };
  const auto v = validate(d);
  auto msgs_for = [&](std::size_t row) {
    std::vector<std::string> m;
    for (const auto& x : v)
      if (x.row == row) m.push_back(x.message);
    return m;
  };
  CHECK(msgs_for(1).empty());
  CHECK(msgs_for(2).empty());
  REQUIRE(msgs_for(3).size() == 1);
  CHECK(msgs_for(3)[0] == "event1 = 0 requires time1 == time2");
  REQUIRE(msgs_for(4).size() == 1);
  CHECK_THAT(msgs_for(4)[0], Catch::Matchers::ContainsSubstring("ties are rejected"));
  REQUIRE(msgs_for(5).size() >= 1);
  CHECK_THAT(msgs_for(5)[0], Catch::Matchers::ContainsSubstring("time1 exceeds time2"));
  REQUIRE(msgs_for(6).size() == 1);
  CHECK_THAT(msgs_for(6)[0], Catch::Matchers::ContainsSubstring("finite and non-negative"));
  REQUIRE(msgs_for(7).size() == 1);
  CHECK_THAT(msgs_for(7)[0], Catch::Matchers::ContainsSubstring("event1 must be exactly 0 or 1"));
}

TEST_CASE("exact records convert to the interval form") {
  SemiCompDataset d;
  d.rec = {
      {3.0, 1.0, 7.0, 0.0},
      {5.0, 0.0, 5.0, 0.0},
      {2.0, 1.0, 4.0, 1.0},
      {4.0, 0.0, 4.0, 1.0},
  };
  const IntervalDataset iv = to_interval_representation(d);
  REQUIRE(iv.rec.size() == 4);
  for (const auto& r : iv.rec) CHECK(r.lt == 0.0);

  CHECK(iv.rec[0].y1l == 3.0);
  CHECK(iv.rec[0].y1u == 3.0);
  CHECK(iv.rec[0].y2l == 7.0);
  CHECK(iv.rec[0].y2u == kInf);

  CHECK(iv.rec[1].y1l == 5.0);
  CHECK(iv.rec[1].y1u == kInf);
  CHECK(iv.rec[1].y2l == 5.0);
  CHECK(iv.rec[1].y2u == kInf);

  CHECK(iv.rec[2].y1u == 2.0);
  CHECK(iv.rec[2].y2u == 4.0);

  CHECK(iv.rec[3].y1l == 4.0);
  CHECK(iv.rec[3].y1u == kInf);
  CHECK(iv.rec[3].y2l == 4.0);
  CHECK(iv.rec[3].y2u == 4.0);

  CHECK(validate(iv).empty());

  d.rec.push_back({5.0, 1.0, 5.0, 1.0});
  CHECK_THROWS_WITH(to_interval_representation(d),
                    Catch::Matchers::ContainsSubstring("row 5"));
}

TEST_CASE("interval validation catches inverted and impossible bounds") {
  IntervalDataset d;
  d.rec = {
      {0.0, 3.0, 3.0, 7.0, kInf},  // fine
      {1.0, 0.5, 2.0, 3.0, 4.0},   // LT after y1L
      {0.0, 4.0, 2.0, 5.0, 6.0},   // y1L > y1U
      {0.0, 5.0, 6.0, 1.0, 4.0},   // non-terminal cannot start after terminal closes
  };
  const auto v = validate(d);
  auto has_row = [&](std::size_t row, const std::string& frag) {
    for (const auto& x : v)
      if (x.row == row && x.message.find(frag) != std::string::npos) return true;
    return false;
  };
  CHECK(!has_row(1, ""));
  CHECK(has_row(2, "LT exceeds y1L"));
  CHECK(has_row(3, "y1L exceeds y1U"));
  CHECK(has_row(4, "y1L exceeds y2U"));
}

TEST_CASE("dataset to table to dataset round-trips") {
  const Table t = table_from(
      "time1,event1,time2,event2,age,sex,site\n"
      "0.5,1,2,1,63,1,3\n"
      "3,0,3,0,41,0,3\n"
      "1.25,1,1.5,0,55,1,8\n");
  ColumnBinding b;
  b.x1 = {"age", "sex"};
  b.x2 = {"age"};
  b.x3 = {"sex"};
  b.cluster = "site";
  const SemiCompDataset d = load_semicomp(t, b);
  const Table out = to_table(d, b);
  // shared covariates appear once; cluster written as dense ids
  CHECK(out.names ==
        std::vector<std::string>{"time1", "event1", "time2", "event2", "age", "sex", "site"});
  const SemiCompDataset d2 = load_semicomp(out, b);
  REQUIRE(d2.rec.size() == d.rec.size());
  for (std::size_t i = 0; i < d.rec.size(); ++i) {
    CHECK(d2.rec[i].time1 == d.rec[i].time1);
    CHECK(d2.rec[i].event1 == d.rec[i].event1);
    CHECK(d2.rec[i].time2 == d.rec[i].time2);
    CHECK(d2.rec[i].event2 == d.rec[i].event2);
  }
  CHECK(d2.cov.x1 == d.cov.x1);
  CHECK(d2.cov.cluster == d.cov.cluster);
  CHECK(d2.cov.n_clusters == d.cov.n_clusters);
}

TEST_CASE("univariate loader and validation") {
  const Table t = table_from("time,event,dose\n2,1,0.5\n7,0,1.5\n");
  UniBinding b;
  b.x = {"dose"};
  const UniDataset d = load_uni(t, b);
  REQUIRE(d.rec.size() == 2);
  CHECK(d.rec[0].time == 2.0);
  CHECK(d.rec[1].event == 0.0);
  CHECK(d.x(1, 0) == 1.5);
  CHECK(validate(d).empty());

  UniDataset bad = d;
  bad.rec[0].time = -3.0;
  bad.rec[1].event = 0.5;
  const auto v = validate(bad);
  REQUIRE(v.size() == 2);
  CHECK(v[0].row == 1);
  CHECK(v[1].row == 2);
}
