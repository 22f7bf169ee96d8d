#include <cmath>
#include <cstdio>
#include <sstream>

#include "catch2/catch_amalgamated.hpp"
#include "drs/panel.hpp"

using namespace drs;
using data::MonthDate;
using data::TimeSeriesPanel;

namespace {

TimeSeriesPanel tiny_panel(int rows, int cols) {
  TimeSeriesPanel p;
  p.target_name = "y";
  p.dates.resize(rows);
  p.y.resize(rows);
  p.x.resize(rows, cols);
  p.predictor_names.resize(cols);
  for (int c = 0; c < cols; ++c) p.predictor_names[c] = "x" + std::to_string(c);
  for (int t = 0; t < rows; ++t) {
    p.dates[t] = MonthDate{2010, 1}.plus(t);
    p.y[t] = 0.1 * t;
    for (int c = 0; c < cols; ++c) p.x(t, c) = t + 10.0 * c;
  }
  return p;
}

}  // namespace

TEST_CASE("month dates parse, print and step across year ends") {
  const MonthDate d = MonthDate::parse("1999-12");
  REQUIRE(d.year == 1999);
  REQUIRE(d.month == 12);
  REQUIRE(d.str() == "1999-12");
  REQUIRE(d.plus(1).str() == "2000-01");
  REQUIRE(d.plus(-23).str() == "1998-01");
  REQUIRE(d < MonthDate{2000, 1});
  REQUIRE_THROWS_AS(MonthDate::parse("1999-13"), ParseError);
  REQUIRE_THROWS_AS(MonthDate::parse("199-12"), ParseError);
  REQUIRE_THROWS_AS(MonthDate::parse("1999/12"), ParseError);
}

TEST_CASE("panel csv parses and indexes") {
  std::istringstream in(
      "date,ret,dp,tbl\n"
      "2001-01,0.5,1.0,2.0\n"
      "2001-02,-0.25,1.5,2.5\n");
  const TimeSeriesPanel p = data::parse_panel_csv(in, "mem");
  REQUIRE(p.target_name == "ret");
  REQUIRE(p.rows() == 2);
  REQUIRE(p.cols() == 2);
  REQUIRE(p.y[1] == -0.25);
  REQUIRE(p.x(1, 0) == 1.5);
  REQUIRE(p.index_of(MonthDate{2001, 2}) == 1);
  REQUIRE(p.index_of(MonthDate{2001, 3}) == -1);
  REQUIRE(p.column_of("tbl") == 1);
  REQUIRE(p.column_of("nope") == -1);
}

TEST_CASE("panel csv rejects malformed input with located errors") {
  SECTION("bad cell names row and column") {
    std::istringstream in(
        "date,y,a\n"
        "2001-01,0.5,1.0\n"
        "2001-02,oops,1.5\n");
    REQUIRE_THROWS_WITH(data::parse_panel_csv(in, "mem"),
                        Catch::Matchers::ContainsSubstring("row 3") &&
                            Catch::Matchers::ContainsSubstring("y"));
  }
  SECTION("calendar gap") {
    std::istringstream in(
        "date,y,a\n"
        "2001-01,0.5,1.0\n"
        "2001-03,0.5,1.5\n");
    REQUIRE_THROWS_AS(data::parse_panel_csv(in, "mem"), ValidationError);
  }
  SECTION("missing header") {
    std::istringstream in("2001-01,0.5,1.0\n");
    REQUIRE_THROWS_AS(data::parse_panel_csv(in, "mem"), ParseError);
  }
  SECTION("duplicate predictor names") {
    std::istringstream in(
        "date,y,a,a\n"
        "2001-01,0.5,1.0,2.0\n");
    REQUIRE_THROWS_AS(data::parse_panel_csv(in, "mem"), ValidationError);
  }
  SECTION("non-finite value") {
    std::istringstream in(
        "date,y,a\n"
        "2001-01,inf,1.0\n");
    REQUIRE_THROWS_AS(data::parse_panel_csv(in, "mem"), Error);
  }
}

TEST_CASE("panel save and load round trip") {
  TimeSeriesPanel p = tiny_panel(5, 2);
  p.y[3] = 0.123456789012345;
  const std::string path = "test_panel_roundtrip.csv";
  data::save_panel(p, path);
  const TimeSeriesPanel q = data::load_panel(path);
  REQUIRE(q.rows() == p.rows());
  REQUIRE(q.target_name == p.target_name);
  REQUIRE(q.predictor_names == p.predictor_names);
  for (int t = 0; t < p.rows(); ++t) {
    REQUIRE(q.dates[t] == p.dates[t]);
    REQUIRE_THAT(q.y[t], Catch::Matchers::WithinRel(p.y[t], 1e-11));
  }
  std::remove(path.c_str());
}

TEST_CASE("group mapping parses, validates coverage and rejects overlap") {
  const TimeSeriesPanel p = tiny_panel(4, 4);
  SECTION("happy path with ignore") {
    std::istringstream in(
        "# comment\n"
        "g1: [x0, x1]\n"
        "g2: [x2]\n"
        "ignore: [x3]\n");
    const data::GroupPartition gp = data::parse_group_mapping(p, in, "mem");
    REQUIRE(gp.n_groups() == 2);
    REQUIRE(gp.members[0] == std::vector<int>{0, 1});
    REQUIRE(gp.members[1] == std::vector<int>{2});
    REQUIRE(gp.ignored == std::vector<int>{3});
  }
  SECTION("uncovered column") {
    std::istringstream in("g1: [x0, x1]\n");
    REQUIRE_THROWS_AS(data::parse_group_mapping(p, in, "mem"),
                      ValidationError);
  }
  SECTION("column claimed twice") {
    std::istringstream in(
        "g1: [x0, x1]\n"
        "g2: [x1, x2, x3]\n");
    REQUIRE_THROWS_AS(data::parse_group_mapping(p, in, "mem"),
                      ValidationError);
  }
  SECTION("unknown predictor") {
    std::istringstream in("g1: [x0, x1, x2, x3, nope]\n");
    REQUIRE_THROWS_AS(data::parse_group_mapping(p, in, "mem"), Error);
  }
}

TEST_CASE("supervised slice pairs targets with lag-k predictors") {
  const TimeSeriesPanel p = tiny_panel(8, 3);
  const data::SupervisedSlice s = data::build_supervised(p, {0, 2}, 2, false);
  REQUIRE(s.rows() == 6);
  REQUIRE(s.horizon == 2);
  for (int r = 0; r < s.rows(); ++r) {
    REQUIRE(s.target_dates[r] == p.dates[r + 2]);
    REQUIRE(s.y[r] == p.y[r + 2]);
    REQUIRE(s.x(r, 0) == p.x(r, 0));
    REQUIRE(s.x(r, 1) == p.x(r, 2));
  }
}

TEST_CASE("expanding standardization never looks ahead") {
  TimeSeriesPanel p = tiny_panel(12, 1);
  for (int t = 0; t < 12; ++t) p.x(t, 0) = std::sin(1.0 + t);
  const data::SupervisedSlice base = data::build_supervised(p, {0}, 1, true);
  TimeSeriesPanel q = p;
  // Perturb the last predictor month that enters the slice; only the slice row
  // observed at that month may react.
  q.x(10, 0) = 99.0;
  q.y[11] = -99.0;
  const data::SupervisedSlice bent = data::build_supervised(q, {0}, 1, true);
  for (int r = 0; r + 1 < base.rows(); ++r) {
    REQUIRE(base.x(r, 0) == bent.x(r, 0));
  }
  REQUIRE(base.x(base.rows() - 1, 0) != bent.x(bent.rows() - 1, 0));
}

TEST_CASE("expanding standardization uses only past and current history") {
  TimeSeriesPanel p = tiny_panel(6, 1);
  p.x(0, 0) = 1.0;
  p.x(1, 0) = 3.0;
  p.x(2, 0) = 5.0;
  const data::SupervisedSlice s = data::build_supervised(p, {0}, 1, true);
  // Row 1 of the slice holds the predictor observed at month 1, z-scored with
  // the sample mean/sd of months 0..1: (3 - 2) / sqrt(2).
  REQUIRE_THAT(s.x(1, 0),
               Catch::Matchers::WithinAbs(1.0 / std::sqrt(2.0), 1e-12));
  // Row 0 has a single observation of history; its sd is degenerate, so the
  // value collapses to zero.
  REQUIRE(s.x(0, 0) == 0.0);
}
