#pragma once

#include <Eigen/Dense>
#include <compare>
#include <iosfwd>
#include <string>
#include <vector>

#include "drs/errors.hpp"

namespace drs::data {

// Calendar month, the panel's native frequency.
struct MonthDate {
  int year = 1900;
  int month = 1;  // 1..12

  static MonthDate parse(const std::string& text);  // "YYYY-MM"
  static MonthDate from_serial(int serial) {
    return MonthDate{serial / 12, serial % 12 + 1};
  }
  int serial() const { return year * 12 + (month - 1); }
  MonthDate plus(int months) const { return from_serial(serial() + months); }
  std::string str() const;

  friend auto operator<=>(const MonthDate&, const MonthDate&) = default;
};

// Balanced monthly panel: one target series and a named predictor matrix on a
// shared, gap-free, strictly increasing date index.
struct TimeSeriesPanel {
  std::vector<MonthDate> dates;
  std::string target_name;
  Eigen::VectorXd y;
  std::vector<std::string> predictor_names;
  Eigen::MatrixXd x;  // rows() x predictor_names.size()

  int rows() const { return static_cast<int>(dates.size()); }
  int cols() const { return static_cast<int>(predictor_names.size()); }
  int index_of(const MonthDate& d) const;      // -1 if absent
  int column_of(const std::string& name) const;  // -1 if absent
  void validate() const;
};

// CSV layout: header "date,<target>,<predictor>..."; every cell numeric.
TimeSeriesPanel load_panel(const std::string& path);
TimeSeriesPanel parse_panel_csv(std::istream& in, const std::string& origin);
void save_panel(const TimeSeriesPanel& panel, const std::string& path);

// Disjoint covering partition of predictor columns into J >= 1 named groups.
// Columns listed under the reserved name "ignore" are excluded from every
// group but count as covered.
struct GroupPartition {
  std::vector<std::string> group_names;
  std::vector<std::vector<int>> members;  // parallel to group_names
  std::vector<int> ignored;

  int n_groups() const { return static_cast<int>(group_names.size()); }
  void validate(int n_panel_cols) const;
};

// Mapping file: one "name: [col, col, ...]" entry per line, '#' comments.
GroupPartition partition_groups(const TimeSeriesPanel& panel,
                                const std::string& mapping_path);
GroupPartition parse_group_mapping(const TimeSeriesPanel& panel,
                                   std::istream& in,
                                   const std::string& origin);

// Direct lag-k regression frame: the row with target date t pairs y_t with
// the predictor row observed at t-k, so a 1-step filter over rows emits
// k-step-ahead densities. Row r of x may optionally be z-scored per column
// with expanding moments of the predictor history through its own predictor
// date, which preserves origin causality.
struct SupervisedSlice {
  std::vector<MonthDate> target_dates;  // panel dates k..T-1
  Eigen::VectorXd y;
  Eigen::MatrixXd x;
  int horizon = 1;
  std::vector<int> columns;  // panel column ids, in slice order
  bool standardized = false;

  int rows() const { return static_cast<int>(target_dates.size()); }
};

SupervisedSlice build_supervised(const TimeSeriesPanel& panel,
                                 const std::vector<int>& columns, int horizon,
                                 bool expanding_standardize = false);

}  // namespace drs::data
