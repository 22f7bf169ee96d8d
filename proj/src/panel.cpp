#include "drs/panel.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace drs::data {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_cell(const std::string& cell, const std::string& origin, int row,
                  const std::string& column) {
  const std::string t = trim(cell);
  if (t.empty()) {
    throw ParseError(origin + ": row " + std::to_string(row) + ", column '" +
                     column + "': empty cell");
  }
  const char* begin = t.data();
  const char* end = begin + t.size();
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ParseError(origin + ": row " + std::to_string(row) + ", column '" +
                     column + "': malformed numeric cell '" + t + "'");
  }
  return value;
}

}  // namespace

MonthDate MonthDate::parse(const std::string& text) {
  const std::string t = trim(text);
  const auto bad = [&] {
    return ParseError("bad month date '" + t + "', expected YYYY-MM");
  };
  if (t.size() != 7 || t[4] != '-') throw bad();
  int year = 0, month = 0;
  auto r1 = std::from_chars(t.data(), t.data() + 4, year);
  auto r2 = std::from_chars(t.data() + 5, t.data() + 7, month);
  if (r1.ec != std::errc() || r1.ptr != t.data() + 4 || r2.ec != std::errc() ||
      r2.ptr != t.data() + 7) {
    throw bad();
  }
  if (month < 1 || month > 12) throw bad();
  return MonthDate{year, month};
}

std::string MonthDate::str() const {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
  return buf;
}

int TimeSeriesPanel::index_of(const MonthDate& d) const {
  if (dates.empty()) return -1;
  const int offset = d.serial() - dates.front().serial();
  if (offset < 0 || offset >= rows()) return -1;
  return offset;
}

int TimeSeriesPanel::column_of(const std::string& name) const {
  const auto it =
      std::find(predictor_names.begin(), predictor_names.end(), name);
  return it == predictor_names.end()
             ? -1
             : static_cast<int>(it - predictor_names.begin());
}

void TimeSeriesPanel::validate() const {
  if (dates.empty()) throw ValidationError("panel has no rows");
  if (y.size() != rows() || x.rows() != rows()) {
    throw ValidationError("panel series lengths disagree with the date index");
  }
  if (x.cols() != cols()) {
    throw ValidationError("predictor matrix width disagrees with names");
  }
  for (int t = 1; t < rows(); ++t) {
    if (dates[t].serial() != dates[t - 1].serial() + 1) {
      throw ValidationError("panel dates must advance by exactly one month; " +
                            dates[t - 1].str() + " is followed by " +
                            dates[t].str());
    }
  }
  std::set<std::string> seen;
  if (target_name.empty()) throw ValidationError("target column has no name");
  seen.insert(target_name);
  for (const auto& n : predictor_names) {
    if (n.empty()) throw ValidationError("predictor with empty name");
    if (!seen.insert(n).second) {
      throw ValidationError("duplicate column name '" + n + "'");
    }
  }
  if (!y.allFinite() || !x.allFinite()) {
    throw ValidationError("panel contains non-finite values");
  }
}

TimeSeriesPanel parse_panel_csv(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(origin + ": empty file");
  const auto header = split_csv_line(line);
  if (header.size() < 2) {
    throw ParseError(origin + ": header must be date,<target>[,predictors...]");
  }
  if (header[0] != "date") {
    throw ParseError(origin + ": first header column must be 'date', got '" +
                     header[0] + "'");
  }
  TimeSeriesPanel panel;
  panel.target_name = header[1];
  panel.predictor_names.assign(header.begin() + 2, header.end());
  const int p = panel.cols();

  std::vector<MonthDate> dates;
  std::vector<double> ys;
  std::vector<double> xs;  // row-major staging
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != p + 2) {
      throw ParseError(origin + ": row " + std::to_string(row) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(p + 2));
    }
    try {
      dates.push_back(MonthDate::parse(cells[0]));
    } catch (const ParseError& e) {
      throw ParseError(origin + ": row " + std::to_string(row) + ": " +
                       e.what());
    }
    ys.push_back(parse_cell(cells[1], origin, row, panel.target_name));
    for (int j = 0; j < p; ++j) {
      xs.push_back(parse_cell(cells[j + 2], origin, row,
                              panel.predictor_names[j]));
    }
  }
  const int t_len = static_cast<int>(dates.size());
  if (t_len == 0) throw ParseError(origin + ": no data rows");
  panel.dates = std::move(dates);
  panel.y = Eigen::Map<Eigen::VectorXd>(ys.data(), t_len);
  panel.x = Eigen::Map<
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      xs.data(), t_len, p);
  panel.validate();
  return panel;
}

TimeSeriesPanel load_panel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open panel file '" + path + "'");
  return parse_panel_csv(in, path);
}

void save_panel(const TimeSeriesPanel& panel, const std::string& path) {
  panel.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write panel file '" + path + "'");
  out << "date," << panel.target_name;
  for (const auto& n : panel.predictor_names) out << ',' << n;
  out << '\n';
  char buf[32];
  const auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    out << ',' << buf;
  };
  for (int t = 0; t < panel.rows(); ++t) {
    out << panel.dates[t].str();
    put(panel.y[t]);
    for (int j = 0; j < panel.cols(); ++j) put(panel.x(t, j));
    out << '\n';
  }
  if (!out) throw IoError("failed while writing '" + path + "'");
}

void GroupPartition::validate(int n_panel_cols) const {
  if (group_names.empty()) {
    throw ValidationError("group partition must define at least one group");
  }
  if (members.size() != group_names.size()) {
    throw ValidationError("group partition arrays disagree");
  }
  std::set<std::string> names;
  std::vector<char> covered(n_panel_cols, 0);
  const auto cover = [&](int col, const std::string& who) {
    if (col < 0 || col >= n_panel_cols) {
      throw ValidationError("group '" + who + "' references column id " +
                            std::to_string(col) + " outside the panel");
    }
    if (covered[col]) {
      throw ValidationError("column id " + std::to_string(col) +
                            " assigned more than once");
    }
    covered[col] = 1;
  };
  for (std::size_t g = 0; g < group_names.size(); ++g) {
    if (group_names[g].empty() || group_names[g] == "ignore") {
      throw ValidationError("invalid group name '" + group_names[g] + "'");
    }
    if (!names.insert(group_names[g]).second) {
      throw ValidationError("duplicate group name '" + group_names[g] + "'");
    }
    if (members[g].empty()) {
      throw ValidationError("group '" + group_names[g] + "' is empty");
    }
    for (int col : members[g]) cover(col, group_names[g]);
  }
  for (int col : ignored) cover(col, "ignore");
  for (int c = 0; c < n_panel_cols; ++c) {
    if (!covered[c]) {
      throw ValidationError("column id " + std::to_string(c) +
                            " is neither grouped nor ignored");
    }
  }
}

GroupPartition parse_group_mapping(const TimeSeriesPanel& panel,
                                   std::istream& in,
                                   const std::string& origin) {
  GroupPartition part;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto err = [&](const std::string& msg) {
      return ParseError(origin + ": line " + std::to_string(row) + ": " + msg);
    };
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw err("expected 'name: [col, ...]'");
    const std::string name = trim(line.substr(0, colon));
    std::string body = trim(line.substr(colon + 1));
    if (body.size() < 2 || body.front() != '[' || body.back() != ']') {
      throw err("column list must be bracketed");
    }
    body = body.substr(1, body.size() - 2);
    std::vector<int> cols;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::string col_name = trim(item);
      if (col_name.empty()) throw err("empty column entry");
      const int col = panel.column_of(col_name);
      if (col < 0) throw err("unknown predictor '" + col_name + "'");
      cols.push_back(col);
    }
    if (cols.empty()) throw err("group '" + name + "' lists no columns");
    if (name == "ignore") {
      part.ignored.insert(part.ignored.end(), cols.begin(), cols.end());
    } else {
      part.group_names.push_back(name);
      part.members.push_back(std::move(cols));
    }
  }
  try {
    part.validate(panel.cols());
  } catch (const ValidationError& e) {
    throw ValidationError(origin + ": " + e.what());
  }
  return part;
}

GroupPartition partition_groups(const TimeSeriesPanel& panel,
                                const std::string& mapping_path) {
  std::ifstream in(mapping_path);
  if (!in) throw IoError("cannot open group mapping '" + mapping_path + "'");
  return parse_group_mapping(panel, in, mapping_path);
}

SupervisedSlice build_supervised(const TimeSeriesPanel& panel,
                                 const std::vector<int>& columns, int horizon,
                                 bool expanding_standardize) {
  panel.validate();
  if (horizon < 1) {
    throw InvalidArgumentError("supervised horizon must be >= 1");
  }
  if (horizon >= panel.rows()) {
    throw InvalidArgumentError("horizon " + std::to_string(horizon) +
                               " leaves no rows in a panel of length " +
                               std::to_string(panel.rows()));
  }
  if (columns.empty()) {
    throw InvalidArgumentError("supervised slice needs at least one column");
  }
  for (int c : columns) {
    if (c < 0 || c >= panel.cols()) {
      throw InvalidArgumentError("column id " + std::to_string(c) +
                                 " outside the panel");
    }
  }
  SupervisedSlice slice;
  slice.horizon = horizon;
  slice.columns = columns;
  slice.standardized = expanding_standardize;
  const int t_len = panel.rows() - horizon;
  const int p = static_cast<int>(columns.size());
  slice.target_dates.assign(panel.dates.begin() + horizon, panel.dates.end());
  slice.y = panel.y.tail(t_len);
  slice.x.resize(t_len, p);
  for (int j = 0; j < p; ++j) {
    slice.x.col(j) = panel.x.col(columns[j]).head(t_len);
  }
  if (expanding_standardize) {
    // Row r carries the predictor row observed at panel time r; z-score it
    // with moments of that column through time r only.
    for (int j = 0; j < p; ++j) {
      double sum = 0.0, sumsq = 0.0;
      Eigen::VectorXd col = slice.x.col(j);
      for (int r = 0; r < t_len; ++r) {
        const double v = col[r];
        sum += v;
        sumsq += v * v;
        const double n = r + 1.0;
        const double mean = sum / n;
        double var = (sumsq - n * mean * mean) / (n > 1.0 ? n - 1.0 : 1.0);
        var = std::max(var, 0.0);
        const double sd = std::sqrt(var);
        slice.x(r, j) = sd > 1e-12 ? (v - mean) / sd : 0.0;
      }
    }
  }
  return slice;
}

}  // namespace drs::data
