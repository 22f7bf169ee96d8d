#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "drs/config.hpp"
#include "drs/evaluation.hpp"
#include "drs/panel.hpp"
#include "drs/portfolio.hpp"

namespace drs::run {

// Reserved model ids; group models use their group name, which therefore
// must not collide with these.
inline constexpr const char* kSynthesisModel = "drs";
inline constexpr const char* kHistoricalAverage = "ha";
inline constexpr const char* kEqualWeight = "ew";
inline constexpr const char* kBma = "bma";
inline constexpr const char* kLasso = "lasso";
inline constexpr const char* kPca = "pca";
inline constexpr const char* kFullDlm = "full";

struct CoefficientTrajectory {
  std::vector<data::MonthDate> dates;  // forecast origins
  std::vector<std::string> names;     // "intercept" then group names
  Eigen::MatrixXd values;             // dates x names
};

struct R2Output {
  std::vector<data::MonthDate> dates;
  std::vector<std::string> groups;
  Eigen::MatrixXd full;                     // dates x groups
  std::vector<std::pair<int, int>> pairs;   // group index pairs, j < q
  Eigen::MatrixXd pairwise;                 // dates x pairs
};

struct PortfolioOutput {
  std::string model;
  portfolio::WealthPath unconstrained;
  portfolio::WealthPath no_short;
  double cer = 0.0;           // aggregate vs the synthesis reference
  double cer_no_short = 0.0;
  double mean_single_period_cer = 0.0;
  double final_ccer = 0.0;
  std::vector<double> single_period_cer;
  std::vector<double> ccer;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<std::string> model_ids;  // emission order; synthesis first
  // model id -> horizon -> records over the shared evaluation dates
  std::map<std::string, std::map<int, std::vector<eval::ForecastRecord>>>
      records;
  std::map<int, CoefficientTrajectory> coefficients;
  std::map<int, R2Output> r2;
  std::vector<PortfolioOutput> portfolio;
  std::vector<std::string> warnings;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

// Writes the full report set under out_dir and returns the emitted file
// names (also written to manifest.txt). Output bytes are a pure function of
// the result.
std::vector<std::string> emit_reports(const ExperimentResult& result,
                                      const std::string& out_dir);

}  // namespace drs::run
