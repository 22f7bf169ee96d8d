#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "drs/errors.hpp"
#include "drs/panel.hpp"

namespace drs::eval {

// One scored forecast: the predictive point and log density a model produced
// for a target date, plus the realized value.
struct ForecastRecord {
  data::MonthDate target_date;
  std::string model;
  int horizon = 1;
  double point = 0.0;
  double log_density = 0.0;
  double realized = 0.0;
};

double rmsfe(const std::vector<ForecastRecord>& records);

// Cumulative log predictive density ratio of a model over a reference,
// aligned by target date; both inputs must cover the same dates in the same
// order. Entry t sums the log-score differences through t.
std::vector<double> lpdr_series(const std::vector<ForecastRecord>& model,
                                const std::vector<ForecastRecord>& reference);

// Monte-Carlo R-squared of one latent column regressed on all the others
// (with intercept) across posterior draws; draws is N x J. A degenerate
// regressand (zero variance across draws) reports 0.
double mc_r2_full(const Eigen::MatrixXd& draws, int target);

// Squared correlation between two draw vectors; degenerate inputs report 0.
double mc_r2_pairwise(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace drs::eval
