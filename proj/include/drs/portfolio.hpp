#pragma once

#include <Eigen/Dense>
#include <vector>

#include "drs/errors.hpp"
#include "drs/panel.hpp"

namespace drs::portfolio {

// Single-period power-utility allocation between a riskless asset earning
// r_f and the risky asset earning r_f + y, both in log returns; y is the
// model's forecast target. gamma is relative risk aversion (> 0, != 1).
struct AllocationConfig {
  double gamma = 5.0;
  double lower = -1.0;
  double upper = 2.0;
  double step = 0.01;

  void validate() const;
  int grid_size() const;
  double grid_point(int i) const;
};

// Gross portfolio return (1 - w) e^{r_f} + w e^{r_f + y}.
double gross_return(double weight, double y, double r_f);

// [(1-w) e^{r_f} + w e^{r_f+y}]^{1-gamma} / (1-gamma); requires a positive
// gross return.
double power_utility(double weight, double y, double r_f, double gamma);

// Grid search maximizing Monte-Carlo expected utility over predictive draws.
// Weights whose gross return is non-positive under any draw are infeasible;
// exact ties resolve toward the smallest |weight|. All-infeasible is an
// error.
double optimal_weight(const Eigen::VectorXd& y_draws, double r_f,
                      const AllocationConfig& config);

struct WealthPath {
  std::vector<data::MonthDate> dates;
  std::vector<double> weights;
  std::vector<double> wealth;    // after each period; always > 0
  std::vector<double> utility;   // realized per-period utility
};

// Applies a weight sequence to realized outcomes, compounding wealth from
// 1.0. A non-positive intermediate wealth is a hard error naming the date.
WealthPath realized_utility_series(const std::vector<data::MonthDate>& dates,
                                   const std::vector<double>& weights,
                                   const std::vector<double>& realized_y,
                                   const std::vector<double>& r_f,
                                   double gamma);

// Certainty-equivalent excess return of a model against a reference:
// (sum U_model / sum U_reference)^{1/(1-gamma)} - 1.
double cer_aggregate(const std::vector<double>& utility_model,
                     const std::vector<double>& utility_reference,
                     double gamma);

// Per-period CER_t = (U_model,t / U_ref,t)^{1/(1-gamma)} - 1.
std::vector<double> cer_single_period(
    const std::vector<double>& utility_model,
    const std::vector<double>& utility_reference, double gamma);

// Cumulative compounded CER: entry t sums log(1 + CER_tau) for tau <= t.
// A CER <= -1 is a hard error naming the date.
std::vector<double> ccer_series(const std::vector<double>& single_period_cer,
                                const std::vector<data::MonthDate>& dates);

}  // namespace drs::portfolio
