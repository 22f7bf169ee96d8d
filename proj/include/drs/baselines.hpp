#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "drs/dlm.hpp"
#include "drs/errors.hpp"
#include "drs/student_t.hpp"

namespace drs::baselines {

// Student-t mixture with fixed weights; the common currency of the density
// combination baselines.
struct MixtureDensity {
  Eigen::VectorXd weights;  // simplex
  std::vector<StudentT> components;

  void validate() const;
  double log_pdf(double y) const;  // log-sum-exp over components
  double mean() const;             // requires every component dof > 1
};

// Expanding-window location/scale summary of the target's own history:
// location = mean, scale = sample variance (floored), dof = count - 1.
StudentT historical_average(const Eigen::VectorXd& y_history,
                            double variance_floor = 1e-8);

MixtureDensity equal_weight_pool(const std::vector<StudentT>& components);

// Sequential Bayesian model averaging over a fixed model set. Weights live in
// log space so degeneracy saturates instead of producing NaN.
struct BmaState {
  Eigen::VectorXd log_weights;

  int size() const { return static_cast<int>(log_weights.size()); }
  Eigen::VectorXd weights() const;
  void validate() const;
};

BmaState bma_uniform(int n_models);

struct BmaStep {
  MixtureDensity forecast;  // built from the pre-update weights
  BmaState next;
};

BmaStep bma_step(const BmaState& state, const std::vector<StudentT>& forecasts,
                 double y_realized);

// Lasso on a column-standardized design with unpenalized intercept:
//   (1/2n) ||y - b0 - X b||^2 + lambda ||b||_1.
// coefficients/intercept are reported on the original scale.
struct LassoFit {
  double lambda = 0.0;
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  double residual_variance = 0.0;
  int n_active = 0;
  int n_rows = 0;
  double kkt_residual = 0.0;  // max stationarity violation at the solution

  double predict(const Eigen::VectorXd& x_new) const;
};

LassoFit lasso_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                   double lambda);

// Largest penalty with an all-zero solution, and the default fitting grid:
// log-spaced from lambda_max down through `decades` factors of ten.
double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
Eigen::VectorXd lasso_lambda_grid(const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& y, int size = 100,
                                  double decades = 4.0);

// Leave-one-out CV over the grid; ties go to the larger (sparser) penalty.
// Returns the winning penalty and the full-data refit at it.
struct LassoSelection {
  double lambda = 0.0;
  LassoFit fit;
  Eigen::VectorXd cv_mse;  // aligned with the grid
};
LassoSelection lasso_loo_select(const Eigen::MatrixXd& x,
                                const Eigen::VectorXd& y,
                                const Eigen::VectorXd& grid);

StudentT lasso_predictive_density(const LassoFit& fit,
                                  const Eigen::VectorXd& x_new,
                                  double variance_floor = 1e-8);

// Static principal-component decomposition of a standardized design.
struct FactorModel {
  Eigen::MatrixXd loadings;  // p x k, orthonormal columns
  Eigen::MatrixXd scores;    // n x k
  Eigen::VectorXd explained_variance;
  Eigen::VectorXd col_mean;
  Eigen::VectorXd col_sd;

  Eigen::VectorXd project(const Eigen::VectorXd& x_new) const;
};

FactorModel pca_decompose(const Eigen::MatrixXd& x, int n_factors);

// Discount DLM on PCA factor scores: decompose the design rows available so
// far, filter y on (1, scores), and return the predictive density for the
// projection of x_next, opened `steps` discount steps ahead.
StudentT pc_regression_density(const Eigen::MatrixXd& x_history,
                               const Eigen::VectorXd& y_history,
                               const Eigen::VectorXd& x_next, int n_factors,
                               const dlm::DiscountConfig& disc, int steps = 1);

}  // namespace drs::baselines
