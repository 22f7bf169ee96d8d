#pragma once

#include <Eigen/Dense>
#include <vector>

#include "drs/errors.hpp"
#include "drs/rng.hpp"
#include "drs/student_t.hpp"

namespace drs::dlm {

// Twin discount factors: delta governs state drift (1 = static coefficients),
// beta governs observational volatility drift (1 = constant variance). Both
// limits are handled exactly, not by epsilon damping.
struct DiscountConfig {
  double delta = 0.99;
  double beta = 0.95;

  void validate() const {
    if (!(delta > 0.0) || delta > 1.0 || !(beta > 0.0) || beta > 1.0) {
      throw InvalidArgumentError(
          "discount factors must lie in (0, 1]; got delta=" +
          std::to_string(delta) + ", beta=" + std::to_string(beta));
    }
  }
};

// Conjugate normal/inverse-gamma posterior summary at time t:
//   theta_t | v_t ~ N(m, C v_t / s),  v_t^{-1} ~ Gamma(n/2, n s / 2).
struct DlmState {
  Eigen::VectorXd m;
  Eigen::MatrixXd C;
  double n = 10.0;
  double s = 0.01;
  int t = 0;

  int dim() const { return static_cast<int>(m.size()); }
  void validate() const;
};

// Reference prior: m = 0, C = I, n = 10, s = 0.01.
DlmState default_prior(int dim);

struct FilterStep {
  StudentT forecast;   // predictive density evaluated before the observation
  DlmState posterior;  // state after absorbing the observation
};

// One discount-filter update with regressor row F and observation y.
FilterStep filter_step(const DlmState& state, const Eigen::VectorXd& F,
                       double y, const DiscountConfig& disc);

// Predictive density for the observation k steps ahead of the state's clock,
// holding the regressor row fixed: the state scale opens up to C / delta^k
// and the volatility dof decays to beta^k n. k = 1 is the density
// filter_step would use.
StudentT forecast_density(const DlmState& state, const Eigen::VectorXd& F,
                          const DiscountConfig& disc, int k = 1);

struct FilterOutput {
  std::vector<StudentT> forecasts;    // one per row, pre-observation
  std::vector<DlmState> posteriors;  // one per row, post-observation
};

// Sequentially filters the rows of a design matrix. Forecast r is the
// predictive density for y[r] given rows 0..r-1 only.
FilterOutput run_expanding_filter(const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& y,
                                  const DlmState& prior,
                                  const DiscountConfig& disc);

// Joint draw of (theta_{t+1}, v_{t+1}) pushed one step beyond a posterior:
// v_t from its inverse-gamma marginal, v_{t+1} = beta v_t / gamma with
// gamma ~ Beta(beta n/2, (1-beta) n/2), theta_t | v_t from the posterior,
// theta_{t+1} = theta_t + N(0, C (1-delta)/delta * v_{t+1}/s). The discount
// limits are exact: beta = 1 keeps v, delta = 1 keeps theta.
struct EvolutionDraw {
  Eigen::VectorXd theta;
  double v = 0.0;
};

EvolutionDraw sample_evolution(const DlmState& state,
                               const DiscountConfig& disc, Rng& rng);

// x with a leading column of ones.
Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x);

}  // namespace drs::dlm
