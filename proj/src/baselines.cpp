#include "drs/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace drs::baselines {

void MixtureDensity::validate() const {
  if (components.empty() ||
      weights.size() != static_cast<int>(components.size())) {
    throw InvalidArgumentError("mixture weights and components disagree");
  }
  if (weights.minCoeff() < 0.0 || std::abs(weights.sum() - 1.0) > 1e-10) {
    throw InvalidArgumentError("mixture weights must form a simplex");
  }
  for (const auto& c : components) c.validate();
}

double MixtureDensity::log_pdf(double y) const {
  validate();
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(components.size(),
                            -std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < components.size(); ++j) {
    if (weights[static_cast<int>(j)] <= 0.0) continue;
    terms[j] =
        std::log(weights[static_cast<int>(j)]) + components[j].log_pdf(y);
    best = std::max(best, terms[j]);
  }
  if (!std::isfinite(best)) {
    throw NumericError("mixture density collapsed to zero mass");
  }
  double acc = 0.0;
  for (const double t : terms) {
    if (std::isfinite(t)) acc += std::exp(t - best);
  }
  return best + std::log(acc);
}

double MixtureDensity::mean() const {
  validate();
  double m = 0.0;
  for (std::size_t j = 0; j < components.size(); ++j) {
    m += weights[static_cast<int>(j)] * components[j].mean();
  }
  return m;
}

StudentT historical_average(const Eigen::VectorXd& y_history,
                            double variance_floor) {
  const int n = static_cast<int>(y_history.size());
  if (n < 2) {
    throw InvalidArgumentError(
        "historical average needs at least two observations");
  }
  const double mean = y_history.mean();
  const double ss = (y_history.array() - mean).square().sum();
  StudentT d;
  d.dof = n - 1.0;
  d.location = mean;
  d.scale = std::max(ss / (n - 1.0), variance_floor);
  return d;
}

MixtureDensity equal_weight_pool(const std::vector<StudentT>& components) {
  if (components.empty()) {
    throw InvalidArgumentError("equal-weight pool needs components");
  }
  MixtureDensity mix;
  mix.components = components;
  mix.weights = Eigen::VectorXd::Constant(
      static_cast<int>(components.size()),
      1.0 / static_cast<double>(components.size()));
  mix.validate();
  return mix;
}

Eigen::VectorXd BmaState::weights() const {
  const double top = log_weights.maxCoeff();
  Eigen::VectorXd w = (log_weights.array() - top).exp();
  return w / w.sum();
}

void BmaState::validate() const {
  if (log_weights.size() == 0) throw InvalidArgumentError("empty BMA state");
  if (!log_weights.allFinite()) {
    const double top = log_weights.maxCoeff();
    if (!std::isfinite(top)) {
      throw NumericError("BMA state has no finite weight");
    }
    // -inf entries are legitimate: a model with zero posterior mass.
    for (int j = 0; j < log_weights.size(); ++j) {
      if (std::isnan(log_weights[j]) ||
          log_weights[j] == std::numeric_limits<double>::infinity()) {
        throw NumericError("BMA state contains NaN or +inf");
      }
    }
  }
}

BmaState bma_uniform(int n_models) {
  if (n_models < 1) throw InvalidArgumentError("BMA needs >= 1 model");
  BmaState st;
  st.log_weights =
      Eigen::VectorXd::Constant(n_models, -std::log(double(n_models)));
  return st;
}

BmaStep bma_step(const BmaState& state, const std::vector<StudentT>& forecasts,
                 double y_realized) {
  state.validate();
  if (static_cast<int>(forecasts.size()) != state.size()) {
    throw InvalidArgumentError("BMA forecast count disagrees with state");
  }
  BmaStep out;
  out.forecast.components = forecasts;
  out.forecast.weights = state.weights();
  out.forecast.validate();

  out.next.log_weights = state.log_weights;
  for (int j = 0; j < state.size(); ++j) {
    out.next.log_weights[j] += forecasts[j].log_pdf(y_realized);
  }
  const double top = out.next.log_weights.maxCoeff();
  if (!std::isfinite(top)) {
    throw NumericError("all BMA weights vanished after an update");
  }
  double norm = 0.0;
  for (int j = 0; j < state.size(); ++j) {
    norm += std::exp(out.next.log_weights[j] - top);
  }
  out.next.log_weights.array() -= top + std::log(norm);
  return out;
}

namespace {

struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;  // entries with sd below 1e-12 are flagged degenerate
  std::vector<bool> live;
};

Standardizer standardize_stats(const Eigen::MatrixXd& x) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  Standardizer st;
  st.mean = x.colwise().mean();
  st.sd.resize(p);
  st.live.resize(p);
  for (int j = 0; j < p; ++j) {
    const double var =
        (x.col(j).array() - st.mean[j]).square().sum() / double(n);
    st.sd[j] = std::sqrt(var);
    st.live[j] = st.sd[j] > 1e-12;
  }
  return st;
}

double soft_threshold(double z, double lam) {
  if (z > lam) return z - lam;
  if (z < -lam) return z + lam;
  return 0.0;
}

// Cyclic coordinate descent in covariance form on the standardized design.
// gram = X'X/n with unit diagonal, corr = X'(y - ybar)/n. Degenerate columns
// carry gram row/col 0 and stay at coefficient 0.
void coordinate_descent(const Eigen::MatrixXd& gram,
                        const Eigen::VectorXd& corr, double lambda,
                        const std::vector<bool>& live, Eigen::VectorXd& beta,
                        Eigen::VectorXd& gram_beta) {
  const int p = static_cast<int>(beta.size());
  constexpr double tol = 1e-12;
  constexpr int max_sweeps = 10000;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (int j = 0; j < p; ++j) {
      if (!live[j]) continue;
      const double z = corr[j] - gram_beta[j] + beta[j];
      const double bj = soft_threshold(z, lambda);
      const double delta = bj - beta[j];
      if (delta != 0.0) {
        beta[j] = bj;
        gram_beta.noalias() += delta * gram.col(j);
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    if (max_delta < tol) return;
  }
  throw NumericError("lasso coordinate descent failed to converge");
}

struct LassoProblem {
  Eigen::MatrixXd gram;
  Eigen::VectorXd corr;
  Standardizer st;
  double y_mean = 0.0;
};

LassoProblem lasso_problem(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size() || x.rows() < 2 || x.cols() < 1) {
    throw InvalidArgumentError("lasso needs >= 2 rows and >= 1 column");
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw NumericError("lasso inputs contain non-finite values");
  }
  LassoProblem pr;
  pr.st = standardize_stats(x);
  pr.y_mean = y.mean();
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  Eigen::MatrixXd xs(n, p);
  for (int j = 0; j < p; ++j) {
    if (pr.st.live[j]) {
      xs.col(j) = (x.col(j).array() - pr.st.mean[j]) / pr.st.sd[j];
    } else {
      xs.col(j).setZero();
    }
  }
  pr.gram.noalias() = xs.transpose() * xs / double(n);
  pr.corr.noalias() =
      xs.transpose() * (y.array() - pr.y_mean).matrix() / double(n);
  return pr;
}

LassoFit finish_fit(const LassoProblem& pr, const Eigen::MatrixXd& x,
                    const Eigen::VectorXd& y, double lambda,
                    const Eigen::VectorXd& beta_std,
                    const Eigen::VectorXd& gram_beta) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  LassoFit fit;
  fit.lambda = lambda;
  fit.n_rows = n;
  fit.coefficients.resize(p);
  for (int j = 0; j < p; ++j) {
    fit.coefficients[j] =
        pr.st.live[j] ? beta_std[j] / pr.st.sd[j] : 0.0;
    if (beta_std[j] != 0.0) ++fit.n_active;
  }
  fit.intercept = pr.y_mean;
  for (int j = 0; j < p; ++j) {
    if (pr.st.live[j]) fit.intercept -= beta_std[j] * pr.st.mean[j] / pr.st.sd[j];
  }
  double rss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = y[i] - fit.predict(x.row(i).transpose());
    rss += r * r;
  }
  const double dof = std::max(double(n - fit.n_active - 1), 1.0);
  fit.residual_variance = rss / dof;

  // Stationarity of the penalized objective at the solution.
  double worst = 0.0;
  for (int j = 0; j < p; ++j) {
    if (!pr.st.live[j]) continue;
    const double g = pr.corr[j] - gram_beta[j];
    if (beta_std[j] != 0.0) {
      worst = std::max(worst, std::abs(g - lambda * (beta_std[j] > 0 ? 1.0 : -1.0)));
    } else {
      worst = std::max(worst, std::max(0.0, std::abs(g) - lambda));
    }
  }
  fit.kkt_residual = worst;
  return fit;
}

}  // namespace

double LassoFit::predict(const Eigen::VectorXd& x_new) const {
  if (x_new.size() != coefficients.size()) {
    throw InvalidArgumentError("lasso prediction row has the wrong width");
  }
  return intercept + coefficients.dot(x_new);
}

double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const LassoProblem pr = lasso_problem(x, y);
  double top = 0.0;
  for (int j = 0; j < pr.corr.size(); ++j) {
    if (pr.st.live[j]) top = std::max(top, std::abs(pr.corr[j]));
  }
  return top;
}

Eigen::VectorXd lasso_lambda_grid(const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& y, int size,
                                  double decades) {
  if (size < 2 || decades <= 0.0) {
    throw InvalidArgumentError("lasso grid needs size >= 2 and decades > 0");
  }
  const double lam_max = lasso_lambda_max(x, y);
  if (lam_max <= 0.0) {
    throw NumericError("lambda_max is zero: no predictor varies with y");
  }
  Eigen::VectorXd grid(size);
  const double step = -decades / double(size - 1);
  for (int i = 0; i < size; ++i) {
    grid[i] = lam_max * std::pow(10.0, step * i);
  }
  return grid;
}

LassoFit lasso_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                   double lambda) {
  if (lambda < 0.0) throw InvalidArgumentError("lambda must be >= 0");
  const LassoProblem pr = lasso_problem(x, y);
  const int p = static_cast<int>(x.cols());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd gram_beta = Eigen::VectorXd::Zero(p);
  coordinate_descent(pr.gram, pr.corr, lambda, pr.st.live, beta, gram_beta);
  return finish_fit(pr, x, y, lambda, beta, gram_beta);
}

LassoSelection lasso_loo_select(const Eigen::MatrixXd& x,
                                const Eigen::VectorXd& y,
                                const Eigen::VectorXd& grid) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  if (grid.size() < 1) throw InvalidArgumentError("empty lambda grid");
  if (n < 3) throw InvalidArgumentError("LOO selection needs >= 3 rows");
  for (int i = 1; i < grid.size(); ++i) {
    if (!(grid[i] < grid[i - 1])) {
      throw InvalidArgumentError("lambda grid must be strictly decreasing");
    }
  }
  if (!(grid[grid.size() - 1] >= 0.0)) {
    throw InvalidArgumentError("lambda grid must be nonnegative");
  }

  // Full-sample raw moments, downdated per left-out row; coordinate descent
  // then runs in covariance form so each fold costs O(p^2) per sweep.
  const Eigen::MatrixXd xtx = x.transpose() * x;
  const Eigen::VectorXd xty = x.transpose() * y;
  const Eigen::VectorXd xsum = x.colwise().sum();
  const double ysum = y.sum();

  Eigen::VectorXd cv_sse = Eigen::VectorXd::Zero(grid.size());
  Eigen::MatrixXd gram(p, p);
  Eigen::VectorXd corr(p), mean(p), sd(p), beta(p), gram_beta(p), xs_new(p);
  std::vector<bool> live(p);
  for (int i = 0; i < n; ++i) {
    const double nf = n - 1.0;
    const Eigen::VectorXd xi = x.row(i).transpose();
    mean = (xsum - xi) / nf;
    const double y_mean = (ysum - y[i]) / nf;
    bool any_live = false;
    for (int j = 0; j < p; ++j) {
      const double var =
          (xtx(j, j) - xi[j] * xi[j]) / nf - mean[j] * mean[j];
      sd[j] = std::sqrt(std::max(var, 0.0));
      live[j] = sd[j] > 1e-12;
      any_live = any_live || live[j];
    }
    for (int j = 0; j < p; ++j) {
      if (!live[j]) {
        gram.col(j).setZero();
        gram.row(j).setZero();
        corr[j] = 0.0;
        continue;
      }
      for (int l = 0; l <= j; ++l) {
        double g = 0.0;
        if (live[l]) {
          g = ((xtx(j, l) - xi[j] * xi[l]) / nf - mean[j] * mean[l]) /
              (sd[j] * sd[l]);
        }
        gram(j, l) = g;
        gram(l, j) = g;
      }
      corr[j] =
          ((xty[j] - xi[j] * y[i]) / nf - mean[j] * y_mean) / sd[j];
    }
    if (!any_live) {
      throw NumericError("LOO fold " + std::to_string(i) +
                         " has no varying predictor");
    }
    beta.setZero();
    gram_beta.setZero();
    for (int j = 0; j < p; ++j) {
      xs_new[j] = live[j] ? (xi[j] - mean[j]) / sd[j] : 0.0;
    }
    for (int g = 0; g < grid.size(); ++g) {
      coordinate_descent(gram, corr, grid[g], live, beta, gram_beta);
      const double pred = y_mean + xs_new.dot(beta);
      const double err = y[i] - pred;
      cv_sse[g] += err * err;
    }
  }

  LassoSelection sel;
  sel.cv_mse = cv_sse / double(n);
  int best = 0;
  for (int g = 1; g < grid.size(); ++g) {
    // Strict improvement required, so equal scores keep the larger penalty.
    if (sel.cv_mse[g] < sel.cv_mse[best]) best = g;
  }
  sel.lambda = grid[best];
  sel.fit = lasso_fit(x, y, sel.lambda);
  return sel;
}

StudentT lasso_predictive_density(const LassoFit& fit,
                                  const Eigen::VectorXd& x_new,
                                  double variance_floor) {
  StudentT d;
  d.dof = std::max(double(fit.n_rows - fit.n_active - 1), 3.0);
  d.location = fit.predict(x_new);
  d.scale = std::max(fit.residual_variance, variance_floor);
  return d;
}

Eigen::VectorXd FactorModel::project(const Eigen::VectorXd& x_new) const {
  if (x_new.size() != loadings.rows()) {
    throw InvalidArgumentError("projection row has the wrong width");
  }
  Eigen::VectorXd z(x_new.size());
  for (int j = 0; j < x_new.size(); ++j) {
    z[j] = col_sd[j] > 1e-12 ? (x_new[j] - col_mean[j]) / col_sd[j] : 0.0;
  }
  return loadings.transpose() * z;
}

FactorModel pca_decompose(const Eigen::MatrixXd& x, int n_factors) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  if (n_factors < 1 || n_factors > std::min(n, p)) {
    throw InvalidArgumentError("factor count must lie in [1, min(rows, cols)]");
  }
  if (!x.allFinite()) throw NumericError("PCA input contains non-finite values");
  const Standardizer st = standardize_stats(x);
  Eigen::MatrixXd xs(n, p);
  for (int j = 0; j < p; ++j) {
    if (st.live[j]) {
      xs.col(j) = (x.col(j).array() - st.mean[j]) / st.sd[j];
    } else {
      xs.col(j).setZero();
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      xs, Eigen::ComputeThinU | Eigen::ComputeThinV);
  FactorModel fm;
  fm.col_mean = st.mean;
  fm.col_sd.resize(p);
  for (int j = 0; j < p; ++j) fm.col_sd[j] = st.live[j] ? st.sd[j] : 0.0;
  fm.loadings = svd.matrixV().leftCols(n_factors);
  // Deterministic orientation: the largest-magnitude entry of each loading
  // points up.
  for (int k = 0; k < n_factors; ++k) {
    int arg = 0;
    fm.loadings.col(k).cwiseAbs().maxCoeff(&arg);
    if (fm.loadings(arg, k) < 0.0) fm.loadings.col(k) = -fm.loadings.col(k);
  }
  fm.scores = xs * fm.loadings;
  fm.explained_variance.resize(n_factors);
  for (int k = 0; k < n_factors; ++k) {
    const double sv = svd.singularValues()[k];
    fm.explained_variance[k] = sv * sv / double(n);
  }
  return fm;
}

StudentT pc_regression_density(const Eigen::MatrixXd& x_history,
                               const Eigen::VectorXd& y_history,
                               const Eigen::VectorXd& x_next, int n_factors,
                               const dlm::DiscountConfig& disc, int steps) {
  if (x_history.rows() != y_history.size()) {
    throw InvalidArgumentError("PC regression history lengths disagree");
  }
  const FactorModel fm = pca_decompose(x_history, n_factors);
  const Eigen::MatrixXd design = dlm::with_intercept(fm.scores);
  const dlm::DlmState prior = dlm::default_prior(n_factors + 1);
  const dlm::FilterOutput filt =
      dlm::run_expanding_filter(design, y_history, prior, disc);
  Eigen::VectorXd f_next(n_factors + 1);
  f_next[0] = 1.0;
  f_next.tail(n_factors) = fm.project(x_next);
  return dlm::forecast_density(filt.posteriors.back(), f_next, disc, steps);
}

}  // namespace drs::baselines
