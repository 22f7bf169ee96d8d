#include "drs/dlm.hpp"

#include <cmath>

namespace drs::dlm {

void DlmState::validate() const {
  if (m.size() == 0) throw InvalidArgumentError("DLM state has dimension 0");
  if (C.rows() != m.size() || C.cols() != m.size()) {
    throw InvalidArgumentError("DLM scale matrix shape disagrees with mean");
  }
  if (!m.allFinite() || !C.allFinite()) {
    throw NumericError("DLM state contains non-finite values");
  }
  if (!(n > 0.0) || !(s > 0.0)) {
    throw NumericError("DLM state requires n > 0 and s > 0");
  }
  if (!C.isApprox(C.transpose(), 1e-8)) {
    throw NumericError("DLM scale matrix is not symmetric");
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(C);
  if (llt.info() != Eigen::Success) {
    throw NumericError("DLM scale matrix is not positive definite");
  }
}

DlmState default_prior(int dim) {
  if (dim < 1) throw InvalidArgumentError("prior dimension must be >= 1");
  DlmState st;
  st.m = Eigen::VectorXd::Zero(dim);
  st.C = Eigen::MatrixXd::Identity(dim, dim);
  st.n = 10.0;
  st.s = 0.01;
  st.t = 0;
  return st;
}

namespace {

void check_row(const DlmState& state, const Eigen::VectorXd& F) {
  if (F.size() != state.m.size()) {
    throw InvalidArgumentError("regressor row has dimension " +
                               std::to_string(F.size()) + ", state has " +
                               std::to_string(state.m.size()));
  }
  if (!F.allFinite()) throw NumericError("regressor row is non-finite");
}

}  // namespace

StudentT forecast_density(const DlmState& state, const Eigen::VectorXd& F,
                          const DiscountConfig& disc, int k) {
  disc.validate();
  check_row(state, F);
  if (k < 1) throw InvalidArgumentError("forecast step must be >= 1");
  const double open = std::pow(disc.delta, -k);
  const double q = F.dot((state.C * open) * F) + state.s;
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw NumericError("non-positive forecast scale q");
  }
  StudentT d;
  d.dof = std::pow(disc.beta, k) * state.n;
  d.location = F.dot(state.m);
  d.scale = q;
  return d;
}

FilterStep filter_step(const DlmState& state, const Eigen::VectorXd& F,
                       double y, const DiscountConfig& disc) {
  disc.validate();
  check_row(state, F);
  if (!std::isfinite(y)) throw NumericError("observation is non-finite");

  const Eigen::MatrixXd R =
      ((state.C / disc.delta) + (state.C / disc.delta).transpose()) / 2.0;
  const double bn = disc.beta * state.n;
  const Eigen::VectorXd RF = R * F;
  const double q = F.dot(RF) + state.s;
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw NumericError("non-positive forecast scale q");
  }

  FilterStep out;
  out.forecast.dof = bn;
  out.forecast.location = F.dot(state.m);
  out.forecast.scale = q;

  const double e = y - out.forecast.location;
  const Eigen::VectorXd A = RF / q;
  const double n_new = bn + 1.0;
  const double r = (bn + e * e / q) / n_new;

  DlmState& post = out.posterior;
  post.m = state.m + A * e;
  post.C = r * (R - q * (A * A.transpose()));
  post.C = ((post.C + post.C.transpose()) / 2.0).eval();
  post.n = n_new;
  post.s = r * state.s;
  post.t = state.t + 1;
  if (!(post.s > 0.0) || !std::isfinite(post.s) || !post.m.allFinite() ||
      !post.C.allFinite()) {
    throw NumericError("filter update produced a degenerate state");
  }
  return out;
}

FilterOutput run_expanding_filter(const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& y,
                                  const DlmState& prior,
                                  const DiscountConfig& disc) {
  prior.validate();
  disc.validate();
  if (X.rows() != y.size()) {
    throw InvalidArgumentError("design and target row counts disagree");
  }
  if (X.cols() != prior.m.size()) {
    throw InvalidArgumentError("design width disagrees with the prior");
  }
  FilterOutput out;
  out.forecasts.reserve(X.rows());
  out.posteriors.reserve(X.rows());
  DlmState state = prior;
  for (int t = 0; t < X.rows(); ++t) {
    try {
      FilterStep step = filter_step(state, X.row(t).transpose(), y[t], disc);
      state = step.posterior;
      out.forecasts.push_back(step.forecast);
      out.posteriors.push_back(std::move(step.posterior));
    } catch (const Error& e) {
      throw NumericError("filter failed at row " + std::to_string(t) + ": " +
                         e.what());
    }
  }
  return out;
}

EvolutionDraw sample_evolution(const DlmState& state,
                               const DiscountConfig& disc, Rng& rng) {
  state.validate();
  disc.validate();
  const double v_t = 1.0 / rng.gamma(0.5 * state.n, 0.5 * state.n * state.s);
  double v_next = v_t;
  if (disc.beta < 1.0) {
    const double g =
        rng.beta(0.5 * disc.beta * state.n, 0.5 * (1.0 - disc.beta) * state.n);
    v_next = disc.beta * v_t / g;
  }
  const int p = state.dim();
  const Eigen::LLT<Eigen::MatrixXd> llt(state.C);
  if (llt.info() != Eigen::Success) {
    throw NumericError("state scale matrix is not positive definite");
  }
  Eigen::VectorXd z(p);
  for (int i = 0; i < p; ++i) z[i] = rng.normal();
  Eigen::VectorXd scaled = llt.matrixL() * z;
  Eigen::VectorXd theta = state.m + std::sqrt(v_t / state.s) * scaled;
  if (disc.delta < 1.0) {
    const double w = (1.0 - disc.delta) / disc.delta * v_next / state.s;
    for (int i = 0; i < p; ++i) z[i] = rng.normal();
    scaled = llt.matrixL() * z;
    theta += std::sqrt(w) * scaled;
  }
  return EvolutionDraw{std::move(theta), v_next};
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), x.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(x.cols()) = x;
  return out;
}

}  // namespace drs::dlm
