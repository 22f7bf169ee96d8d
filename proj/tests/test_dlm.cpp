#include <cmath>

#include "catch2/catch_amalgamated.hpp"
#include "drs/dlm.hpp"

using namespace drs;
using dlm::DiscountConfig;
using dlm::DlmState;

namespace {

// Composite Simpson rule over [a, b]; f is assumed finite on the closure.
template <class F>
double simpson(F f, double a, double b, int panels) {
  const double h = (b - a) / (2 * panels);
  double acc = f(a) + f(b);
  for (int i = 1; i < 2 * panels; ++i) {
    acc += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return acc * h / 3.0;
}

DlmState symmetric_state() {
  DlmState st;
  st.m = Eigen::Vector2d(1.0, -2.0);
  st.C.resize(2, 2);
  st.C << 2.0, 0.3, 0.3, 1.0;
  st.n = 30.0;
  st.s = 2.0;
  return st;
}

}  // namespace

TEST_CASE("scalar filter step reproduces the hand-computed update") {
  DlmState prior;
  prior.m = Eigen::VectorXd::Ones(1) * 0.0;
  prior.C = Eigen::MatrixXd::Ones(1, 1);
  prior.n = 1.0;
  prior.s = 1.0;
  Eigen::VectorXd F = Eigen::VectorXd::Ones(1);
  const dlm::FilterStep step =
      dlm::filter_step(prior, F, 1.0, DiscountConfig{1.0, 1.0});
  // Every quantity is dyadic, so the comparisons are exact.
  REQUIRE(step.forecast.dof == 1.0);
  REQUIRE(step.forecast.location == 0.0);
  REQUIRE(step.forecast.scale == 2.0);
  REQUIRE(step.posterior.n == 2.0);
  REQUIRE(step.posterior.s == 0.75);
  REQUIRE(step.posterior.m[0] == 0.5);
  REQUIRE(step.posterior.C(0, 0) == 0.375);
  REQUIRE(step.posterior.t == 1);
}

TEST_CASE("unit discounts reduce the filter to batch conjugate regression") {
  const int t_len = 9;
  const int p = 3;
  Rng rng(2024);
  Eigen::MatrixXd X(t_len, p);
  Eigen::VectorXd y(t_len);
  for (int t = 0; t < t_len; ++t) {
    for (int j = 0; j < p; ++j) X(t, j) = rng.normal();
    y[t] = 0.4 * X(t, 0) - 0.2 * X(t, 2) + 0.3 * rng.normal();
  }
  const DlmState prior = dlm::default_prior(p);
  const dlm::FilterOutput out =
      dlm::run_expanding_filter(X, y, prior, DiscountConfig{1.0, 1.0});

  // Static-coefficient oracle: accumulate the normal/inverse-gamma posterior
  // in closed form and compare against the sequential answer.
  const Eigen::MatrixXd P0 =
      (prior.C / prior.s).inverse();  // prior precision of theta | v
  const Eigen::MatrixXd Pt = P0 + X.transpose() * X;
  const Eigen::VectorXd mt = Pt.ldlt().solve(P0 * prior.m + X.transpose() * y);
  const double nt = prior.n + t_len;
  const double nst = prior.n * prior.s + y.squaredNorm() +
                     prior.m.dot(P0 * prior.m) - mt.dot(Pt * mt);
  const DlmState& last = out.posteriors.back();
  REQUIRE_THAT(last.n, Catch::Matchers::WithinAbs(nt, 1e-12));
  REQUIRE_THAT(last.s, Catch::Matchers::WithinRel(nst / nt, 1e-10));
  for (int j = 0; j < p; ++j) {
    REQUIRE_THAT(last.m[j], Catch::Matchers::WithinAbs(mt[j], 1e-10));
  }
  const Eigen::MatrixXd cov_seq = last.C / last.s;
  const Eigen::MatrixXd cov_batch = Pt.inverse();
  REQUIRE((cov_seq - cov_batch).cwiseAbs().maxCoeff() < 1e-10);

  // The first forecast is the prior predictive.
  const Eigen::VectorXd f0 = X.row(0).transpose();
  REQUIRE(out.forecasts[0].dof == prior.n);
  REQUIRE_THAT(out.forecasts[0].location,
               Catch::Matchers::WithinAbs(f0.dot(prior.m), 1e-14));
  REQUIRE_THAT(out.forecasts[0].scale,
               Catch::Matchers::WithinRel(
                   f0.dot((prior.C / prior.s) * f0) * prior.s + prior.s,
                   1e-12));
}

TEST_CASE("multi-step forecast density opens the scale and decays the dof") {
  const DlmState st = symmetric_state();
  const DiscountConfig disc{0.95, 0.9};
  Eigen::VectorXd F(2);
  F << 0.7, -1.1;
  const StudentT one = dlm::forecast_density(st, F, disc, 1);
  const dlm::FilterStep step = dlm::filter_step(st, F, 0.0, disc);
  REQUIRE_THAT(one.dof, Catch::Matchers::WithinRel(step.forecast.dof, 1e-14));
  REQUIRE_THAT(one.scale,
               Catch::Matchers::WithinRel(step.forecast.scale, 1e-12));
  REQUIRE(one.location == step.forecast.location);

  const int k = 4;
  const StudentT far = dlm::forecast_density(st, F, disc, k);
  const double open = std::pow(disc.delta, -k);
  REQUIRE_THAT(far.dof, Catch::Matchers::WithinRel(
                            std::pow(disc.beta, k) * st.n, 1e-14));
  REQUIRE_THAT(far.scale, Catch::Matchers::WithinRel(
                              F.dot((st.C * open) * F) + st.s, 1e-12));
  REQUIRE(far.location == one.location);
  REQUIRE(far.scale > one.scale);
  REQUIRE(far.dof < one.dof);
  REQUIRE_THROWS_AS(dlm::forecast_density(st, F, disc, 0),
                    InvalidArgumentError);
}

TEST_CASE("discount config rejects values outside the unit interval") {
  REQUIRE_THROWS_AS((DiscountConfig{0.0, 0.9}.validate()),
                    InvalidArgumentError);
  REQUIRE_THROWS_AS((DiscountConfig{0.9, 1.2}.validate()),
                    InvalidArgumentError);
  REQUIRE_NOTHROW((DiscountConfig{1.0, 1.0}.validate()));
}

TEST_CASE("evolution sampler consumes exactly the advertised variates") {
  const DlmState st = symmetric_state();
  SECTION("unit discounts skip the beta and the innovation") {
    Rng a(99), b(99);
    (void)dlm::sample_evolution(st, DiscountConfig{1.0, 1.0}, a);
    (void)b.gamma(0.5 * st.n, 0.5 * st.n * st.s);
    for (int i = 0; i < st.dim(); ++i) (void)b.normal();
    REQUIRE(a.uniform() == b.uniform());
  }
  SECTION("interior discounts add one beta and a second normal block") {
    Rng a(99), b(99);
    const DiscountConfig disc{0.97, 0.9};
    (void)dlm::sample_evolution(st, disc, a);
    (void)b.gamma(0.5 * st.n, 0.5 * st.n * st.s);
    (void)b.beta(0.5 * disc.beta * st.n, 0.5 * (1.0 - disc.beta) * st.n);
    for (int i = 0; i < 2 * st.dim(); ++i) (void)b.normal();
    REQUIRE(a.uniform() == b.uniform());
  }
}

TEST_CASE("evolution sampler matches analytic moments") {
  const DlmState st = symmetric_state();
  const DiscountConfig disc{0.97, 0.9};
  const int n_draws = 60000;
  Rng rng(7);
  double v_sum = 0.0, v_sumsq = 0.0;
  Eigen::Vector2d theta_sum = Eigen::Vector2d::Zero();
  for (int i = 0; i < n_draws; ++i) {
    const dlm::EvolutionDraw d = dlm::sample_evolution(st, disc, rng);
    v_sum += d.v;
    v_sumsq += d.v * d.v;
    theta_sum += d.theta;
  }
  const double v_mean = v_sum / n_draws;
  const double v_var = v_sumsq / n_draws - v_mean * v_mean;
  const double v_se = std::sqrt(v_var / n_draws);
  // E[v'] = beta n s / (beta n - 2): the volatility random walk is mean
  // preserving up to the inverse-gamma correction.
  const double bn = disc.beta * st.n;
  const double v_expect = bn * st.s / (bn - 2.0);
  REQUIRE_THAT(v_mean, Catch::Matchers::WithinAbs(v_expect, 4.0 * v_se));
  // E[theta'] = m in both coordinates.
  for (int j = 0; j < 2; ++j) {
    const double theta_var =
        st.C(j, j) * st.n / (st.n - 2.0) +
        st.C(j, j) * (1.0 - disc.delta) / disc.delta * v_expect / st.s;
    const double se = std::sqrt(theta_var / n_draws);
    REQUIRE_THAT(theta_sum[j] / n_draws,
                 Catch::Matchers::WithinAbs(st.m[j], 4.0 * se));
  }
}

TEST_CASE("intercept column prepends ones") {
  Eigen::MatrixXd x(2, 2);
  x << 1.0, 2.0, 3.0, 4.0;
  const Eigen::MatrixXd w = dlm::with_intercept(x);
  REQUIRE(w.cols() == 3);
  REQUIRE(w.col(0).isOnes());
  REQUIRE(w(1, 2) == 4.0);
}

TEST_CASE("student t density matches closed forms and quadrature") {
  SECTION("dof 1 is Cauchy") {
    const StudentT t{1.0, 0.5, 4.0};
    // pdf at one scale unit from the center: 1 / (4 pi).
    REQUIRE_THAT(t.log_pdf(2.5),
                 Catch::Matchers::WithinAbs(std::log(1.0 / (4.0 * M_PI)),
                                            1e-13));
  }
  SECTION("density integrates to one and to the analytic variance") {
    const StudentT t{5.0, 0.3, 2.5};
    const auto mass = [&](double u) {
      const double c = std::cos(u);
      if (c < 1e-12) return 0.0;
      const double y = t.location + std::tan(u);
      return t.pdf(y) / (c * c);
    };
    const auto second = [&](double u) {
      const double c = std::cos(u);
      if (c < 1e-12) return 0.0;
      const double y = t.location + std::tan(u);
      return (y - t.location) * (y - t.location) * t.pdf(y) / (c * c);
    };
    const double total = simpson(mass, -M_PI / 2, M_PI / 2, 4000);
    const double var = simpson(second, -M_PI / 2, M_PI / 2, 4000);
    REQUIRE_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-9));
    REQUIRE_THAT(var, Catch::Matchers::WithinRel(t.variance(), 1e-7));
    REQUIRE_THAT(t.variance(),
                 Catch::Matchers::WithinRel(2.5 * 5.0 / 3.0, 1e-15));
  }
  SECTION("point mass samples its location and refuses a density") {
    const StudentT t{3.0, 1.25, 0.0};
    Rng rng(1);
    REQUIRE(t.sample(rng) == 1.25);
    REQUIRE_THROWS_AS(t.log_pdf(1.25), NumericError);
  }
  SECTION("sampling matches the dof scaling of the variance") {
    const StudentT t{8.0, -1.0, 0.5};
    Rng rng(11);
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = t.sample(rng);
      sum += d;
      sumsq += d * d;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    REQUIRE_THAT(mean, Catch::Matchers::WithinAbs(-1.0, 0.02));
    REQUIRE_THAT(var, Catch::Matchers::WithinRel(t.variance(), 0.05));
  }
}
