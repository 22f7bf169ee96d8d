#include <cmath>

#include "catch2/catch_amalgamated.hpp"
#include "drs/synthesis.hpp"

using namespace drs;
using bps::AgentDensities;
using bps::GibbsConfig;
using bps::SynthesisStreams;

namespace {

AgentDensities constant_densities(int t_len, int n_agents, double dof,
                                  const Eigen::MatrixXd& loc, double scale) {
  AgentDensities d;
  d.dof = Eigen::MatrixXd::Constant(t_len, n_agents, dof);
  d.location = loc;
  d.scale = Eigen::MatrixXd::Constant(t_len, n_agents, scale);
  return d;
}

}  // namespace

TEST_CASE("recouple prior centres the pool on equal weights") {
  const dlm::DlmState prior = bps::recouple_prior(4);
  REQUIRE(prior.dim() == 5);
  REQUIRE(prior.m[0] == 0.0);
  for (int j = 1; j < 5; ++j) REQUIRE(prior.m[j] == 0.25);
  REQUIRE(prior.C.isIdentity(0.0));
  REQUIRE_THROWS_AS(bps::recouple_prior(0), InvalidArgumentError);
}

TEST_CASE("latent conditional moments match a joint normal oracle") {
  const int n_agents = 4;
  Rng rng(314);
  Eigen::VectorXd theta(n_agents + 1), phi(n_agents), h(n_agents),
      H(n_agents);
  theta << 0.1, 0.8, -0.5, 0.3, 1.2;
  for (int j = 0; j < n_agents; ++j) {
    phi[j] = 0.5 + rng.uniform();
    h[j] = rng.normal();
    H[j] = 0.5 + rng.uniform();
  }
  const double v = 0.3;
  const double y = 0.7;
  const bps::LatentMoments mom = bps::latent_state_moments(theta, v, phi, y,
                                                           h, H);

  // Oracle: assemble the full joint covariance of (x, y), then condition by
  // inverting the whole matrix and reading the x-block of the precision.
  Eigen::MatrixXd joint(n_agents + 1, n_agents + 1);
  joint.setZero();
  const Eigen::VectorXd coef = theta.tail(n_agents);
  for (int j = 0; j < n_agents; ++j) joint(j, j) = H[j] / phi[j];
  const Eigen::VectorXd cross =
      joint.topLeftCorner(n_agents, n_agents) * coef;
  joint.topRightCorner(n_agents, 1) = cross;
  joint.bottomLeftCorner(1, n_agents) = cross.transpose();
  joint(n_agents, n_agents) = v + coef.dot(cross);
  const Eigen::MatrixXd precision = joint.inverse();
  const Eigen::MatrixXd cond_cov =
      precision.topLeftCorner(n_agents, n_agents).inverse();
  const double mu_y = theta[0] + coef.dot(h);
  const Eigen::VectorXd cond_mean =
      h - cond_cov * precision.topRightCorner(n_agents, 1) * (y - mu_y);

  for (int j = 0; j < n_agents; ++j) {
    REQUIRE_THAT(mom.mean[j], Catch::Matchers::WithinAbs(cond_mean[j], 1e-12));
    for (int i = 0; i < n_agents; ++i) {
      REQUIRE_THAT(mom.cov(i, j),
                   Catch::Matchers::WithinAbs(cond_cov(i, j), 1e-12));
    }
  }
}

TEST_CASE("scalar latent draws match bivariate conditioning empirically") {
  const int n = 30000;
  Eigen::MatrixXd theta(1, 2), phi(1, 1), loc(1, 1);
  theta << 0.2, 0.9;
  phi << 1.4;
  loc << 0.5;
  Eigen::VectorXd v(1), y(1);
  v << 0.04;
  y << 1.1;
  const AgentDensities dens = constant_densities(1, 1, 12.0, loc, 0.09);
  const bps::LatentMoments mom = bps::latent_state_moments(
      theta.row(0).transpose(), v[0], phi.row(0).transpose(), y[0],
      dens.location.row(0).transpose(), dens.scale.row(0).transpose());

  SynthesisStreams streams = SynthesisStreams::make(5150, {0});
  double sx = 0.0, sxx = 0.0, sphi = 0.0, scond = 0.0;
  for (int i = 0; i < n; ++i) {
    const bps::LatentDraw d =
        bps::draw_latent_states(theta, v, phi, y, dens, streams);
    const double x = d.x(0, 0);
    sx += x;
    sxx += x * x;
    sphi += d.phi(0, 0);
    const double miss = x - loc(0, 0);
    scond += (12.0 + 1.0) / (12.0 + miss * miss / 0.09);
  }
  const double mean = sx / n;
  const double var = sxx / n - mean * mean;
  const double se_mean = std::sqrt(mom.cov(0, 0) / n);
  REQUIRE_THAT(mean, Catch::Matchers::WithinAbs(mom.mean[0], 4.0 * se_mean));
  REQUIRE_THAT(var, Catch::Matchers::WithinAbs(
                        mom.cov(0, 0),
                        4.0 * mom.cov(0, 0) * std::sqrt(2.0 / n)));
  // The refreshed mixing weights must average to their conditional mean.
  REQUIRE_THAT(sphi / n, Catch::Matchers::WithinAbs(scond / n, 0.02));
}

TEST_CASE("point mass agents stay pinned with unit mixing weight") {
  Eigen::MatrixXd theta(2, 3), phi(2, 2), loc(2, 2);
  theta.setConstant(0.4);
  phi.setOnes();
  loc << 0.25, -0.5, 0.75, -1.0;
  Eigen::VectorXd v = Eigen::VectorXd::Constant(2, 0.1);
  Eigen::VectorXd y = Eigen::VectorXd::Constant(2, 0.3);
  AgentDensities dens = constant_densities(2, 2, 8.0, loc, 0.05);
  dens.scale.col(1).setZero();  // agent 2 broadcasts a point mass
  SynthesisStreams streams = SynthesisStreams::make(9, {0, 1});
  const bps::LatentDraw d =
      bps::draw_latent_states(theta, v, phi, y, dens, streams);
  for (int t = 0; t < 2; ++t) {
    REQUIRE(d.x(t, 1) == loc(t, 1));
    REQUIRE(d.phi(t, 1) == 1.0);
    REQUIRE(d.x(t, 0) != loc(t, 0));
  }
}

TEST_CASE("latent draws are equivariant under agent relabeling") {
  const int t_len = 6;
  Rng rng(77);
  Eigen::MatrixXd theta(t_len, 3), phi(t_len, 2), loc(t_len, 2);
  Eigen::VectorXd v(t_len), y(t_len);
  for (int t = 0; t < t_len; ++t) {
    theta(t, 0) = 0.05;
    theta(t, 1) = 0.6 + 0.1 * rng.normal();
    theta(t, 2) = 0.4 + 0.1 * rng.normal();
    phi(t, 0) = 0.8 + rng.uniform();
    phi(t, 1) = 0.8 + rng.uniform();
    loc(t, 0) = rng.normal();
    loc(t, 1) = rng.normal();
    v[t] = 0.05;
    y[t] = 0.6 * loc(t, 0) + 0.4 * loc(t, 1) + 0.1 * rng.normal();
  }
  AgentDensities dens;
  dens.dof = Eigen::MatrixXd::Constant(t_len, 2, 15.0);
  dens.location = loc;
  dens.scale = Eigen::MatrixXd::Constant(t_len, 2, 0.04);
  dens.scale.col(1).array() = 0.09;

  SynthesisStreams fwd = SynthesisStreams::make(123, {10, 20});
  const bps::LatentDraw base =
      bps::draw_latent_states(theta, v, phi, y, dens, fwd);

  // Swap the two agents everywhere and carry their stream ids along.
  Eigen::MatrixXd theta_p = theta;
  theta_p.col(1).swap(theta_p.col(2));
  Eigen::MatrixXd phi_p = phi;
  phi_p.col(0).swap(phi_p.col(1));
  AgentDensities dens_p = dens;
  dens_p.location.col(0).swap(dens_p.location.col(1));
  dens_p.scale.col(0).swap(dens_p.scale.col(1));
  dens_p.dof.col(0).swap(dens_p.dof.col(1));
  SynthesisStreams swapped = SynthesisStreams::make(123, {20, 10});
  const bps::LatentDraw perm =
      bps::draw_latent_states(theta_p, v, phi_p, y, dens_p, swapped);

  for (int t = 0; t < t_len; ++t) {
    REQUIRE_THAT(perm.x(t, 0),
                 Catch::Matchers::WithinAbs(base.x(t, 1), 1e-10));
    REQUIRE_THAT(perm.x(t, 1),
                 Catch::Matchers::WithinAbs(base.x(t, 0), 1e-10));
    REQUIRE_THAT(perm.phi(t, 0),
                 Catch::Matchers::WithinAbs(base.phi(t, 1), 1e-10));
    REQUIRE_THAT(perm.phi(t, 1),
                 Catch::Matchers::WithinAbs(base.phi(t, 0), 1e-10));
  }
}

TEST_CASE("ffbs under unit discounts collapses to the static posterior") {
  const int t_len = 14;
  const int n_agents = 2;
  Rng rng(2718);
  Eigen::MatrixXd x(t_len, n_agents);
  Eigen::VectorXd y(t_len);
  for (int t = 0; t < t_len; ++t) {
    x(t, 0) = rng.normal();
    x(t, 1) = rng.normal();
    y[t] = 0.1 + 0.7 * x(t, 0) + 0.2 * x(t, 1) + 0.15 * rng.normal();
  }
  const dlm::DlmState prior = bps::recouple_prior(n_agents);
  const dlm::DiscountConfig unit{1.0, 1.0};

  // Static oracle on the design [1 x].
  Eigen::MatrixXd G(t_len, n_agents + 1);
  G.col(0).setOnes();
  G.rightCols(n_agents) = x;
  const Eigen::MatrixXd P0 = (prior.C / prior.s).inverse();
  const Eigen::MatrixXd Pt = P0 + G.transpose() * G;
  const Eigen::VectorXd mt = Pt.ldlt().solve(P0 * prior.m + G.transpose() * y);

  SynthesisStreams streams = SynthesisStreams::make(40, {0, 1});
  const int n_draws = 4000;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(t_len, n_agents + 1);
  Eigen::MatrixXd sumsq = sum;
  for (int i = 0; i < n_draws; ++i) {
    const bps::FfbsDraw d = bps::ffbs_draw(y, x, prior, unit, streams);
    // Exact limits: a constant-parameter draw is one path, one variance.
    REQUIRE(d.v.minCoeff() == d.v.maxCoeff());
    REQUIRE((d.theta.row(0) - d.theta.row(t_len - 1)).cwiseAbs().maxCoeff() ==
            0.0);
    sum += d.theta;
    sumsq += d.theta.cwiseProduct(d.theta);
  }
  int failures = 0;
  for (int t = 0; t < t_len; ++t) {
    for (int j = 0; j <= n_agents; ++j) {
      const double mean = sum(t, j) / n_draws;
      const double var = sumsq(t, j) / n_draws - mean * mean;
      const double se = std::sqrt(var / n_draws);
      if (std::abs(mean - mt[j]) > 3.0 * se) ++failures;
    }
  }
  // Allow the usual Monte Carlo margin on the 3 se band.
  REQUIRE(failures <= t_len * (n_agents + 1) / 20);
}

TEST_CASE("gibbs runs are deterministic in the seed") {
  const int t_len = 20;
  Rng rng(5);
  Eigen::MatrixXd loc(t_len, 2);
  Eigen::VectorXd y(t_len);
  for (int t = 0; t < t_len; ++t) {
    loc(t, 0) = rng.normal();
    loc(t, 1) = rng.normal();
    y[t] = 0.5 * loc(t, 0) + 0.5 * loc(t, 1) + 0.05 * rng.normal();
  }
  const AgentDensities dens = constant_densities(t_len, 2, 10.0, loc, 0.02);
  GibbsConfig cfg;
  cfg.burn_in = 15;
  cfg.n_saved = 10;
  cfg.seed = 99;
  const auto a = bps::run_gibbs(y, dens, cfg);
  const auto b = bps::run_gibbs(y, dens, cfg);
  REQUIRE(a.size() == 10);
  const auto same = [](const Eigen::MatrixXd& l, const Eigen::MatrixXd& r) {
    return l.rows() == r.rows() && l.cols() == r.cols() &&
           (l - r).cwiseAbs().maxCoeff() == 0.0;
  };
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(same(a[i].theta, b[i].theta));
    REQUIRE(same(a[i].x, b[i].x));
    REQUIRE(same(a[i].v, b[i].v));
    REQUIRE(same(a[i].phi, b[i].phi));
  }
  GibbsConfig other = cfg;
  other.seed = 100;
  const auto c = bps::run_gibbs(y, dens, other);
  REQUIRE_FALSE(same(a[0].theta, c[0].theta));
}

TEST_CASE("gibbs recovers constant pool weights on a clean problem") {
  const int t_len = 140;
  Rng rng(808);
  Eigen::MatrixXd loc(t_len, 2);
  Eigen::VectorXd y(t_len);
  double a1 = 0.0, a2 = 0.0;
  for (int t = 0; t < t_len; ++t) {
    a1 = 0.9 * a1 + 0.435889894354 * rng.normal();
    a2 = 0.9 * a2 + 0.435889894354 * rng.normal();
    loc(t, 0) = a1;
    loc(t, 1) = a2;
    y[t] = 0.6 * a1 + 0.4 * a2 + 0.05 * rng.normal();
  }
  const AgentDensities dens = constant_densities(t_len, 2, 25.0, loc, 0.0025);
  GibbsConfig cfg;
  cfg.burn_in = 250;
  cfg.n_saved = 350;
  cfg.seed = 31;
  const auto draws = bps::run_gibbs(y, dens, cfg);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  int count = 0;
  for (const auto& d : draws) {
    for (int t = t_len - 60; t < t_len; ++t) {
      mean += d.theta.row(t).transpose();
      ++count;
    }
  }
  mean /= count;
  REQUIRE_THAT(mean[0], Catch::Matchers::WithinAbs(0.0, 0.06));
  REQUIRE_THAT(mean[1], Catch::Matchers::WithinAbs(0.6, 0.12));
  REQUIRE_THAT(mean[2], Catch::Matchers::WithinAbs(0.4, 0.12));
}

TEST_CASE("one step prediction is the k equals one direct special case") {
  const int t_len = 16;
  Rng rng(606);
  Eigen::MatrixXd loc(t_len, 2);
  Eigen::VectorXd y(t_len);
  for (int t = 0; t < t_len; ++t) {
    loc(t, 0) = rng.normal();
    loc(t, 1) = rng.normal();
    y[t] = 0.5 * (loc(t, 0) + loc(t, 1)) + 0.1 * rng.normal();
  }
  const AgentDensities dens = constant_densities(t_len, 2, 9.0, loc, 0.04);
  GibbsConfig cfg;
  cfg.burn_in = 10;
  cfg.n_saved = 25;
  cfg.seed = 12;
  const auto draws = bps::run_gibbs(y, dens, cfg);

  Eigen::MatrixXd loc1(1, 2);
  loc1 << 0.3, -0.2;
  const AgentDensities ahead = constant_densities(1, 2, 9.0, loc1, 0.04);
  const auto same = [](const Eigen::VectorXd& l, const Eigen::VectorXd& r) {
    return l.size() == r.size() && (l - r).cwiseAbs().maxCoeff() == 0.0;
  };
  SynthesisStreams s1 = SynthesisStreams::make(71, {0, 1});
  SynthesisStreams s2 = SynthesisStreams::make(71, {0, 1});
  SynthesisStreams s3 = SynthesisStreams::make(71, {0, 1});
  const auto one = bps::predict_one_step(draws, ahead, cfg.discount, s1, 2);
  const auto direct = bps::predict_k_step(draws, ahead, cfg.discount, 1,
                                          bps::KStepMode::direct, 1, s2, 2);
  REQUIRE(same(one.y, direct.y));
  REQUIRE(same(one.mean, direct.mean));
  REQUIRE(same(one.var, direct.var));
  REQUIRE(one.y.size() == 50);
  REQUIRE((one.var.array() > 0.0).all());

  // A lag-k system absorbs the horizon, so customized synthesis advances one
  // step no matter the k it reports.
  const auto custom = bps::predict_k_step(draws, ahead, cfg.discount, 4,
                                          bps::KStepMode::customized, 4, s3,
                                          2);
  REQUIRE(same(custom.y, one.y));
  REQUIRE_THROWS_AS(
      bps::predict_k_step(draws, ahead, cfg.discount, 4,
                          bps::KStepMode::customized, 1, s1, 2),
      InvalidArgumentError);

  // Under unit discounts the state neither drifts nor reheats, so the direct
  // horizon drops out of the distribution entirely.
  const dlm::DiscountConfig unit{1.0, 1.0};
  SynthesisStreams s4 = SynthesisStreams::make(71, {0, 1});
  SynthesisStreams s5 = SynthesisStreams::make(71, {0, 1});
  const auto near_unit = bps::predict_k_step(draws, ahead, unit, 1,
                                             bps::KStepMode::direct, 1, s4, 2);
  const auto far_unit = bps::predict_k_step(draws, ahead, unit, 6,
                                            bps::KStepMode::direct, 6, s5, 2);
  REQUIRE(same(near_unit.y, far_unit.y));
  REQUIRE(same(near_unit.var, far_unit.var));
}

TEST_CASE("gibbs validates its inputs") {
  Eigen::MatrixXd loc(4, 1);
  loc.setZero();
  const AgentDensities dens = constant_densities(4, 1, 5.0, loc, 1.0);
  Eigen::VectorXd y(3);
  y.setZero();
  GibbsConfig cfg;
  REQUIRE_THROWS_AS(bps::run_gibbs(y, dens, cfg), InvalidArgumentError);
  Eigen::VectorXd y4 = Eigen::VectorXd::Zero(4);
  GibbsConfig bad = cfg;
  bad.n_saved = 0;
  REQUIRE_THROWS_AS(bps::run_gibbs(y4, dens, bad), InvalidArgumentError);
  GibbsConfig wrong = cfg;
  wrong.agent_streams = {1, 2};
  REQUIRE_THROWS_AS(bps::run_gibbs(y4, dens, wrong), InvalidArgumentError);
}
