#include "drs/synthesis.hpp"

#include <cmath>

#include "drs/linalg.hpp"

namespace drs::bps {

namespace {

constexpr std::uint64_t kMasterStream = 0x6d61737465720000ULL;
constexpr std::uint64_t kInterceptStream = 0x696e746572630000ULL;
constexpr std::uint64_t kAgentStreamBase = 0x6167656e74000000ULL;

// z[0] from the intercept stream, z[1 + j] from agent j's stream, so a draw
// of the (J+1)-dimensional synthesis state consumes each agent's randomness
// through that agent's own stream.
void fill_state_normals(SynthesisStreams& streams, Eigen::VectorXd& z) {
  z[0] = streams.intercept.normal();
  for (std::size_t j = 0; j < streams.agents.size(); ++j) {
    z[static_cast<int>(j) + 1] = streams.agents[j].normal();
  }
}

}  // namespace

void AgentDensities::validate() const {
  if (location.rows() == 0 || location.cols() == 0) {
    throw InvalidArgumentError("agent densities are empty");
  }
  if (dof.rows() != location.rows() || dof.cols() != location.cols() ||
      scale.rows() != location.rows() || scale.cols() != location.cols()) {
    throw InvalidArgumentError("agent density arrays have mismatched shapes");
  }
  for (int t = 0; t < T(); ++t) {
    for (int j = 0; j < J(); ++j) {
      at(t, j).validate();
    }
  }
}

void GibbsConfig::validate(int n_agents) const {
  if (n_agents < 1) throw InvalidArgumentError("synthesis needs >= 1 agent");
  if (burn_in < 0 || n_saved < 1) {
    throw InvalidArgumentError("gibbs sizes must satisfy burn_in >= 0, "
                               "n_saved >= 1");
  }
  discount.validate();
  if (prior.m.size() != 0) {
    if (prior.m.size() != n_agents + 1) {
      throw InvalidArgumentError(
          "synthesis prior dimension must be one more than the agent count");
    }
    prior.validate();
  }
  if (!agent_streams.empty() &&
      static_cast<int>(agent_streams.size()) != n_agents) {
    throw InvalidArgumentError("agent_streams size must match agent count");
  }
}

dlm::DlmState recouple_prior(int n_agents) {
  if (n_agents < 1) throw InvalidArgumentError("synthesis needs >= 1 agent");
  dlm::DlmState prior = dlm::default_prior(n_agents + 1);
  prior.m.tail(n_agents).setConstant(1.0 / n_agents);
  return prior;
}

SynthesisStreams SynthesisStreams::make(
    std::uint64_t seed, const std::vector<std::uint64_t>& agent_ids) {
  const Rng root(seed);
  SynthesisStreams s{root.child(kMasterStream), root.child(kInterceptStream),
                     {}};
  s.agents.reserve(agent_ids.size());
  for (const std::uint64_t id : agent_ids) {
    s.agents.push_back(root.child(kAgentStreamBase ^ id));
  }
  return s;
}

Eigen::MatrixXd init_latent_states(const AgentDensities& densities,
                                   SynthesisStreams& streams) {
  densities.validate();
  if (static_cast<int>(streams.agents.size()) != densities.J()) {
    throw InvalidArgumentError("stream count disagrees with agent count");
  }
  Eigen::MatrixXd x(densities.T(), densities.J());
  for (int j = 0; j < densities.J(); ++j) {
    for (int t = 0; t < densities.T(); ++t) {
      x(t, j) = densities.at(t, j).sample(streams.agents[j]);
    }
  }
  return x;
}

FfbsDraw ffbs_draw(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                   const dlm::DlmState& prior, const dlm::DiscountConfig& disc,
                   SynthesisStreams& streams) {
  const int t_len = static_cast<int>(y.size());
  const int n_agents = static_cast<int>(x.cols());
  if (x.rows() != t_len || t_len == 0) {
    throw InvalidArgumentError("latent states and target length disagree");
  }
  if (prior.m.size() != n_agents + 1) {
    throw InvalidArgumentError("prior dimension must be agent count + 1");
  }
  if (static_cast<int>(streams.agents.size()) != n_agents) {
    throw InvalidArgumentError("stream count disagrees with agent count");
  }
  disc.validate();

  // Forward filter with F_t = (1, x_t').
  std::vector<dlm::DlmState> states;
  states.reserve(t_len);
  Eigen::VectorXd f_row(n_agents + 1);
  const dlm::DlmState* current = &prior;
  for (int t = 0; t < t_len; ++t) {
    f_row[0] = 1.0;
    f_row.tail(n_agents) = x.row(t);
    dlm::FilterStep step = dlm::filter_step(*current, f_row, y[t], disc);
    states.push_back(std::move(step.posterior));
    current = &states.back();
  }

  FfbsDraw out;
  out.theta.resize(t_len, n_agents + 1);
  out.v.resize(t_len);
  const dlm::DlmState& last = states.back();
  out.C_T = last.C;
  out.s_T = last.s;
  out.n_T = last.n;

  Eigen::VectorXd z(n_agents + 1);
  double v_inv = streams.master.gamma(0.5 * last.n, 0.5 * last.n * last.s);
  out.v[t_len - 1] = 1.0 / v_inv;
  fill_state_normals(streams, z);
  out.theta.row(t_len - 1) =
      (last.m + std::sqrt(out.v[t_len - 1] / last.s) * (sym_sqrt(last.C) * z))
          .transpose();

  for (int t = t_len - 2; t >= 0; --t) {
    const dlm::DlmState& st = states[t];
    if (disc.beta < 1.0) {
      v_inv = disc.beta * v_inv +
              streams.master.gamma(0.5 * (1.0 - disc.beta) * st.n,
                                   0.5 * st.n * st.s);
    }
    out.v[t] = 1.0 / v_inv;
    if (disc.delta < 1.0) {
      fill_state_normals(streams, z);
      const Eigen::VectorXd mean =
          st.m + disc.delta * (out.theta.row(t + 1).transpose() - st.m);
      out.theta.row(t) =
          (mean + std::sqrt((1.0 - disc.delta) * out.v[t] / st.s) *
                      (sym_sqrt(st.C) * z))
              .transpose();
    } else {
      out.theta.row(t) = out.theta.row(t + 1);
    }
  }
  return out;
}

LatentMoments latent_state_moments(const Eigen::VectorXd& theta_t, double v_t,
                                   const Eigen::VectorXd& phi_t, double y_t,
                                   const Eigen::VectorXd& h_t,
                                   const Eigen::VectorXd& H_t) {
  const int n_agents = static_cast<int>(h_t.size());
  if (theta_t.size() != n_agents + 1 || phi_t.size() != n_agents ||
      H_t.size() != n_agents) {
    throw InvalidArgumentError("latent moment inputs have mismatched sizes");
  }
  if (!(v_t > 0.0)) throw NumericError("latent conditioning needs v_t > 0");
  const Eigen::VectorXd coef = theta_t.tail(n_agents);
  Eigen::VectorXd prior_var(n_agents);
  for (int j = 0; j < n_agents; ++j) {
    if (H_t[j] < 0.0 || !(phi_t[j] > 0.0)) {
      throw NumericError("latent conditioning needs H >= 0 and phi > 0");
    }
    prior_var[j] = H_t[j] / phi_t[j];
  }
  // Joint normality of (x_t, y_t) given the synthesis state:
  //   cov(x, y) = diag(prior_var) coef,  var(y) = v + coef' diag(prior_var) coef.
  const double resid = y_t - theta_t[0] - h_t.dot(coef);
  const Eigen::VectorXd cross = prior_var.cwiseProduct(coef);
  const double gain_denom = v_t + coef.dot(cross);
  const Eigen::VectorXd gain = cross / gain_denom;
  LatentMoments out;
  out.mean = h_t + gain * resid;
  out.cov = Eigen::MatrixXd(prior_var.asDiagonal());
  out.cov.noalias() -= gain_denom * (gain * gain.transpose());
  return out;
}

LatentDraw draw_latent_states(const Eigen::MatrixXd& theta,
                              const Eigen::VectorXd& v,
                              const Eigen::MatrixXd& phi,
                              const Eigen::VectorXd& y,
                              const AgentDensities& densities,
                              SynthesisStreams& streams) {
  const int t_len = densities.T();
  const int n_agents = densities.J();
  if (theta.rows() != t_len || theta.cols() != n_agents + 1 ||
      v.size() != t_len || phi.rows() != t_len || phi.cols() != n_agents ||
      y.size() != t_len) {
    throw InvalidArgumentError("latent draw inputs have mismatched shapes");
  }
  if (static_cast<int>(streams.agents.size()) != n_agents) {
    throw InvalidArgumentError("stream count disagrees with agent count");
  }
  LatentDraw out;
  out.x.resize(t_len, n_agents);
  out.phi.resize(t_len, n_agents);
  Eigen::VectorXd z(n_agents);
  for (int t = 0; t < t_len; ++t) {
    const LatentMoments mom = latent_state_moments(
        theta.row(t).transpose(), v[t], phi.row(t).transpose(), y[t],
        densities.location.row(t).transpose(),
        densities.scale.row(t).transpose());
    for (int j = 0; j < n_agents; ++j) z[j] = streams.agents[j].normal();
    out.x.row(t) = (mom.mean + sym_sqrt(mom.cov) * z).transpose();
    for (int j = 0; j < n_agents; ++j) {
      const double raw_scale = densities.scale(t, j);
      if (raw_scale == 0.0) {
        out.x(t, j) = densities.location(t, j);
        out.phi(t, j) = 1.0;
        continue;
      }
      const double miss = out.x(t, j) - densities.location(t, j);
      const double d = miss * miss / raw_scale;
      const double n_tj = densities.dof(t, j);
      out.phi(t, j) =
          streams.agents[j].gamma(0.5 * (n_tj + 1.0), 0.5 * (n_tj + d));
    }
  }
  return out;
}

std::vector<SynthesisDraw> run_gibbs(const Eigen::VectorXd& y,
                                     const AgentDensities& densities,
                                     const GibbsConfig& config) {
  densities.validate();
  const int t_len = densities.T();
  const int n_agents = densities.J();
  if (y.size() != t_len) {
    throw InvalidArgumentError("target length disagrees with agent densities");
  }
  config.validate(n_agents);

  std::vector<std::uint64_t> ids = config.agent_streams;
  if (ids.empty()) {
    for (int j = 0; j < n_agents; ++j) ids.push_back(j);
  }
  SynthesisStreams streams = SynthesisStreams::make(config.seed, ids);
  const dlm::DlmState prior =
      config.prior.m.size() != 0 ? config.prior : recouple_prior(n_agents);

  Eigen::MatrixXd x = init_latent_states(densities, streams);
  Eigen::MatrixXd phi(t_len, n_agents);
  for (int j = 0; j < n_agents; ++j) {
    for (int t = 0; t < t_len; ++t) {
      const double n_tj = densities.dof(t, j);
      phi(t, j) = densities.scale(t, j) == 0.0
                      ? 1.0
                      : streams.agents[j].gamma(0.5 * n_tj, 0.5 * n_tj);
    }
  }

  std::vector<SynthesisDraw> draws;
  draws.reserve(config.n_saved);
  const int total = config.burn_in + config.n_saved;
  for (int iter = 0; iter < total; ++iter) {
    FfbsDraw state = ffbs_draw(y, x, prior, config.discount, streams);
    LatentDraw latent =
        draw_latent_states(state.theta, state.v, phi, y, densities, streams);
    x = latent.x;
    phi = latent.phi;
    if (iter >= config.burn_in) {
      draws.push_back(SynthesisDraw{x, std::move(state.theta),
                                    std::move(state.v), phi,
                                    std::move(state.C_T), state.s_T,
                                    state.n_T});
    }
  }
  return draws;
}

namespace {

void check_predict_inputs(const std::vector<SynthesisDraw>& draws,
                          const AgentDensities& densities_ahead,
                          SynthesisStreams& streams, int replicates) {
  if (draws.empty()) throw InvalidArgumentError("no synthesis draws supplied");
  if (replicates < 1) throw InvalidArgumentError("replicates must be >= 1");
  densities_ahead.validate();
  if (densities_ahead.T() != 1) {
    throw InvalidArgumentError(
        "forecast agent densities must cover exactly one period");
  }
  const int n_agents = densities_ahead.J();
  if (draws.front().x.cols() != n_agents ||
      static_cast<int>(streams.agents.size()) != n_agents) {
    throw InvalidArgumentError("agent count disagrees across predict inputs");
  }
}

}  // namespace

PredictiveSample predict_k_step(const std::vector<SynthesisDraw>& draws,
                                const AgentDensities& densities_ahead,
                                const dlm::DiscountConfig& disc, int k,
                                KStepMode mode, int agent_lag,
                                SynthesisStreams& streams, int replicates) {
  disc.validate();
  check_predict_inputs(draws, densities_ahead, streams, replicates);
  if (k < 1) throw InvalidArgumentError("forecast horizon must be >= 1");
  if (mode == KStepMode::customized && agent_lag != k) {
    throw InvalidArgumentError(
        "customized k-step synthesis requires agents built on lag-" +
        std::to_string(k) + " slices, got lag " + std::to_string(agent_lag));
  }
  // In customized mode the lag-k system already absorbs the horizon, so the
  // state advances a single step regardless of k.
  const int steps = mode == KStepMode::customized ? 1 : k;
  const int n_agents = densities_ahead.J();
  const int total = static_cast<int>(draws.size()) * replicates;

  PredictiveSample out;
  out.y.resize(total);
  out.mean.resize(total);
  out.var.resize(total);
  Eigen::VectorXd z(n_agents + 1), x_next(n_agents), theta(n_agents + 1);
  int slot = 0;
  for (const SynthesisDraw& draw : draws) {
    const int last = static_cast<int>(draw.v.size()) - 1;
    const Eigen::MatrixXd state_sqrt =
        disc.delta < 1.0 ? sym_sqrt(draw.C_T)
                         : Eigen::MatrixXd();
    for (int rep = 0; rep < replicates; ++rep, ++slot) {
      double v = draw.v[last];
      theta = draw.theta.row(last).transpose();
      double dof = draw.n_T;
      double open = 1.0;
      for (int step = 0; step < steps; ++step) {
        if (disc.beta < 1.0) {
          const double g = streams.master.beta(0.5 * disc.beta * dof,
                                               0.5 * (1.0 - disc.beta) * dof);
          v = disc.beta * v / g;
          dof *= disc.beta;
        }
        open /= disc.delta;
        if (disc.delta < 1.0) {
          // Incremental state innovation at this step: C_T (1-delta)/delta^m.
          fill_state_normals(streams, z);
          const double w = (1.0 - disc.delta) * open * v / draw.s_T;
          theta += std::sqrt(w) * (state_sqrt * z);
        }
      }
      for (int j = 0; j < n_agents; ++j) {
        x_next[j] = densities_ahead.at(0, j).sample(streams.agents[j]);
      }
      const double f = theta[0] + theta.tail(n_agents).dot(x_next);
      out.mean[slot] = f;
      out.var[slot] = v;
      out.y[slot] = f + std::sqrt(v) * streams.master.normal();
    }
  }
  return out;
}

PredictiveSample predict_one_step(const std::vector<SynthesisDraw>& draws,
                                  const AgentDensities& densities_next,
                                  const dlm::DiscountConfig& disc,
                                  SynthesisStreams& streams, int replicates) {
  return predict_k_step(draws, densities_next, disc, 1, KStepMode::direct, 1,
                        streams, replicates);
}

}  // namespace drs::bps
