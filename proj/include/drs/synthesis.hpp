#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "drs/dlm.hpp"
#include "drs/errors.hpp"
#include "drs/rng.hpp"
#include "drs/student_t.hpp"

namespace drs::bps {

// Agent forecast densities over the synthesis window: parallel T x J arrays
// of Student-t parameters. scale(t, j) == 0 marks an exact point mass, which
// is a legal sampling target.
struct AgentDensities {
  Eigen::MatrixXd dof;
  Eigen::MatrixXd location;
  Eigen::MatrixXd scale;

  int T() const { return static_cast<int>(location.rows()); }
  int J() const { return static_cast<int>(location.cols()); }
  StudentT at(int t, int j) const {
    return StudentT{dof(t, j), location(t, j), scale(t, j)};
  }
  void validate() const;
};

// One retained Gibbs draw. theta column 0 is the synthesis intercept; columns
// 1..J align with agents. C_T/s_T/n_T are the final filtered summaries from
// the pass that produced the draw, kept so the draw can be pushed beyond T.
struct SynthesisDraw {
  Eigen::MatrixXd x;      // T x J latent agent states
  Eigen::MatrixXd theta;  // T x (J+1) synthesis coefficients
  Eigen::VectorXd v;      // T observational variances
  Eigen::MatrixXd phi;    // T x J scale-mixture weights
  Eigen::MatrixXd C_T;
  double s_T = 0.0;
  double n_T = 0.0;
};

struct GibbsConfig {
  int burn_in = 2000;
  int n_saved = 3000;
  dlm::DiscountConfig discount{0.99, 0.95};
  dlm::DlmState prior;  // dimension J+1; recouple_prior(J) when left empty
  std::uint64_t seed = 0;
  // Stable stream ids, one per agent. Defaults to the agent index; tests
  // that reorder agents pass the ids along with them so each agent keeps its
  // own randomness.
  std::vector<std::uint64_t> agent_streams;

  void validate(int n_agents) const;
};

// Synthesis prior: intercept centred at 0, agent coefficients at 1/J.
dlm::DlmState recouple_prior(int n_agents);

// Independent per-agent random streams plus a master stream for the scalar
// and intercept draws. Derived purely from (seed, id), never from consumption
// order.
struct SynthesisStreams {
  Rng master;
  Rng intercept;
  std::vector<Rng> agents;

  static SynthesisStreams make(std::uint64_t seed,
                               const std::vector<std::uint64_t>& agent_ids);
};

// Initial latent states drawn independently from the agent densities.
Eigen::MatrixXd init_latent_states(const AgentDensities& densities,
                                   SynthesisStreams& streams);

struct FfbsDraw {
  Eigen::MatrixXd theta;  // T x (J+1)
  Eigen::VectorXd v;      // T
  Eigen::MatrixXd C_T;
  double s_T = 0.0;
  double n_T = 0.0;
};

// Forward filter / backward sample of the synthesis state conditional on
// latent agent states x.
FfbsDraw ffbs_draw(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                   const dlm::DlmState& prior, const dlm::DiscountConfig& disc,
                   SynthesisStreams& streams);

// Conditional mean and covariance of x_t given everything else; exposed so
// the sampler can be checked against direct joint-normal conditioning.
struct LatentMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};
LatentMoments latent_state_moments(const Eigen::VectorXd& theta_t, double v_t,
                                   const Eigen::VectorXd& phi_t, double y_t,
                                   const Eigen::VectorXd& h_t,
                                   const Eigen::VectorXd& H_t);

struct LatentDraw {
  Eigen::MatrixXd x;    // T x J
  Eigen::MatrixXd phi;  // T x J, refreshed conditional on the new x
};

// Per-t joint draw of the latent states, then the scale-mixture refresh
// phi_tj ~ Gamma((n+1)/2, (n + d)/2) with d the squared standardized miss.
// Point-mass coordinates stay pinned at their location with phi = 1.
LatentDraw draw_latent_states(const Eigen::MatrixXd& theta,
                              const Eigen::VectorXd& v,
                              const Eigen::MatrixXd& phi,
                              const Eigen::VectorXd& y,
                              const AgentDensities& densities,
                              SynthesisStreams& streams);

// Two-block Gibbs sampler; deterministic for a fixed config.
std::vector<SynthesisDraw> run_gibbs(const Eigen::VectorXd& y,
                                     const AgentDensities& densities,
                                     const GibbsConfig& config);

// Predictive sample for the next observation: per retained draw the state is
// evolved one discount step, next-period agent states are drawn from
// densities_next, and y is emitted from the synthesis equation. mean/var hold
// the per-draw normal components so scores can Rao-Blackwellize over the
// mixture instead of binning raw draws.
struct PredictiveSample {
  Eigen::VectorXd y;
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
};

PredictiveSample predict_one_step(const std::vector<SynthesisDraw>& draws,
                                  const AgentDensities& densities_next,
                                  const dlm::DiscountConfig& disc,
                                  SynthesisStreams& streams,
                                  int replicates = 1);

enum class KStepMode { direct, customized };

// k-step-ahead predictive sample. direct mode evolves the synthesis state k
// discount steps and needs agent densities for T+k. customized mode is the
// one-step procedure applied to a system whose agents were built on lag-k
// slices; agent_lag declares that lag and must equal k.
PredictiveSample predict_k_step(const std::vector<SynthesisDraw>& draws,
                                const AgentDensities& densities_ahead,
                                const dlm::DiscountConfig& disc, int k,
                                KStepMode mode, int agent_lag,
                                SynthesisStreams& streams, int replicates = 1);

}  // namespace drs::bps
