#include "drs/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

#include "drs/baselines.hpp"
#include "drs/dlm.hpp"
#include "drs/rng.hpp"
#include "drs/synthesis.hpp"

namespace drs::run {

namespace {

using baselines::MixtureDensity;
using data::MonthDate;
using data::SupervisedSlice;
using data::TimeSeriesPanel;
using eval::ForecastRecord;

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                       std::uint64_t c) {
  return detail::mix64(detail::mix64(detail::mix64(detail::mix64(seed), a), b),
                       c);
}

// FNV-1a, used instead of std::hash so stream tags are identical across
// standard library implementations.
std::uint64_t name_tag(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char ch : s) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Deterministic index-parallel loop: slots are preassigned, so the result is
// identical for any thread count.
void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (n <= 0) return;
  int workers = threads > 0
                    ? threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

double log_mean_exp(const Eigen::VectorXd& logs) {
  const double top = logs.maxCoeff();
  if (!std::isfinite(top)) throw NumericError("degenerate log-score stack");
  return top + std::log((logs.array() - top).exp().mean());
}

constexpr double kLog2Pi = 1.8378770664093454836;

// Rao-Blackwellized mixture score of a predictive sample: the average normal
// density over per-draw (mean, variance) components.
double mixture_log_score(const bps::PredictiveSample& sample, double y) {
  Eigen::VectorXd logs(sample.mean.size());
  for (int i = 0; i < sample.mean.size(); ++i) {
    const double v = sample.var[i];
    if (!(v > 0.0)) throw NumericError("non-positive predictive variance");
    const double e = y - sample.mean[i];
    logs[i] = -0.5 * (kLog2Pi + std::log(v) + e * e / v);
  }
  return log_mean_exp(logs);
}

double sample_mixture(const MixtureDensity& mix, Rng& rng) {
  double u = rng.uniform();
  int pick = static_cast<int>(mix.weights.size()) - 1;
  for (int j = 0; j < mix.weights.size(); ++j) {
    u -= mix.weights[j];
    if (u <= 0.0) {
      pick = j;
      break;
    }
  }
  return mix.components[static_cast<std::size_t>(pick)].sample(rng);
}

MixtureDensity single_density(const StudentT& d) {
  MixtureDensity mix;
  mix.weights = Eigen::VectorXd::Ones(1);
  mix.components = {d};
  return mix;
}

// Per-horizon supervised system for one predictor set: the lag-k slice, its
// filter design, and the sequential filter pass over every row.
struct FilteredSystem {
  SupervisedSlice slice;
  Eigen::MatrixXd design;
  dlm::FilterOutput filter;
};

FilteredSystem make_system(const TimeSeriesPanel& panel,
                           const std::vector<int>& columns, int k,
                           bool standardize, bool intercept,
                           const dlm::DiscountConfig& disc, double n0,
                           double s0) {
  FilteredSystem sys;
  sys.slice = data::build_supervised(panel, columns, k, standardize);
  sys.design = intercept ? dlm::with_intercept(sys.slice.x) : sys.slice.x;
  dlm::DlmState prior = dlm::default_prior(static_cast<int>(sys.design.cols()));
  prior.n = n0;
  prior.s = s0;
  sys.filter = dlm::run_expanding_filter(sys.design, sys.slice.y, prior, disc);
  return sys;
}

// Predictive density for target panel index oi + k conditioned on data
// through the origin row oi: project the posterior at the last realized slice
// row forward k steps against the origin's regressor row.
StudentT system_projection(const FilteredSystem& sys, int origin_idx, int k,
                           const dlm::DiscountConfig& disc) {
  const int last_row = origin_idx - k;  // slice row of the last realized target
  const int forecast_row = origin_idx;  // slice row whose target is oi + k
  if (last_row < 0 || forecast_row >= sys.slice.rows()) {
    throw InvalidArgumentError("projection outside the supervised slice");
  }
  return dlm::forecast_density(sys.filter.posteriors[last_row],
                               sys.design.row(forecast_row).transpose(), disc,
                               k);
}

struct ModelPlan {
  std::vector<std::string> ids;  // emission order
  bool want(const std::string& id) const {
    return std::find(ids.begin(), ids.end(), id) != ids.end();
  }
};

ModelPlan plan_models(const ExperimentConfig& cfg,
                      const std::vector<std::string>& group_names) {
  std::vector<std::string> all;
  all.push_back(kSynthesisModel);
  for (const auto& g : group_names) all.push_back(g);
  if (cfg.with_full_dlm) all.push_back(kFullDlm);
  if (cfg.with_equal_weight) all.push_back(kEqualWeight);
  if (cfg.with_bma) all.push_back(kBma);
  if (cfg.with_historical_average) all.push_back(kHistoricalAverage);
  if (cfg.with_lasso) all.push_back(kLasso);
  if (cfg.with_pca) all.push_back(kPca);

  if (cfg.models.empty()) return ModelPlan{all};
  std::set<std::string> wanted(cfg.models.begin(), cfg.models.end());
  for (const auto& m : wanted) {
    if (std::find(all.begin(), all.end(), m) == all.end()) {
      throw ValidationError("unknown or disabled model '" + m +
                            "' in the model selection");
    }
  }
  // The synthesis model is the scoring and portfolio reference; it always
  // runs.
  wanted.insert(kSynthesisModel);
  ModelPlan plan;
  for (const auto& m : all) {
    if (wanted.count(m)) plan.ids.push_back(m);
  }
  return plan;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

class CsvFile {
public:
  CsvFile(const std::filesystem::path& dir, const std::string& name)
      : name_(name), out_(dir / name) {
    if (!out_) throw IoError("cannot write report file '" + name + "'");
  }
  template <typename... Parts>
  void row(const Parts&... parts) {
    bool first = true;
    ((out_ << (first ? "" : ",") << parts, first = false), ...);
    out_ << '\n';
  }
  void line(const std::string& text) { out_ << text << '\n'; }
  const std::string& name() const { return name_; }
  void close() {
    out_.close();
    if (!out_) throw IoError("failed while writing '" + name_ + "'");
  }

private:
  std::string name_;
  std::ofstream out_;
};

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  result.config = config;

  TimeSeriesPanel panel = data::load_panel(config.panel_path);
  const data::GroupPartition groups =
      data::partition_groups(panel, config.groups_path);
  const int n_groups = groups.n_groups();

  for (const auto& g : groups.group_names) {
    for (const char* reserved :
         {kSynthesisModel, kHistoricalAverage, kEqualWeight, kBma, kLasso,
          kPca, kFullDlm}) {
      if (g == reserved) {
        throw ValidationError("group name '" + g +
                              "' collides with a reserved model id");
      }
    }
  }

  const int it = panel.index_of(config.train_end);
  const int ic = panel.index_of(config.calibration_end);
  const int ie = panel.index_of(config.evaluation_end);
  if (it < 0 || ic < 0 || ie < 0) {
    throw ValidationError("split dates must all lie inside the panel");
  }
  const int k_max = *std::max_element(config.horizons.begin(),
                                      config.horizons.end());
  if (it < k_max + 7) {
    throw ValidationError("training period too short: need at least " +
                          std::to_string(k_max + 8) +
                          " months before train_end for horizon " +
                          std::to_string(k_max));
  }
  if (ic - it < k_max + 2) {
    throw ValidationError("calibration period too short for horizon " +
                          std::to_string(k_max));
  }
  if (config.with_lasso && ic + 1 - 2 * k_max < 3) {
    throw ValidationError("lasso needs at least 3 rows at the first origin");
  }

  int rf_col = -1;
  if (!config.risk_free_column.empty()) {
    rf_col = panel.column_of(config.risk_free_column);
    if (rf_col < 0) {
      throw ValidationError("risk-free column '" + config.risk_free_column +
                            "' not found in the panel");
    }
  } else if (config.portfolio_enabled) {
    result.warnings.push_back(
        "no risk-free column configured; assuming r_f = 0");
  }

  const ModelPlan plan = plan_models(config, groups.group_names);
  result.model_ids = plan.ids;
  const int cal_start = it + 1;  // first synthesis target index

  // Every partitioned column in panel order: the design of the full, lasso,
  // and pca models. Ignored columns stay out of every model.
  std::vector<int> model_columns;
  for (const auto& members : groups.members) {
    model_columns.insert(model_columns.end(), members.begin(), members.end());
  }
  std::sort(model_columns.begin(), model_columns.end());

  // Portfolio inputs gathered from the horizon-1 pass.
  struct PortfolioInputs {
    std::vector<int> targets;  // panel indices
    std::map<std::string, std::vector<Eigen::VectorXd>> draws;  // per model
  } pf;
  const bool want_portfolio =
      config.portfolio_enabled &&
      std::find(config.horizons.begin(), config.horizons.end(), 1) !=
          config.horizons.end();
  const int n_pf_draws = config.mcmc_saved * config.predictive_replicates;

  for (const int k : config.horizons) {
    // Evaluation targets are shared by every model at this horizon.
    std::vector<int> targets;
    for (int d = ic + 1; d <= ie; ++d) targets.push_back(d);
    const int n_targets = static_cast<int>(targets.size());
    std::vector<MonthDate> target_dates;
    std::vector<MonthDate> origin_dates;
    for (const int d : targets) {
      target_dates.push_back(panel.dates[d]);
      origin_dates.push_back(panel.dates[d - k]);
    }
    if (want_portfolio && k == 1) pf.targets = targets;

    // Decoupled systems: one per group, plus the unpartitioned design.
    std::vector<FilteredSystem> agents(n_groups);
    for (int g = 0; g < n_groups; ++g) {
      agents[g] = make_system(panel, groups.members[g], k, config.standardize,
                              config.decouple_intercept,
                              config.decouple_discount, config.decouple_n0,
                              config.decouple_s0);
    }
    FilteredSystem full_system;
    if (plan.want(kFullDlm)) {
      full_system = make_system(panel, model_columns, k, config.standardize,
                                config.decouple_intercept,
                                config.decouple_discount, config.decouple_n0,
                                config.decouple_s0);
    }

    // Agent projections at every origin, shared by the synthesis forecast,
    // the pools, and the per-group model records.
    std::vector<std::vector<StudentT>> projections(n_targets);
    for (int i = 0; i < n_targets; ++i) {
      projections[i].reserve(n_groups);
      for (int g = 0; g < n_groups; ++g) {
        projections[i].push_back(
            system_projection(agents[g], targets[i] - k, k,
                              config.decouple_discount));
      }
    }

    // Synthesis training inputs: sequential agent densities for realized
    // targets from the calibration start onward.
    const auto agent_window = [&](int last_target) {
      bps::AgentDensities H;
      const int rows = last_target - cal_start + 1;
      H.dof.resize(rows, n_groups);
      H.location.resize(rows, n_groups);
      H.scale.resize(rows, n_groups);
      for (int r = 0; r < rows; ++r) {
        const int slice_row = cal_start + r - k;
        for (int g = 0; g < n_groups; ++g) {
          const StudentT& d = agents[g].filter.forecasts[slice_row];
          H.dof(r, g) = d.dof;
          H.location(r, g) = d.location;
          H.scale(r, g) = d.scale;
        }
      }
      return H;
    };

    dlm::DlmState synth_prior = bps::recouple_prior(n_groups);
    synth_prior.n = config.recouple_n0;
    synth_prior.s = config.recouple_s0;

    // Per-origin synthesis: refit blocks are independent, so they run in
    // parallel with preassigned output slots.
    std::vector<double> drs_point(n_targets), drs_score(n_targets);
    std::vector<Eigen::VectorXd> drs_pf_draws(n_targets);
    Eigen::MatrixXd coef_track(n_targets, n_groups + 1);
    const int n_blocks =
        (n_targets + config.refit_every - 1) / config.refit_every;
    parallel_for(n_blocks, config.threads, [&](int b) {
      const int pos0 = b * config.refit_every;
      const int pos_end = std::min(pos0 + config.refit_every, n_targets);
      const int refit_origin = targets[pos0] - k;

      bps::GibbsConfig gc;
      gc.burn_in = config.mcmc_burn;
      gc.n_saved = config.mcmc_saved;
      gc.discount = config.recouple_discount;
      gc.prior = synth_prior;
      gc.seed = sub_seed(config.seed, 0x11, k, refit_origin);
      const Eigen::VectorXd y_window =
          panel.y.segment(cal_start, refit_origin - cal_start + 1);
      const std::vector<bps::SynthesisDraw> draws =
          bps::run_gibbs(y_window, agent_window(refit_origin), gc);

      Eigen::VectorXd theta_mean = Eigen::VectorXd::Zero(n_groups + 1);
      for (const auto& d : draws) {
        theta_mean += d.theta.row(d.theta.rows() - 1).transpose();
      }
      theta_mean /= static_cast<double>(draws.size());

      std::vector<std::uint64_t> ids(n_groups);
      for (int g = 0; g < n_groups; ++g) ids[g] = g;
      for (int pos = pos0; pos < pos_end; ++pos) {
        const int oi = targets[pos] - k;
        bps::AgentDensities h_next;
        h_next.dof.resize(1, n_groups);
        h_next.location.resize(1, n_groups);
        h_next.scale.resize(1, n_groups);
        for (int g = 0; g < n_groups; ++g) {
          const StudentT& d = projections[pos][g];
          h_next.dof(0, g) = d.dof;
          h_next.location(0, g) = d.location;
          h_next.scale(0, g) = d.scale;
        }
        bps::SynthesisStreams streams = bps::SynthesisStreams::make(
            sub_seed(config.seed, 0x22, k, oi), ids);
        const bps::PredictiveSample pred = bps::predict_k_step(
            draws, h_next, config.recouple_discount, pos - pos0 + 1,
            bps::KStepMode::direct, k, streams, config.predictive_replicates);
        drs_point[pos] = pred.mean.mean();
        drs_score[pos] = mixture_log_score(pred, panel.y[targets[pos]]);
        if (want_portfolio && k == 1) drs_pf_draws[pos] = pred.y;
        coef_track.row(pos) = theta_mean.transpose();
      }
    });

    CoefficientTrajectory traj;
    traj.dates = origin_dates;
    traj.names.push_back("intercept");
    for (const auto& g : groups.group_names) traj.names.push_back(g);
    traj.values = coef_track;
    result.coefficients[k] = std::move(traj);

    const auto push_records = [&](const std::string& model,
                                  const std::vector<double>& points,
                                  const std::vector<double>& scores) {
      auto& recs = result.records[model][k];
      recs.reserve(n_targets);
      for (int i = 0; i < n_targets; ++i) {
        recs.push_back(ForecastRecord{target_dates[i], model, k, points[i],
                                      scores[i], panel.y[targets[i]]});
      }
    };
    push_records(kSynthesisModel, drs_point, drs_score);
    if (want_portfolio && k == 1) {
      pf.draws[kSynthesisModel] = std::move(drs_pf_draws);
    }

    // Per-(model, origin) draw banks for the portfolio stage; streams depend
    // only on (seed, model, horizon, target date), never on evaluation order.
    const auto store_pf_draws =
        [&](const std::string& model,
            const std::function<double(int, Rng&)>& draw_one) {
          if (!want_portfolio || k != 1) return;
          auto& slot = pf.draws[model];
          slot.resize(n_targets);
          for (int i = 0; i < n_targets; ++i) {
            Rng rng(sub_seed(config.seed, detail::mix64(0x77, name_tag(model)),
                             k, targets[i]));
            Eigen::VectorXd ys(n_pf_draws);
            for (int d = 0; d < n_pf_draws; ++d) ys[d] = draw_one(i, rng);
            slot[i] = std::move(ys);
          }
        };

    // Density-form baselines. Each keeps its per-origin mixture so the
    // portfolio stage can sample the same forecast it was scored on.
    const auto score_density_model =
        [&](const std::string& model,
            const std::function<MixtureDensity(int)>& density_at) {
          std::vector<double> points(n_targets), scores(n_targets);
          std::vector<MixtureDensity> kept(n_targets);
          const bool keep = want_portfolio && k == 1;
          for (int i = 0; i < n_targets; ++i) {
            const MixtureDensity mix = density_at(i);
            points[i] = mix.mean();
            scores[i] = mix.log_pdf(panel.y[targets[i]]);
            if (keep) kept[i] = mix;
          }
          push_records(model, points, scores);
          store_pf_draws(model, [&kept](int i, Rng& rng) {
            return sample_mixture(kept[i], rng);
          });
        };

    for (int g = 0; g < n_groups; ++g) {
      if (!plan.want(groups.group_names[g])) continue;
      score_density_model(groups.group_names[g], [&](int i) {
        return single_density(projections[i][g]);
      });
    }
    if (plan.want(kFullDlm)) {
      score_density_model(kFullDlm, [&](int i) {
        return single_density(system_projection(
            full_system, targets[i] - k, k, config.decouple_discount));
      });
    }
    if (plan.want(kEqualWeight)) {
      score_density_model(kEqualWeight, [&](int i) {
        return baselines::equal_weight_pool(projections[i]);
      });
    }
    if (plan.want(kHistoricalAverage)) {
      score_density_model(kHistoricalAverage, [&](int i) {
        const int oi = targets[i] - k;
        return single_density(
            baselines::historical_average(panel.y.head(oi + 1)));
      });
    }
    if (plan.want(kBma)) {
      // Sequential posterior weights over the agent set, advanced with the
      // realized sequential densities through each origin.
      baselines::BmaState state = baselines::bma_uniform(n_groups);
      int next_absorb = cal_start;
      std::vector<double> points(n_targets), scores(n_targets);
      std::vector<MixtureDensity> kept(n_targets);
      for (int i = 0; i < n_targets; ++i) {
        const int oi = targets[i] - k;
        for (; next_absorb <= oi; ++next_absorb) {
          std::vector<StudentT> h_t;
          h_t.reserve(n_groups);
          for (int g = 0; g < n_groups; ++g) {
            h_t.push_back(agents[g].filter.forecasts[next_absorb - k]);
          }
          state = baselines::bma_step(state, h_t, panel.y[next_absorb]).next;
        }
        MixtureDensity mix;
        mix.weights = state.weights();
        mix.components = projections[i];
        points[i] = mix.mean();
        scores[i] = mix.log_pdf(panel.y[targets[i]]);
        if (want_portfolio && k == 1) kept[i] = std::move(mix);
      }
      push_records(kBma, points, scores);
      store_pf_draws(kBma, [&kept](int i, Rng& rng) {
        return sample_mixture(kept[i], rng);
      });
    }
    if (plan.want(kLasso)) {
      const SupervisedSlice lasso_slice =
          data::build_supervised(panel, model_columns, k, config.standardize);
      std::vector<double> points(n_targets), scores(n_targets);
      std::vector<StudentT> kept(n_targets);
      parallel_for(n_targets, config.threads, [&](int i) {
        const int oi = targets[i] - k;
        const int rows = oi - k + 1;  // realized slice rows
        const Eigen::MatrixXd xw = lasso_slice.x.topRows(rows);
        const Eigen::VectorXd yw = lasso_slice.y.head(rows);
        const Eigen::VectorXd grid = baselines::lasso_lambda_grid(
            xw, yw, config.lasso_grid_size, config.lasso_grid_decades);
        const baselines::LassoSelection sel =
            baselines::lasso_loo_select(xw, yw, grid);
        const StudentT d = baselines::lasso_predictive_density(
            sel.fit, lasso_slice.x.row(oi).transpose());
        points[i] = d.location;
        scores[i] = d.log_pdf(panel.y[targets[i]]);
        kept[i] = d;
      });
      push_records(kLasso, points, scores);
      store_pf_draws(kLasso, [&kept](int i, Rng& rng) {
        return kept[i].sample(rng);
      });
    }
    if (plan.want(kPca)) {
      const SupervisedSlice pca_slice =
          data::build_supervised(panel, model_columns, k, config.standardize);
      std::vector<double> points(n_targets), scores(n_targets);
      std::vector<StudentT> kept(n_targets);
      parallel_for(n_targets, config.threads, [&](int i) {
        const int oi = targets[i] - k;
        const int rows = oi - k + 1;
        const StudentT d = baselines::pc_regression_density(
            pca_slice.x.topRows(rows), pca_slice.y.head(rows),
            pca_slice.x.row(oi).transpose(), config.pca_factors,
            config.decouple_discount, k);
        points[i] = d.location;
        scores[i] = d.log_pdf(panel.y[targets[i]]);
        kept[i] = d;
      });
      push_records(kPca, points, scores);
      store_pf_draws(kPca, [&kept](int i, Rng& rng) {
        return kept[i].sample(rng);
      });
    }

    // Retrospective synthesis over the whole window, for the dependence
    // diagnostics and optional draw dump.
    {
      bps::GibbsConfig gc;
      gc.burn_in = config.mcmc_burn;
      gc.n_saved = config.mcmc_saved;
      gc.discount = config.recouple_discount;
      gc.prior = synth_prior;
      gc.seed = sub_seed(config.seed, 0x33, k, ie);
      const Eigen::VectorXd y_window =
          panel.y.segment(cal_start, ie - cal_start + 1);
      const std::vector<bps::SynthesisDraw> draws =
          bps::run_gibbs(y_window, agent_window(ie), gc);
      const int n_draws = static_cast<int>(draws.size());

      R2Output r2;
      r2.groups = groups.group_names;
      for (int a = 0; a < n_groups; ++a) {
        for (int bq = a + 1; bq < n_groups; ++bq) r2.pairs.emplace_back(a, bq);
      }
      std::vector<int> r2_targets;
      for (int d = ic + 1; d <= ie; ++d) r2_targets.push_back(d);
      r2.dates.clear();
      for (const int d : r2_targets) r2.dates.push_back(panel.dates[d]);
      r2.full.resize(static_cast<int>(r2_targets.size()), n_groups);
      r2.pairwise.resize(static_cast<int>(r2_targets.size()),
                         static_cast<int>(r2.pairs.size()));
      Eigen::MatrixXd x_t(n_draws, n_groups);
      for (std::size_t row = 0; row < r2_targets.size(); ++row) {
        const int chain_t = r2_targets[row] - cal_start;
        for (int i = 0; i < n_draws; ++i) {
          x_t.row(i) = draws[i].x.row(chain_t);
        }
        for (int g = 0; g < n_groups; ++g) {
          r2.full(static_cast<int>(row), g) =
              n_groups > 1 ? eval::mc_r2_full(x_t, g) : 0.0;
        }
        for (std::size_t pidx = 0; pidx < r2.pairs.size(); ++pidx) {
          r2.pairwise(static_cast<int>(row), static_cast<int>(pidx)) =
              eval::mc_r2_pairwise(x_t.col(r2.pairs[pidx].first),
                                   x_t.col(r2.pairs[pidx].second));
        }
      }
      result.r2[k] = std::move(r2);

      if (config.dump_draws) {
        const std::filesystem::path dir(config.out_dir);
        std::filesystem::create_directories(dir);
        std::ofstream dump(dir / ("draws_h" + std::to_string(k) + ".tsv"));
        if (!dump) throw IoError("cannot write the draw dump");
        dump << "iteration\tdate";
        dump << "\ttheta_intercept";
        for (const auto& g : groups.group_names) dump << "\ttheta_" << g;
        dump << "\tv\n";
        for (int i = 0; i < n_draws; ++i) {
          for (int t = 0; t < draws[i].theta.rows(); ++t) {
            dump << i << '\t' << panel.dates[cal_start + t].str();
            for (int c = 0; c < draws[i].theta.cols(); ++c) {
              dump << '\t' << fmt(draws[i].theta(t, c));
            }
            dump << '\t' << fmt(draws[i].v[t]) << '\n';
          }
        }
      }
    }
  }

  // Portfolio stage over the horizon-1 evaluation window.
  if (want_portfolio) {
    const int n_targets = static_cast<int>(pf.targets.size());
    std::vector<MonthDate> dates;
    std::vector<double> realized(n_targets), rf(n_targets);
    for (int i = 0; i < n_targets; ++i) {
      const int d = pf.targets[i];
      dates.push_back(panel.dates[d]);
      realized[i] = panel.y[d];
      rf[i] = rf_col >= 0 ? panel.x(d - 1, rf_col) : 0.0;
    }
    portfolio::AllocationConfig constrained = config.allocation;
    constrained.lower = 0.0;
    constrained.upper = 1.0;

    std::map<std::string, PortfolioOutput> staged;
    for (const auto& model : result.model_ids) {
      if (!pf.draws.count(model)) continue;
      PortfolioOutput po;
      po.model = model;
      std::vector<double> w_free(n_targets), w_long(n_targets);
      for (int i = 0; i < n_targets; ++i) {
        const Eigen::VectorXd& draws = pf.draws[model][i];
        w_free[i] = portfolio::optimal_weight(draws, rf[i], config.allocation);
        w_long[i] = portfolio::optimal_weight(draws, rf[i], constrained);
      }
      po.unconstrained = portfolio::realized_utility_series(
          dates, w_free, realized, rf, config.allocation.gamma);
      po.no_short = portfolio::realized_utility_series(
          dates, w_long, realized, rf, config.allocation.gamma);
      staged[model] = std::move(po);
    }
    const auto& ref = staged.at(kSynthesisModel);
    for (const auto& model : result.model_ids) {
      const auto it_model = staged.find(model);
      if (it_model == staged.end()) continue;
      PortfolioOutput po = it_model->second;
      po.cer = portfolio::cer_aggregate(po.unconstrained.utility,
                                        ref.unconstrained.utility,
                                        config.allocation.gamma);
      po.cer_no_short = portfolio::cer_aggregate(po.no_short.utility,
                                                 ref.no_short.utility,
                                                 config.allocation.gamma);
      po.single_period_cer = portfolio::cer_single_period(
          po.unconstrained.utility, ref.unconstrained.utility,
          config.allocation.gamma);
      double mean_cer = 0.0;
      for (const double c : po.single_period_cer) mean_cer += c;
      po.mean_single_period_cer =
          mean_cer / static_cast<double>(po.single_period_cer.size());
      po.ccer = portfolio::ccer_series(po.single_period_cer, dates);
      po.final_ccer = po.ccer.back();
      result.portfolio.push_back(std::move(po));
    }
  }

  return result;
}

std::vector<std::string> emit_reports(const ExperimentResult& result,
                                      const std::string& out_dir) {
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;

  const auto& ref_records = result.records.at(kSynthesisModel);

  {
    CsvFile metrics(dir, "metrics.csv");
    metrics.line(
        "# rmsfe_pct_vs_reference = (rmsfe_reference - rmsfe_model) / "
        "rmsfe_model, reference = drs");
    metrics.row("model", "horizon", "rmsfe", "rmsfe_pct_vs_reference",
                "lpdr_final");
    for (const auto& model : result.model_ids) {
      const auto it_model = result.records.find(model);
      if (it_model == result.records.end()) continue;
      for (const auto& [k, recs] : it_model->second) {
        const double rm = eval::rmsfe(recs);
        const double rr = eval::rmsfe(ref_records.at(k));
        const double lpdr_final =
            eval::lpdr_series(recs, ref_records.at(k)).back();
        metrics.row(model, k, fmt(rm), fmt((rr - rm) / rm), fmt(lpdr_final));
      }
    }
    metrics.close();
    files.push_back(metrics.name());
  }

  // Per-horizon forecast tables and LPDR trajectories.
  std::set<int> horizons;
  for (const auto& [model, by_k] : result.records) {
    for (const auto& [k, recs] : by_k) horizons.insert(k);
  }
  for (const int k : horizons) {
    CsvFile fc(dir, "forecasts_h" + std::to_string(k) + ".csv");
    fc.row("date", "model", "point", "log_density", "realized");
    for (const auto& model : result.model_ids) {
      const auto it_model = result.records.find(model);
      if (it_model == result.records.end()) continue;
      const auto it_k = it_model->second.find(k);
      if (it_k == it_model->second.end()) continue;
      for (const auto& r : it_k->second) {
        fc.row(r.target_date.str(), model, fmt(r.point), fmt(r.log_density),
               fmt(r.realized));
      }
    }
    fc.close();
    files.push_back(fc.name());

    for (const auto& model : result.model_ids) {
      if (model == kSynthesisModel) continue;
      const auto it_model = result.records.find(model);
      if (it_model == result.records.end()) continue;
      const auto it_k = it_model->second.find(k);
      if (it_k == it_model->second.end()) continue;
      const auto series = eval::lpdr_series(it_k->second, ref_records.at(k));
      CsvFile lp(dir, "lpdr_h" + std::to_string(k) + "_" + model + ".csv");
      lp.row("date", "value");
      for (std::size_t i = 0; i < series.size(); ++i) {
        lp.row(it_k->second[i].target_date.str(), fmt(series[i]));
      }
      lp.close();
      files.push_back(lp.name());
    }
  }

  for (const auto& [k, traj] : result.coefficients) {
    CsvFile co(dir, "coefficients_h" + std::to_string(k) + ".csv");
    std::string header = "date";
    for (const auto& n : traj.names) header += "," + n;
    co.line(header);
    for (std::size_t i = 0; i < traj.dates.size(); ++i) {
      std::string row = traj.dates[i].str();
      for (int c = 0; c < traj.values.cols(); ++c) {
        row += "," + fmt(traj.values(static_cast<int>(i), c));
      }
      co.line(row);
    }
    co.close();
    files.push_back(co.name());
  }

  for (const auto& [k, r2] : result.r2) {
    for (std::size_t g = 0; g < r2.groups.size(); ++g) {
      CsvFile rf(dir, "r2_full_h" + std::to_string(k) + "_" + r2.groups[g] +
                          ".csv");
      rf.row("date", "value");
      for (std::size_t i = 0; i < r2.dates.size(); ++i) {
        rf.row(r2.dates[i].str(),
               fmt(r2.full(static_cast<int>(i), static_cast<int>(g))));
      }
      rf.close();
      files.push_back(rf.name());
    }
    for (std::size_t p = 0; p < r2.pairs.size(); ++p) {
      CsvFile rp(dir, "r2_pairwise_h" + std::to_string(k) + "_" +
                          r2.groups[r2.pairs[p].first] + "_" +
                          r2.groups[r2.pairs[p].second] + ".csv");
      rp.row("date", "value");
      for (std::size_t i = 0; i < r2.dates.size(); ++i) {
        rp.row(r2.dates[i].str(),
               fmt(r2.pairwise(static_cast<int>(i), static_cast<int>(p))));
      }
      rp.close();
      files.push_back(rp.name());
    }
  }

  if (!result.portfolio.empty()) {
    CsvFile summary(dir, "portfolio_summary.csv");
    summary.row("model", "cer", "cer_no_short", "mean_single_period_cer",
                "final_ccer");
    for (const auto& po : result.portfolio) {
      summary.row(po.model, fmt(po.cer), fmt(po.cer_no_short),
                  fmt(po.mean_single_period_cer), fmt(po.final_ccer));
      for (const bool no_short : {false, true}) {
        const auto& path = no_short ? po.no_short : po.unconstrained;
        CsvFile pfout(dir, "portfolio_" + po.model +
                               (no_short ? "_no_short.csv" : ".csv"));
        pfout.row("date", "weight", "realized_wealth", "realized_utility");
        for (std::size_t i = 0; i < path.dates.size(); ++i) {
          pfout.row(path.dates[i].str(), fmt(path.weights[i]),
                    fmt(path.wealth[i]), fmt(path.utility[i]));
        }
        pfout.close();
        files.push_back(pfout.name());
      }
    }
    summary.close();
    files.push_back(summary.name());
  }

  if (result.config.dump_draws) {
    for (const auto& [k, traj] : result.coefficients) {
      files.push_back("draws_h" + std::to_string(k) + ".tsv");
    }
  }

  std::sort(files.begin(), files.end());
  std::ofstream manifest(dir / "manifest.txt");
  if (!manifest) throw IoError("cannot write manifest.txt");
  for (const auto& f : files) manifest << f << '\n';
  manifest.close();
  files.push_back("manifest.txt");
  return files;
}

}  // namespace drs::run
