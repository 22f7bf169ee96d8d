#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "drs/dlm.hpp"
#include "drs/panel.hpp"
#include "drs/portfolio.hpp"

namespace drs::run {

// Full description of one backtest: data locations, split dates, horizons,
// model settings, and output destination. Parsed from an INI-style file with
// [section] headers and key = value lines; '#' starts a comment. Unknown
// sections or keys are errors.
struct ExperimentConfig {
  // [data]
  std::string panel_path;
  std::string groups_path;
  bool standardize = false;
  std::string risk_free_column;  // optional panel column; empty = none

  // [splits] train < calibration < evaluation, all present in the panel
  data::MonthDate train_end;
  data::MonthDate calibration_end;
  data::MonthDate evaluation_end;

  // [horizons]
  std::vector<int> horizons{1};

  // [decouple] per-group filter settings
  dlm::DiscountConfig decouple_discount{0.99, 0.95};
  double decouple_n0 = 10.0;
  double decouple_s0 = 0.01;
  bool decouple_intercept = true;

  // [recouple] synthesis settings
  dlm::DiscountConfig recouple_discount{0.99, 0.95};
  double recouple_n0 = 10.0;
  double recouple_s0 = 0.01;
  int mcmc_burn = 2000;
  int mcmc_saved = 3000;
  int refit_every = 1;  // origin thinning stride; 1 = re-fit at every origin
  int predictive_replicates = 1;
  bool dump_draws = false;

  // [baselines]
  bool with_historical_average = true;
  bool with_equal_weight = true;
  bool with_bma = true;
  bool with_lasso = true;
  bool with_pca = true;
  bool with_full_dlm = true;
  int lasso_grid_size = 100;
  double lasso_grid_decades = 4.0;
  int pca_factors = 5;

  // [portfolio]
  bool portfolio_enabled = true;
  portfolio::AllocationConfig allocation;  // unconstrained bounds

  // [run]
  std::uint64_t seed = 42;
  std::string out_dir = "out";
  int threads = 0;  // 0 = hardware concurrency
  std::vector<std::string> models;  // empty = every enabled model

  void validate() const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(std::istream& in, const std::string& origin);

}  // namespace drs::run
