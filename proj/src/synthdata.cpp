#include "drs/synthdata.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "drs/panel.hpp"
#include "drs/rng.hpp"

namespace drs::synth {

namespace {

constexpr double kTwoPi = 6.2831853071795864769;

struct PresetSpec {
  int J = 0;               // groups
  int M = 0;               // predictors per group
  int T = 0;               // months, starting 2000-01
  int train = 0;           // month offset of train_end
  int cal = 0;             // month offset of calibration_end
  double sig1 = 0.01;      // target noise sd before the volatility break
  double sig2 = 0.018;     // and after
  int vol_break = 0;
  double drift_period = 200.0;  // months per weight cycle
  double drift_amp = 0.6;       // weight swing around the group base
  // Rotating mode gives every group a view of one common core signal, but
  // contaminates each group's view with its own biased distortion whose
  // amplitude falls to zero while that group's phase is high. Which group is
  // currently clean migrates through all of them over a cycle.
  bool rotating = false;
  double weight_scale = 0.015;   // core signal weight in rotating mode
  double distortion_amp = 1.2;   // peak distortion amplitude
  double distortion_bias = 0.6;  // group bias spread inside the distortion
  std::vector<std::string> group_names;
  int mcmc_burn = 200;
  int mcmc_saved = 400;
  int refit_every = 1;
  std::string horizons = "1";
  double decouple_delta = 0.99;
  double decouple_beta = 0.95;
  double recouple_delta = 0.99;
  double recouple_beta = 0.95;
  int pca_factors = 5;
  int lasso_grid = 100;
  double lasso_decades = 4.0;
  bool portfolio = true;
};

PresetSpec spec_for(const std::string& preset) {
  PresetSpec s;
  if (preset == "smoke") {
    s.J = 3;
    s.M = 2;
    s.T = 132;
    s.train = 47;
    s.cal = 83;
    s.sig1 = 0.012;
    s.sig2 = 0.018;
    s.vol_break = 90;
    s.drift_period = 120.0;
    s.group_names = {"grp1", "grp2", "grp3"};
    s.mcmc_burn = 100;
    s.mcmc_saved = 200;
    s.refit_every = 4;
    s.pca_factors = 2;
    s.lasso_grid = 60;
    s.lasso_decades = 3.0;
    return s;
  }
  if (preset == "desk") {
    s.J = 8;
    s.M = 4;
    s.T = 240;
    s.train = 95;
    s.cal = 155;
    s.sig1 = 0.010;
    s.sig2 = 0.016;
    s.vol_break = 160;
    s.drift_period = 200.0;
    s.group_names = {"rates",  "inflation", "output",    "labor",
                     "credit", "housing",   "sentiment", "technical"};
    s.mcmc_burn = 500;
    s.mcmc_saved = 1000;
    s.refit_every = 3;
    s.horizons = "1, 3";
    return s;
  }
  if (preset == "ordering") {
    s.J = 4;
    s.M = 4;
    s.T = 264;
    s.train = 59;
    s.cal = 113;
    s.sig1 = 0.006;
    s.sig2 = 0.015;
    s.vol_break = 150;
    s.drift_period = 120.0;
    s.rotating = true;
    s.weight_scale = 0.015;
    s.group_names = {"block1", "block2", "block3", "block4"};
    s.mcmc_burn = 150;
    s.mcmc_saved = 300;
    s.refit_every = 3;
    s.decouple_delta = 0.95;
    s.decouple_beta = 0.99;
    s.recouple_delta = 0.97;
    s.recouple_beta = 0.90;
    s.lasso_grid = 40;
    s.lasso_decades = 3.0;
    s.portfolio = false;
    return s;
  }
  throw InvalidArgumentError("unknown preset '" + preset +
                             "'; expected smoke, desk or ordering");
}

// Stationary AR(1) path with unit marginal variance, burned in from zero.
Eigen::VectorXd ar1_path(int T, double rho, Rng rng) {
  const double innov = std::sqrt(1.0 - rho * rho);
  double state = rng.normal();
  for (int b = 0; b < 200; ++b) state = rho * state + innov * rng.normal();
  Eigen::VectorXd out(T);
  for (int t = 0; t < T; ++t) {
    state = rho * state + innov * rng.normal();
    out[t] = state;
  }
  return out;
}

}  // namespace

std::vector<std::string> preset_names() { return {"smoke", "desk", "ordering"}; }

Bundle generate(const std::string& preset, const std::string& out_dir,
                std::uint64_t seed) {
  const PresetSpec s = spec_for(preset);
  const Rng root(detail::mix64(seed, 0x73796e7468ULL));

  // Latent structure: one dominant persistent factor that loads on every
  // predictor, and one persistent signal per group that actually drives the
  // target. The factor soaks up most of the predictor variance while carrying
  // little predictive content, so variance-ranked factor methods are at a
  // structural disadvantage against the grouped models.
  const Eigen::VectorXd f = ar1_path(s.T, 0.97, root.child(1));
  const Eigen::VectorXd u = ar1_path(s.T, 0.95, root.child(2));
  const Eigen::VectorXd c = ar1_path(s.T, 0.90, root.child(5));
  std::vector<Eigen::VectorXd> g(s.J);
  for (int j = 0; j < s.J; ++j) {
    g[j] = ar1_path(s.T, 0.90, root.child(100 + j));
  }

  // In rotating mode clean_share(t, j) rises to one while group j's phase is
  // high; its distortion amplitude is scaled by one minus that share, so the
  // group whose phase peaks sees the core signal undistorted and the role of
  // clean group migrates through all of them over a cycle. The distortion
  // mixes a contaminant c common to all groups with a group-specific path and
  // bias; the common part means pooling the groups' views does not average
  // the distortions away.
  const auto clean_share = [&](int t, int j) {
    const double phase = std::sin(kTwoPi * t / s.drift_period + kTwoPi * j / s.J);
    return phase > 0.0 ? phase * phase : 0.0;
  };
  const auto group_view = [&](int t, int j) {
    const double amp = s.distortion_amp * (1.0 - clean_share(t, j));
    const double bias =
        s.J > 1 ? s.distortion_bias * (2.0 * j / (s.J - 1) - 1.0) : 0.0;
    return u[t] + amp * (0.8 * c[t] + 0.6 * g[j][t] + bias);
  };

  data::TimeSeriesPanel panel;
  panel.target_name = "eq_prem";
  panel.dates.resize(s.T);
  for (int t = 0; t < s.T; ++t) {
    panel.dates[t] = data::MonthDate{2000, 1}.plus(t);
  }

  const int n_cols = s.J * s.M + 1;  // predictors plus the risk-free column
  panel.x.resize(s.T, n_cols);
  panel.predictor_names.resize(n_cols);
  for (int j = 0; j < s.J; ++j) {
    for (int m = 0; m < s.M; ++m) {
      const int col = j * s.M + m;
      panel.predictor_names[col] =
          s.group_names[j] + "_x" + std::to_string(m + 1);
      const int cell = j * s.M + m + 1;
      const double lambda = 1.5 + (cell * 7 % 11) / 10.0;
      const double kappa = 0.8 + (cell * 5 % 9) / 20.0;
      Rng noise = root.child(200 + col);
      for (int t = 0; t < s.T; ++t) {
        const double sig = s.rotating ? group_view(t, j) : g[j][t];
        const double idio = s.rotating ? 0.25 : 0.3;
        panel.x(t, col) = lambda * f[t] + kappa * sig + idio * noise.normal();
      }
    }
  }
  panel.predictor_names[n_cols - 1] = "rf";
  {
    Rng noise = root.child(4);
    for (int t = 0; t < s.T; ++t) {
      panel.x(t, n_cols - 1) = 0.0025 + 0.001 * std::sin(kTwoPi * t / 240.0) +
                               0.0002 * noise.normal();
    }
  }

  // Target: in rotating mode the target tracks the clean core signal, so a
  // group forecasts well exactly while its view is undistorted; otherwise the
  // group signals enter with smoothly drifting weights. Either way the common
  // factor barely matters and the noise variance breaks upward once.
  panel.y.resize(s.T);
  Rng eps = root.child(3);
  for (int t = 0; t < s.T; ++t) {
    const double sigma = t < s.vol_break ? s.sig1 : s.sig2;
    double signal = 0.004;
    if (t >= 1) {
      if (s.rotating) {
        signal += s.weight_scale * u[t - 1] + 0.003 * f[t - 1];
      } else {
        for (int j = 0; j < s.J; ++j) {
          const double base = 0.010 + 0.005 * (j * 3 % 7) / 6.0;
          const double w =
              base * (1.0 + s.drift_amp * std::sin(kTwoPi * t / s.drift_period +
                                                   kTwoPi * j / s.J));
          signal += w * g[j][t - 1];
        }
        signal += 0.004 * f[t - 1];
      }
    }
    panel.y[t] = signal + sigma * eps.normal();
  }
  panel.validate();

  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  Bundle bundle;
  bundle.panel_file = (dir / "panel.csv").string();
  bundle.groups_file = (dir / "groups.txt").string();
  bundle.config_file = (dir / "experiment.ini").string();

  data::save_panel(panel, bundle.panel_file);

  {
    std::ofstream out(bundle.groups_file);
    if (!out) throw IoError("cannot write '" + bundle.groups_file + "'");
    out << "# predictor partition for the " << preset << " preset\n";
    for (int j = 0; j < s.J; ++j) {
      out << s.group_names[j] << ": [";
      for (int m = 0; m < s.M; ++m) {
        out << (m ? ", " : "") << s.group_names[j] << "_x" << (m + 1);
      }
      out << "]\n";
    }
    out << "ignore: [rf]\n";
    if (!out) throw IoError("failed while writing '" + bundle.groups_file + "'");
  }

  {
    std::ostringstream ini;
    ini << "# " << preset << " preset, seed " << seed << "\n";
    ini << "[data]\n";
    ini << "panel = panel.csv\n";
    ini << "groups = groups.txt\n";
    ini << "standardize = true\n";
    ini << "risk_free_column = rf\n\n";
    ini << "[splits]\n";
    ini << "train_end = " << panel.dates[s.train].str() << "\n";
    ini << "calibration_end = " << panel.dates[s.cal].str() << "\n";
    ini << "evaluation_end = " << panel.dates[s.T - 1].str() << "\n\n";
    ini << "[horizons]\n";
    ini << "list = " << s.horizons << "\n\n";
    ini << "[decouple]\n";
    ini << "delta = " << s.decouple_delta << "\n";
    ini << "beta = " << s.decouple_beta << "\n\n";
    ini << "[recouple]\n";
    ini << "delta = " << s.recouple_delta << "\n";
    ini << "beta = " << s.recouple_beta << "\n";
    ini << "mcmc_burn = " << s.mcmc_burn << "\n";
    ini << "mcmc_saved = " << s.mcmc_saved << "\n";
    ini << "refit_every = " << s.refit_every << "\n\n";
    ini << "[baselines]\n";
    ini << "lasso_grid_size = " << s.lasso_grid << "\n";
    ini << "lasso_grid_decades = " << s.lasso_decades << "\n";
    ini << "pca_factors = " << s.pca_factors << "\n\n";
    ini << "[portfolio]\n";
    ini << "enabled = " << (s.portfolio ? "true" : "false") << "\n\n";
    ini << "[run]\n";
    ini << "seed = " << seed << "\n";
    ini << "out = out\n";
    std::ofstream out(bundle.config_file);
    if (!out) throw IoError("cannot write '" + bundle.config_file + "'");
    out << ini.str();
    if (!out) throw IoError("failed while writing '" + bundle.config_file + "'");
  }

  return bundle;
}

}  // namespace drs::synth
