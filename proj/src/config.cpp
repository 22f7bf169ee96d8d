#include "drs/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace drs::run {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Minimal INI reader that remembers which keys were consumed so that typos
// surface as errors instead of silently falling back to defaults.
class Ini {
public:
  Ini(std::istream& in, std::string origin) : origin_(std::move(origin)) {
    std::string line, section;
    int row = 0;
    while (std::getline(in, line)) {
      ++row;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']' || line.size() < 3) {
          throw ParseError(origin_ + ": line " + std::to_string(row) +
                           ": malformed section header");
        }
        section = trim(line.substr(1, line.size() - 2));
        sections_.insert(section);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos || section.empty()) {
        throw ParseError(origin_ + ": line " + std::to_string(row) +
                         ": expected 'key = value' inside a [section]");
      }
      const std::string key = section + "." + trim(line.substr(0, eq));
      if (!values_.emplace(key, trim(line.substr(eq + 1))).second) {
        throw ParseError(origin_ + ": line " + std::to_string(row) +
                         ": duplicate key '" + key + "'");
      }
    }
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback) {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert(key);
    return it->second;
  }

  std::string required(const std::string& key) {
    const auto it = values_.find(key);
    if (it == values_.end()) {
      throw ValidationError(origin_ + ": missing required key '" + key + "'");
    }
    consumed_.insert(key);
    return it->second;
  }

  double num(const std::string& key, double fallback) {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert(key);
    return parse_double(key, it->second);
  }

  long integer(const std::string& key, long fallback) {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert(key);
    const double v = parse_double(key, it->second);
    const long l = static_cast<long>(v);
    if (static_cast<double>(l) != v) {
      throw ParseError(origin_ + ": key '" + key + "' must be an integer");
    }
    return l;
  }

  bool flag(const std::string& key, bool fallback) {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert(key);
    std::string v = it->second;
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    throw ParseError(origin_ + ": key '" + key + "' must be boolean, got '" +
                     it->second + "'");
  }

  data::MonthDate date(const std::string& key) {
    const std::string v = required(key);
    try {
      return data::MonthDate::parse(v);
    } catch (const ParseError& e) {
      throw ParseError(origin_ + ": key '" + key + "': " + e.what());
    }
  }

  std::vector<std::string> list(const std::string& key) {
    const auto it = values_.find(key);
    std::vector<std::string> out;
    if (it == values_.end()) return out;
    consumed_.insert(key);
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, value] : values_) {
      if (!consumed_.count(key)) {
        throw ValidationError(origin_ + ": unknown key '" + key + "'");
      }
    }
  }

private:
  double parse_double(const std::string& key, const std::string& text) const {
    double v = 0.0;
    const char* b = text.data();
    const auto [p, ec] = std::from_chars(b, b + text.size(), v);
    if (ec != std::errc() || p != b + text.size()) {
      throw ParseError(origin_ + ": key '" + key + "' is not numeric: '" +
                       text + "'");
    }
    return v;
  }

  std::string origin_;
  std::map<std::string, std::string> values_;
  std::set<std::string> sections_;
  std::set<std::string> consumed_;
};

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& origin) {
  Ini ini(in, origin);
  ExperimentConfig cfg;

  cfg.panel_path = ini.required("data.panel");
  cfg.groups_path = ini.required("data.groups");
  cfg.standardize = ini.flag("data.standardize", cfg.standardize);
  cfg.risk_free_column = ini.str("data.risk_free_column", "");

  cfg.train_end = ini.date("splits.train_end");
  cfg.calibration_end = ini.date("splits.calibration_end");
  cfg.evaluation_end = ini.date("splits.evaluation_end");

  cfg.horizons.clear();
  for (const auto& h : ini.list("horizons.list")) {
    int v = 0;
    const auto [p, ec] = std::from_chars(h.data(), h.data() + h.size(), v);
    if (ec != std::errc() || p != h.data() + h.size()) {
      throw ParseError(origin + ": bad horizon '" + h + "'");
    }
    cfg.horizons.push_back(v);
  }
  if (cfg.horizons.empty()) cfg.horizons.push_back(1);

  cfg.decouple_discount.delta =
      ini.num("decouple.delta", cfg.decouple_discount.delta);
  cfg.decouple_discount.beta =
      ini.num("decouple.beta", cfg.decouple_discount.beta);
  cfg.decouple_n0 = ini.num("decouple.n0", cfg.decouple_n0);
  cfg.decouple_s0 = ini.num("decouple.s0", cfg.decouple_s0);
  cfg.decouple_intercept =
      ini.flag("decouple.intercept", cfg.decouple_intercept);

  cfg.recouple_discount.delta =
      ini.num("recouple.delta", cfg.recouple_discount.delta);
  cfg.recouple_discount.beta =
      ini.num("recouple.beta", cfg.recouple_discount.beta);
  cfg.recouple_n0 = ini.num("recouple.n0", cfg.recouple_n0);
  cfg.recouple_s0 = ini.num("recouple.s0", cfg.recouple_s0);
  cfg.mcmc_burn = static_cast<int>(ini.integer("recouple.mcmc_burn", cfg.mcmc_burn));
  cfg.mcmc_saved =
      static_cast<int>(ini.integer("recouple.mcmc_saved", cfg.mcmc_saved));
  cfg.refit_every =
      static_cast<int>(ini.integer("recouple.refit_every", cfg.refit_every));
  cfg.predictive_replicates = static_cast<int>(
      ini.integer("recouple.predictive_replicates", cfg.predictive_replicates));
  cfg.dump_draws = ini.flag("recouple.dump_draws", cfg.dump_draws);

  cfg.with_historical_average =
      ini.flag("baselines.historical_average", cfg.with_historical_average);
  cfg.with_equal_weight =
      ini.flag("baselines.equal_weight", cfg.with_equal_weight);
  cfg.with_bma = ini.flag("baselines.bma", cfg.with_bma);
  cfg.with_lasso = ini.flag("baselines.lasso", cfg.with_lasso);
  cfg.with_pca = ini.flag("baselines.pca", cfg.with_pca);
  cfg.with_full_dlm = ini.flag("baselines.full_dlm", cfg.with_full_dlm);
  cfg.lasso_grid_size =
      static_cast<int>(ini.integer("baselines.lasso_grid_size", cfg.lasso_grid_size));
  cfg.lasso_grid_decades =
      ini.num("baselines.lasso_grid_decades", cfg.lasso_grid_decades);
  cfg.pca_factors =
      static_cast<int>(ini.integer("baselines.pca_factors", cfg.pca_factors));

  cfg.portfolio_enabled = ini.flag("portfolio.enabled", cfg.portfolio_enabled);
  cfg.allocation.gamma = ini.num("portfolio.gamma", cfg.allocation.gamma);
  cfg.allocation.lower = ini.num("portfolio.lower", cfg.allocation.lower);
  cfg.allocation.upper = ini.num("portfolio.upper", cfg.allocation.upper);
  cfg.allocation.step = ini.num("portfolio.step", cfg.allocation.step);

  cfg.seed = static_cast<std::uint64_t>(ini.integer("run.seed", 42));
  cfg.out_dir = ini.str("run.out", cfg.out_dir);
  cfg.threads = static_cast<int>(ini.integer("run.threads", cfg.threads));
  cfg.models = ini.list("run.models");

  ini.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  ExperimentConfig cfg = parse_config(in, path);
  // Data files named by a config are relative to the config itself, so a
  // generated bundle stays self-contained wherever it is unpacked.
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  for (std::string* p : {&cfg.panel_path, &cfg.groups_path}) {
    if (!p->empty() && !std::filesystem::path(*p).is_absolute()) {
      *p = (parent / *p).string();
    }
  }
  return cfg;
}

void ExperimentConfig::validate() const {
  if (panel_path.empty() || groups_path.empty()) {
    throw ValidationError("config must name panel and groups files");
  }
  if (!(train_end < calibration_end) || !(calibration_end < evaluation_end)) {
    throw ValidationError(
        "splits must satisfy train_end < calibration_end < evaluation_end");
  }
  std::set<int> seen;
  for (const int k : horizons) {
    if (k < 1) throw ValidationError("horizons must be >= 1");
    if (!seen.insert(k).second) {
      throw ValidationError("duplicate horizon " + std::to_string(k));
    }
  }
  try {
    decouple_discount.validate();
    recouple_discount.validate();
  } catch (const InvalidArgumentError& e) {
    throw ValidationError(e.what());
  }
  if (!(decouple_n0 > 0.0) || !(decouple_s0 > 0.0) || !(recouple_n0 > 0.0) ||
      !(recouple_s0 > 0.0)) {
    throw ValidationError("prior n0 and s0 must be positive");
  }
  if (mcmc_burn < 0 || mcmc_saved < 1) {
    throw ValidationError("mcmc sizes must satisfy burn >= 0, saved >= 1");
  }
  if (refit_every < 1) throw ValidationError("refit_every must be >= 1");
  if (predictive_replicates < 1) {
    throw ValidationError("predictive_replicates must be >= 1");
  }
  if (lasso_grid_size < 2 || lasso_grid_decades <= 0.0) {
    throw ValidationError("lasso grid needs size >= 2, decades > 0");
  }
  if (pca_factors < 1) throw ValidationError("pca_factors must be >= 1");
  if (portfolio_enabled) {
    try {
      allocation.validate();
    } catch (const InvalidArgumentError& e) {
      throw ValidationError(e.what());
    }
  }
  if (threads < 0) throw ValidationError("threads must be >= 0");
}

}  // namespace drs::run
