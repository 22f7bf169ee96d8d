#include "drs.h"

#include <charconv>
#include <memory>
#include <sstream>
#include <string>

#include "drs/errors.hpp"
#include "drs/experiment.hpp"
#include "drs/synthdata.hpp"

struct drs_experiment {
  drs::run::ExperimentConfig config;
  std::vector<std::string> warnings;
};

namespace {

thread_local std::string g_last_error;

drs_status status_of(const drs::Error& e) {
  switch (e.code()) {
    case drs::ErrorCode::invalid_argument:
      return DRS_ERR_INVALID_ARGUMENT;
    case drs::ErrorCode::io:
      return DRS_ERR_IO;
    case drs::ErrorCode::parse:
      return DRS_ERR_PARSE;
    case drs::ErrorCode::validation:
      return DRS_ERR_VALIDATION;
    case drs::ErrorCode::numeric:
      return DRS_ERR_NUMERIC;
    default:
      return DRS_ERR_INTERNAL;
  }
}

template <typename Fn>
drs_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return DRS_OK;
  } catch (const drs::Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DRS_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return DRS_ERR_INTERNAL;
  }
}

drs_status require(bool ok, const char* message) {
  if (ok) return DRS_OK;
  g_last_error = message;
  return DRS_ERR_INVALID_ARGUMENT;
}

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

extern "C" {

const char* drs_version(void) { return "1.0.0"; }

const char* drs_last_error(void) { return g_last_error.c_str(); }

drs_status drs_experiment_create(const char* config_path,
                                 drs_experiment** out) {
  if (const drs_status st =
          require(out != nullptr, "output handle pointer is NULL");
      st != DRS_OK) {
    return st;
  }
  *out = nullptr;
  if (const drs_status st =
          require(config_path != nullptr, "config path is NULL");
      st != DRS_OK) {
    return st;
  }
  return guarded([&] {
    auto handle = std::make_unique<drs_experiment>();
    handle->config = drs::run::load_config(config_path);
    *out = handle.release();
  });
}

void drs_experiment_destroy(drs_experiment* exp) { delete exp; }

drs_status drs_experiment_set_seed(drs_experiment* exp, uint64_t seed) {
  if (const drs_status st = require(exp != nullptr, "experiment handle is NULL");
      st != DRS_OK) {
    return st;
  }
  exp->config.seed = seed;
  g_last_error.clear();
  return DRS_OK;
}

drs_status drs_experiment_set_output_dir(drs_experiment* exp,
                                         const char* out_dir) {
  if (const drs_status st =
          require(exp != nullptr && out_dir != nullptr && *out_dir != '\0',
                  "experiment handle and output dir must be non-NULL");
      st != DRS_OK) {
    return st;
  }
  exp->config.out_dir = out_dir;
  g_last_error.clear();
  return DRS_OK;
}

drs_status drs_experiment_set_threads(drs_experiment* exp, int threads) {
  if (const drs_status st =
          require(exp != nullptr && threads >= 0,
                  "experiment handle must be non-NULL and threads >= 0");
      st != DRS_OK) {
    return st;
  }
  exp->config.threads = threads;
  g_last_error.clear();
  return DRS_OK;
}

drs_status drs_experiment_select_models(drs_experiment* exp, const char* csv) {
  if (const drs_status st =
          require(exp != nullptr && csv != nullptr,
                  "experiment handle and model list must be non-NULL");
      st != DRS_OK) {
    return st;
  }
  exp->config.models = split_csv(csv);
  g_last_error.clear();
  return DRS_OK;
}

drs_status drs_experiment_select_horizons(drs_experiment* exp,
                                          const char* csv) {
  if (const drs_status st =
          require(exp != nullptr && csv != nullptr,
                  "experiment handle and horizon list must be non-NULL");
      st != DRS_OK) {
    return st;
  }
  return guarded([&] {
    std::vector<int> horizons;
    for (const auto& item : split_csv(csv)) {
      int v = 0;
      const auto [p, ec] =
          std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc() || p != item.data() + item.size() || v < 1) {
        throw drs::InvalidArgumentError("bad horizon '" + item + "'");
      }
      horizons.push_back(v);
    }
    if (horizons.empty()) {
      throw drs::InvalidArgumentError("horizon list is empty");
    }
    exp->config.horizons = std::move(horizons);
    exp->config.validate();
  });
}

drs_status drs_experiment_run(drs_experiment* exp, int* n_files) {
  if (const drs_status st = require(exp != nullptr, "experiment handle is NULL");
      st != DRS_OK) {
    return st;
  }
  return guarded([&] {
    const drs::run::ExperimentResult result =
        drs::run::run_experiment(exp->config);
    const std::vector<std::string> files =
        drs::run::emit_reports(result, exp->config.out_dir);
    exp->warnings = result.warnings;
    if (n_files != nullptr) *n_files = static_cast<int>(files.size());
  });
}

int drs_experiment_warning_count(const drs_experiment* exp) {
  return exp == nullptr ? 0 : static_cast<int>(exp->warnings.size());
}

const char* drs_experiment_warning(const drs_experiment* exp, int i) {
  if (exp == nullptr || i < 0 ||
      i >= static_cast<int>(exp->warnings.size())) {
    return "";
  }
  return exp->warnings[static_cast<std::size_t>(i)].c_str();
}

drs_status drs_generate_panel(const char* preset, const char* out_dir,
                              uint64_t seed) {
  if (const drs_status st =
          require(preset != nullptr && out_dir != nullptr,
                  "preset and output dir must be non-NULL");
      st != DRS_OK) {
    return st;
  }
  return guarded([&] { drs::synth::generate(preset, out_dir, seed); });
}

}  // extern "C"
