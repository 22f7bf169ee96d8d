#include "drs/portfolio.hpp"

#include <cmath>
#include <limits>

namespace drs::portfolio {

namespace {

// x^e for possibly negative integer-valued e; falls back to std::pow when the
// exponent is not an integer. The grid search calls this per (weight, draw),
// so the integer fast path matters.
double real_pow(double x, double e) {
  const double r = std::nearbyint(e);
  if (r == e && std::abs(r) <= 64.0) {
    double acc = 1.0;
    double base = x;
    long k = static_cast<long>(std::abs(r));
    while (k > 0) {
      if (k & 1) acc *= base;
      base *= base;
      k >>= 1;
    }
    return r < 0.0 ? 1.0 / acc : acc;
  }
  return std::pow(x, e);
}

}  // namespace

void AllocationConfig::validate() const {
  if (!(gamma > 0.0) || gamma == 1.0) {
    throw InvalidArgumentError("risk aversion must be > 0 and != 1");
  }
  if (!(step > 0.0) || !(upper > lower)) {
    throw InvalidArgumentError("weight grid needs upper > lower and step > 0");
  }
  if (grid_size() > 1000000) {
    throw InvalidArgumentError("weight grid is implausibly fine");
  }
}

int AllocationConfig::grid_size() const {
  return static_cast<int>(std::floor((upper - lower) / step + 1e-9)) + 1;
}

double AllocationConfig::grid_point(int i) const { return lower + i * step; }

double gross_return(double weight, double y, double r_f) {
  return (1.0 - weight) * std::exp(r_f) + weight * std::exp(r_f + y);
}

double power_utility(double weight, double y, double r_f, double gamma) {
  const double g = gross_return(weight, y, r_f);
  if (!(g > 0.0)) {
    throw NumericError("non-positive gross return in power utility");
  }
  return real_pow(g, 1.0 - gamma) / (1.0 - gamma);
}

double optimal_weight(const Eigen::VectorXd& y_draws, double r_f,
                      const AllocationConfig& config) {
  config.validate();
  const int n = static_cast<int>(y_draws.size());
  if (n < 1) throw InvalidArgumentError("no predictive draws supplied");
  if (!y_draws.allFinite() || !std::isfinite(r_f)) {
    throw NumericError("non-finite inputs to the weight search");
  }
  const double safe = std::exp(r_f);
  Eigen::VectorXd risky(n);
  for (int i = 0; i < n; ++i) risky[i] = std::exp(r_f + y_draws[i]);

  const double exponent = 1.0 - config.gamma;
  double best_u = -std::numeric_limits<double>::infinity();
  double best_w = 0.0;
  bool found = false;
  for (int i = 0; i < config.grid_size(); ++i) {
    const double w = config.grid_point(i);
    double acc = 0.0;
    bool feasible = true;
    for (int d = 0; d < n; ++d) {
      const double g = (1.0 - w) * safe + w * risky[d];
      if (!(g > 0.0)) {
        feasible = false;
        break;
      }
      acc += real_pow(g, exponent);
    }
    if (!feasible) continue;
    const double u = acc / (n * exponent);
    if (!found || u > best_u ||
        (u == best_u && std::abs(w) < std::abs(best_w))) {
      best_u = u;
      best_w = w;
      found = true;
    }
  }
  if (!found) {
    throw NumericError("every weight on the grid is infeasible");
  }
  return best_w;
}

WealthPath realized_utility_series(const std::vector<data::MonthDate>& dates,
                                   const std::vector<double>& weights,
                                   const std::vector<double>& realized_y,
                                   const std::vector<double>& r_f,
                                   double gamma) {
  const std::size_t n = dates.size();
  if (n == 0 || weights.size() != n || realized_y.size() != n ||
      r_f.size() != n) {
    throw InvalidArgumentError("wealth path inputs must align and be non-empty");
  }
  WealthPath path;
  path.dates = dates;
  path.weights = weights;
  path.wealth.resize(n);
  path.utility.resize(n);
  double wealth = 1.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double g = gross_return(weights[t], realized_y[t], r_f[t]);
    wealth *= g;
    if (!(wealth > 0.0) || !std::isfinite(wealth)) {
      throw NumericError("non-positive wealth at " + dates[t].str());
    }
    path.wealth[t] = wealth;
    path.utility[t] = power_utility(weights[t], realized_y[t], r_f[t], gamma);
  }
  return path;
}

namespace {

void check_utility_pair(const std::vector<double>& a,
                        const std::vector<double>& b) {
  if (a.empty() || a.size() != b.size()) {
    throw InvalidArgumentError("utility series must align and be non-empty");
  }
}

double cer_ratio(double u_model, double u_reference, double gamma) {
  if (u_reference == 0.0) {
    throw NumericError("reference utility is zero in a CER ratio");
  }
  const double ratio = u_model / u_reference;
  if (!(ratio > 0.0) || !std::isfinite(ratio)) {
    throw NumericError("utility ratio is not positive in a CER ratio");
  }
  return real_pow(ratio, 1.0 / (1.0 - gamma)) - 1.0;
}

}  // namespace

double cer_aggregate(const std::vector<double>& utility_model,
                     const std::vector<double>& utility_reference,
                     double gamma) {
  check_utility_pair(utility_model, utility_reference);
  double um = 0.0, ur = 0.0;
  for (std::size_t t = 0; t < utility_model.size(); ++t) {
    um += utility_model[t];
    ur += utility_reference[t];
  }
  return cer_ratio(um, ur, gamma);
}

std::vector<double> cer_single_period(
    const std::vector<double>& utility_model,
    const std::vector<double>& utility_reference, double gamma) {
  check_utility_pair(utility_model, utility_reference);
  std::vector<double> out(utility_model.size());
  for (std::size_t t = 0; t < utility_model.size(); ++t) {
    out[t] = cer_ratio(utility_model[t], utility_reference[t], gamma);
  }
  return out;
}

std::vector<double> ccer_series(const std::vector<double>& single_period_cer,
                                const std::vector<data::MonthDate>& dates) {
  if (single_period_cer.empty() ||
      single_period_cer.size() != dates.size()) {
    throw InvalidArgumentError("CCER inputs must align and be non-empty");
  }
  std::vector<double> out(single_period_cer.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < single_period_cer.size(); ++t) {
    if (single_period_cer[t] <= -1.0) {
      throw NumericError("single-period CER at " + dates[t].str() +
                         " is <= -1; compounding is undefined");
    }
    acc += std::log1p(single_period_cer[t]);
    out[t] = acc;
  }
  return out;
}

}  // namespace drs::portfolio
