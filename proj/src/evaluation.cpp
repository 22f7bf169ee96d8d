#include "drs/evaluation.hpp"

#include <cmath>

namespace drs::eval {

double rmsfe(const std::vector<ForecastRecord>& records) {
  if (records.empty()) throw InvalidArgumentError("rmsfe over no records");
  double acc = 0.0;
  for (const auto& r : records) {
    if (!std::isfinite(r.point) || !std::isfinite(r.realized)) {
      throw NumericError("non-finite forecast record at " +
                         r.target_date.str());
    }
    const double e = r.realized - r.point;
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(records.size()));
}

std::vector<double> lpdr_series(const std::vector<ForecastRecord>& model,
                                const std::vector<ForecastRecord>& reference) {
  if (model.empty() || model.size() != reference.size()) {
    throw InvalidArgumentError("LPDR inputs must be non-empty and aligned");
  }
  std::vector<double> out(model.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < model.size(); ++t) {
    if (model[t].target_date != reference[t].target_date) {
      throw InvalidArgumentError("LPDR date misalignment at position " +
                                 std::to_string(t) + ": " +
                                 model[t].target_date.str() + " vs " +
                                 reference[t].target_date.str());
    }
    if (!std::isfinite(model[t].log_density) ||
        !std::isfinite(reference[t].log_density)) {
      throw NumericError("non-finite log score at " +
                         model[t].target_date.str());
    }
    acc += model[t].log_density - reference[t].log_density;
    out[t] = acc;
  }
  return out;
}

double mc_r2_full(const Eigen::MatrixXd& draws, int target) {
  const int n = static_cast<int>(draws.rows());
  const int j_all = static_cast<int>(draws.cols());
  if (target < 0 || target >= j_all) {
    throw InvalidArgumentError("R2 target column outside the draw matrix");
  }
  if (n < 3 || j_all < 2) {
    throw InvalidArgumentError("R2 needs >= 3 draws and >= 2 columns");
  }
  const Eigen::VectorXd y = draws.col(target);
  const double y_mean = y.mean();
  const double tss = (y.array() - y_mean).square().sum();
  if (tss <= 1e-12 * static_cast<double>(n)) return 0.0;

  Eigen::MatrixXd x(n, j_all);  // intercept plus the other columns
  x.col(0).setOnes();
  int k = 1;
  for (int j = 0; j < j_all; ++j) {
    if (j == target) continue;
    x.col(k++) = draws.col(j);
  }
  const Eigen::VectorXd beta =
      x.colPivHouseholderQr().solve(y);
  const double rss = (y - x * beta).squaredNorm();
  const double r2 = 1.0 - rss / tss;
  return std::max(0.0, std::min(1.0, r2));
}

double mc_r2_pairwise(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size() || a.size() < 3) {
    throw InvalidArgumentError("pairwise R2 needs aligned vectors, >= 3 draws");
  }
  const double ma = a.mean();
  const double mb = b.mean();
  const double va = (a.array() - ma).square().sum();
  const double vb = (b.array() - mb).square().sum();
  if (va <= 1e-12 * a.size() || vb <= 1e-12 * a.size()) return 0.0;
  const double cov = ((a.array() - ma) * (b.array() - mb)).sum();
  const double r2 = cov * cov / (va * vb);
  return std::min(1.0, r2);
}

}  // namespace drs::eval
