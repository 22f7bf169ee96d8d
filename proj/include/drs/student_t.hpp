#pragma once

#include <cmath>
#include <limits>

#include "drs/errors.hpp"
#include "drs/rng.hpp"

namespace drs {

// Student-t predictive density in the squared-scale convention: a draw is
// location + sqrt(scale) * t(dof), so scale multiplies variance, not sd.
// scale == 0 denotes an exact point mass; it is legal as a sampling target
// but has no density.
struct StudentT {
  double dof = 1.0;
  double location = 0.0;
  double scale = 1.0;

  void validate() const {
    if (!std::isfinite(dof) || !(dof > 0.0)) {
      throw InvalidArgumentError("Student-t dof must be finite and > 0");
    }
    if (!std::isfinite(location)) {
      throw InvalidArgumentError("Student-t location must be finite");
    }
    if (!std::isfinite(scale) || scale < 0.0) {
      throw InvalidArgumentError("Student-t scale must be finite and >= 0");
    }
  }

  bool point_mass() const { return scale == 0.0; }

  double log_pdf(double y) const {
    validate();
    if (point_mass()) {
      throw NumericError("log_pdf undefined for a point-mass density");
    }
    const double z2 = (y - location) * (y - location) / scale;
    return std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
           0.5 * std::log(dof * M_PI * scale) -
           0.5 * (dof + 1.0) * std::log1p(z2 / dof);
  }

  double pdf(double y) const { return std::exp(log_pdf(y)); }

  double sample(Rng& rng) const {
    validate();
    if (point_mass()) return location;
    return location + std::sqrt(scale) * rng.student_t(dof);
  }

  // Defined for dof > 1.
  double mean() const {
    if (!(dof > 1.0)) {
      throw NumericError("Student-t mean requires dof > 1");
    }
    return location;
  }

  // Defined for dof > 2.
  double variance() const {
    if (!(dof > 2.0)) {
      throw NumericError("Student-t variance requires dof > 2");
    }
    return scale * dof / (dof - 2.0);
  }
};

}  // namespace drs
