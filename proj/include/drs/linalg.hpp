#pragma once

#include <Eigen/Dense>

#include "drs/errors.hpp"

namespace drs {

// Symmetric PSD square root via eigendecomposition. Unlike a Cholesky factor
// this commutes with coordinate permutations, so samplers built on it stay
// exactly equivariant when inputs are reordered. Eigenvalues below a small
// negative roundoff floor raise; values in [-floor, 0) clamp to 0.
inline Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) {
    throw InvalidArgumentError("sym_sqrt requires a square matrix");
  }
  const Eigen::MatrixXd sym = (a + a.transpose()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw NumericError("eigendecomposition failed in sym_sqrt");
  }
  Eigen::VectorXd lam = eig.eigenvalues();
  const double scale = lam.cwiseAbs().maxCoeff();
  const double floor = -1e-10 * std::max(scale, 1.0);
  for (int i = 0; i < lam.size(); ++i) {
    if (lam[i] < floor) {
      throw NumericError("sym_sqrt input is not positive semidefinite");
    }
    lam[i] = lam[i] > 0.0 ? std::sqrt(lam[i]) : 0.0;
  }
  return eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace drs
