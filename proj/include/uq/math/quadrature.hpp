#pragma once

// Gaussian quadrature rules via Golub-Welsch on the Jacobi matrix.

#include <Eigen/Dense>
#include <cmath>

#include "uq/errors.hpp"

namespace uq::math {

struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

namespace detail {
inline QuadratureRule golub_welsch(const Eigen::VectorXd& offdiag,
                                   double total_mass) {
  const auto n = offdiag.size() + 1;
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    jacobi(i, i + 1) = offdiag(i);
    jacobi(i + 1, i) = offdiag(i);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  if (es.info() != Eigen::Success)
    throw numerical_error("golub_welsch: eigensolver failed");
  QuadratureRule rule;
  rule.nodes = es.eigenvalues();
  rule.weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    rule.weights(i) = total_mass * v0 * v0;
  }
  return rule;
}
}  // namespace detail

/// Nodes/weights for int f(z) phi(z) dz with phi the standard normal density
/// (probabilists' Gauss-Hermite; weights sum to 1).
inline QuadratureRule gauss_hermite_probabilists(int n) {
  if (n < 1) throw invalid_argument_error("gauss_hermite: n must be >= 1");
  Eigen::VectorXd off(n - 1);
  for (int k = 1; k < n; ++k) off(k - 1) = std::sqrt(static_cast<double>(k));
  return detail::golub_welsch(off, 1.0);
}

/// Nodes/weights for int_{-1}^{1} f(x) dx (weights sum to 2).
inline QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw invalid_argument_error("gauss_legendre: n must be >= 1");
  Eigen::VectorXd off(n - 1);
  for (int k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    off(k - 1) = kk / std::sqrt(4.0 * kk * kk - 1.0);
  }
  return detail::golub_welsch(off, 2.0);
}

}  // namespace uq::math
