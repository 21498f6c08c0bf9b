#pragma once

// Euclidean covariance kernels with per-dimension lengthscales.
// Scaled distance r = sqrt(sum ((x_i - y_i)/l_i)^2); Matern nu=inf is RBF.

#include <Eigen/Dense>
#include <cmath>

#include "uq/errors.hpp"

namespace uq {

enum class KernelKind { rbf, matern12, matern32, matern52, matern_inf };

inline const char* kernel_name(KernelKind k) {
  switch (k) {
    case KernelKind::rbf: return "rbf";
    case KernelKind::matern12: return "matern12";
    case KernelKind::matern32: return "matern32";
    case KernelKind::matern52: return "matern52";
    case KernelKind::matern_inf: return "matern_inf";
  }
  return "?";
}

struct Kernel {
  KernelKind kind = KernelKind::rbf;
  Eigen::VectorXd lengthscales;
  double signal_variance = 1.0;

  static Kernel make(KernelKind kind, Eigen::VectorXd lengthscales,
                     double signal_variance) {
    if ((lengthscales.array() <= 0.0).any())
      throw invalid_argument_error("kernel: lengthscales must be > 0");
    if (!(signal_variance > 0.0))
      throw invalid_argument_error("kernel: signal variance must be > 0");
    return {kind, std::move(lengthscales), signal_variance};
  }

  static Kernel isotropic(KernelKind kind, int d, double lengthscale,
                          double signal_variance) {
    return make(kind, Eigen::VectorXd::Constant(d, lengthscale),
                signal_variance);
  }

  double operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    const double r2 =
        ((a - b).array() / lengthscales.array()).square().sum();
    switch (kind) {
      case KernelKind::rbf:
      case KernelKind::matern_inf:
        return signal_variance * std::exp(-0.5 * r2);
      case KernelKind::matern12:
        return signal_variance * std::exp(-std::sqrt(r2));
      case KernelKind::matern32: {
        const double t = std::sqrt(3.0 * r2);
        return signal_variance * (1.0 + t) * std::exp(-t);
      }
      case KernelKind::matern52: {
        const double t = std::sqrt(5.0 * r2);
        return signal_variance * (1.0 + t + t * t / 3.0) * std::exp(-t);
      }
    }
    return 0.0;
  }
};

inline Eigen::MatrixXd kernel_gram(const Kernel& k, const Eigen::MatrixXd& x1,
                                   const Eigen::MatrixXd& x2) {
  if (x1.cols() != k.lengthscales.size() || x2.cols() != k.lengthscales.size())
    throw invalid_argument_error("kernel_gram: dimension mismatch");
  Eigen::MatrixXd gram(x1.rows(), x2.rows());
  for (Eigen::Index i = 0; i < x1.rows(); ++i)
    for (Eigen::Index j = 0; j < x2.rows(); ++j)
      gram(i, j) = k(x1.row(i).transpose(), x2.row(j).transpose());
  return gram;
}

}  // namespace uq
