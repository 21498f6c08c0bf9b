#pragma once

// Builtin analytic models used as fixtures by studies and tests.

#include <Eigen/Dense>
#include <cmath>

#include "uq/errors.hpp"
#include "uq/model.hpp"

namespace uq::testfunctions {

/// g(x) = beta - a.x / ||a||; exact reliability index beta for standard
/// normal inputs.
inline ModelSpec linear_limit_state(Eigen::VectorXd a, double beta) {
  const double norm = a.norm();
  if (!(norm > 0.0))
    throw invalid_argument_error("linear_limit_state: direction must be nonzero");
  const int d = static_cast<int>(a.size());
  return ModelSpec::scalar(
      [a = std::move(a), beta, norm](const Eigen::VectorXd& x) {
        return beta - a.dot(x) / norm;
      },
      d);
}

/// g(u) = beta - u1 + curvature * u2^2 on d=2.
inline ModelSpec parabolic_limit_state(double beta, double curvature) {
  return ModelSpec::scalar(
      [beta, curvature](const Eigen::VectorXd& u) {
        return beta - u(0) + curvature * u(1) * u(1);
      },
      2);
}

/// Ishigami function, canonical on Uniform(-pi, pi)^3.
inline ModelSpec ishigami(double a = 7.0, double b = 0.1) {
  return ModelSpec::scalar(
      [a, b](const Eigen::VectorXd& x) {
        return std::sin(x(0)) + a * std::sin(x(1)) * std::sin(x(1)) +
               b * std::pow(x(2), 4) * std::sin(x(0));
      },
      3);
}

/// Analytic Sobol decomposition of Ishigami: S1, S2, S3, ST1, ST2, ST3.
struct IshigamiIndices {
  double s1, s2, s3, st1, st2, st3, variance;
};

inline IshigamiIndices ishigami_indices(double a = 7.0, double b = 0.1) {
  const double pi4 = std::pow(std::numbers::pi, 4);
  const double pi8 = pi4 * pi4;
  const double v1 = 0.5 * std::pow(1.0 + b * pi4 / 5.0, 2);
  const double v2 = a * a / 8.0;
  const double v13 = b * b * pi8 * 8.0 / 225.0;
  const double v = v1 + v2 + v13;
  return {v1 / v, v2 / v, 0.0, (v1 + v13) / v, v2 / v, v13 / v, v};
}

/// Sobol g-function prod_i (|4x_i - 2| + a_i)/(1 + a_i) on Uniform(0,1)^d.
inline ModelSpec sobol_g(Eigen::VectorXd a) {
  const int d = static_cast<int>(a.size());
  if (d < 1) throw invalid_argument_error("sobol_g: needs coefficients");
  return ModelSpec::scalar(
      [a = std::move(a)](const Eigen::VectorXd& x) {
        double v = 1.0;
        for (Eigen::Index i = 0; i < x.size(); ++i)
          v *= (std::abs(4.0 * x(i) - 2.0) + a(i)) / (1.0 + a(i));
        return v;
      },
      d);
}

/// Branin function on [-5,10] x [0,15].
inline ModelSpec branin() {
  return ModelSpec::scalar(
      [](const Eigen::VectorXd& x) {
        constexpr double a = 1.0;
        const double b = 5.1 / (4.0 * std::numbers::pi * std::numbers::pi);
        const double c = 5.0 / std::numbers::pi;
        constexpr double r = 6.0;
        constexpr double s = 10.0;
        const double t = 1.0 / (8.0 * std::numbers::pi);
        const double term = x(1) - b * x(0) * x(0) + c * x(0) - r;
        return a * term * term + s * (1.0 - t) * std::cos(x(0)) + s;
      },
      2);
}

}  // namespace uq::testfunctions
