#pragma once

// Copulas coupling univariate marginals: Gaussian (any dimension) and
// bivariate Clayton. Inputs on the unit hypercube are clamped to
// [1e-12, 1 - 1e-12] before evaluation so Phi^-1 stays finite.

#include <Eigen/Dense>
#include <cmath>

#include "uq/errors.hpp"
#include "uq/math/special.hpp"
#include "uq/random.hpp"

namespace uq {

enum class CopulaKind { gaussian, clayton };

inline double clamp_unit(double u) {
  constexpr double eps = 1e-12;
  return std::min(1.0 - eps, std::max(eps, u));
}

class Copula {
 public:
  static Copula gaussian(const Eigen::MatrixXd& corr) {
    const auto d = corr.rows();
    if (d < 2 || corr.cols() != d)
      throw invalid_argument_error("gaussian copula: matrix must be d x d, d >= 2");
    if (!corr.isApprox(corr.transpose(), 1e-12))
      throw invalid_argument_error("gaussian copula: matrix must be symmetric");
    for (Eigen::Index i = 0; i < d; ++i)
      if (std::abs(corr(i, i) - 1.0) > 1e-12)
        throw invalid_argument_error("gaussian copula: diagonal must be 1");
    Eigen::LLT<Eigen::MatrixXd> llt(corr);
    if (llt.info() != Eigen::Success)
      throw invalid_argument_error(
          "gaussian copula: matrix must be positive definite");
    Copula c(CopulaKind::gaussian, static_cast<int>(d));
    c.corr_ = corr;
    c.chol_ = llt.matrixL();
    return c;
  }

  static Copula clayton(double theta) {
    if (!(theta > 0.0))
      throw invalid_argument_error("clayton copula: theta must be > 0");
    Copula c(CopulaKind::clayton, 2);
    c.theta_ = theta;
    return c;
  }

  CopulaKind kind() const { return kind_; }
  int dimension() const { return dim_; }
  double theta() const { return theta_; }
  const Eigen::MatrixXd& correlation() const { return corr_; }

  double cdf(Eigen::VectorXd u) const {
    check_dim(u);
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = clamp_unit(u(i));
    if (kind_ == CopulaKind::clayton) {
      const double s =
          std::pow(u(0), -theta_) + std::pow(u(1), -theta_) - 1.0;
      return std::pow(s, -1.0 / theta_);
    }
    if (dim_ != 2)
      throw numerical_error("gaussian copula cdf: implemented for d=2 only");
    return math::bivariate_normal_cdf(math::standard_normal_icdf(u(0)),
                                      math::standard_normal_icdf(u(1)),
                                      corr_(0, 1));
  }

  double log_pdf(Eigen::VectorXd u) const {
    check_dim(u);
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = clamp_unit(u(i));
    if (kind_ == CopulaKind::clayton) {
      const double lu = std::log(u(0));
      const double lv = std::log(u(1));
      const double s = std::exp(-theta_ * lu) + std::exp(-theta_ * lv) - 1.0;
      return std::log1p(theta_) - (theta_ + 1.0) * (lu + lv) -
             (2.0 + 1.0 / theta_) * std::log(s);
    }
    Eigen::VectorXd z(dim_);
    for (int i = 0; i < dim_; ++i) z(i) = math::standard_normal_icdf(u(i));
    const Eigen::VectorXd w = chol_.triangularView<Eigen::Lower>().solve(z);
    double log_det = 0.0;
    for (int i = 0; i < dim_; ++i) log_det += 2.0 * std::log(chol_(i, i));
    // c(u) = |R|^{-1/2} exp(-z' (R^{-1} - I) z / 2)
    return -0.5 * log_det - 0.5 * (w.squaredNorm() - z.squaredNorm());
  }

  double pdf(const Eigen::VectorXd& u) const { return std::exp(log_pdf(u)); }

  /// One point on the unit hypercube with this copula's dependence.
  Eigen::VectorXd sample(RandomStream& rng) const {
    if (kind_ == CopulaKind::gaussian) {
      Eigen::VectorXd eta(dim_);
      for (int i = 0; i < dim_; ++i) eta(i) = rng.normal();
      const Eigen::VectorXd z = chol_ * eta;
      Eigen::VectorXd u(dim_);
      for (int i = 0; i < dim_; ++i) u(i) = math::standard_normal_cdf(z(i));
      return u;
    }
    // Clayton by conditional inversion
    const double u1 = rng.uniform01_open();
    const double w = rng.uniform01_open();
    const double v = std::pow(
        (std::pow(w, -theta_ / (1.0 + theta_)) - 1.0) * std::pow(u1, -theta_) +
            1.0,
        -1.0 / theta_);
    Eigen::VectorXd u(2);
    u << u1, v;
    return u;
  }

 private:
  Copula(CopulaKind k, int d) : kind_(k), dim_(d) {}

  void check_dim(const Eigen::VectorXd& u) const {
    if (u.size() != dim_)
      throw invalid_argument_error("copula: point dimension mismatch");
  }

  CopulaKind kind_;
  int dim_;
  double theta_ = 0.0;
  Eigen::MatrixXd corr_;
  Eigen::MatrixXd chol_;
};

}  // namespace uq
