#pragma once

// Isoprobabilistic transformations between physical space X and standard
// normal space U: Nataf forward/inverse and standalone correlate/decorrelate.
//
// The Gaussian-space correlation rho_Z is found per pair by a bracketed Brent
// solve (tolerance 1e-6) of E[F_i^-1(Phi(Z_i)) F_j^-1(Phi(Z_j))] against the
// requested physical correlation, with the expectation evaluated by 32-point
// tensorized Gauss-Hermite quadrature. Marginal means/variances entering the
// correlation use the same quadrature so the solve is bias-consistent.

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

#include "uq/copula.hpp"
#include "uq/distributions.hpp"
#include "uq/errors.hpp"
#include "uq/math/brent.hpp"
#include "uq/math/quadrature.hpp"
#include "uq/math/special.hpp"

namespace uq {

/// Symmetric, unit-diagonal, positive definite matrix.
class CorrelationMatrix {
 public:
  static CorrelationMatrix identity(int d) {
    CorrelationMatrix c;
    c.m_ = Eigen::MatrixXd::Identity(d, d);
    return c;
  }

  static CorrelationMatrix from(const Eigen::MatrixXd& m) {
    const auto d = m.rows();
    if (d < 1 || m.cols() != d)
      throw invalid_argument_error("correlation matrix: must be square");
    if (!m.isApprox(m.transpose(), 1e-12))
      throw invalid_argument_error("correlation matrix: must be symmetric");
    for (Eigen::Index i = 0; i < d; ++i)
      if (std::abs(m(i, i) - 1.0) > 1e-12)
        throw invalid_argument_error("correlation matrix: diagonal must be 1");
    if (Eigen::LLT<Eigen::MatrixXd>(m).info() != Eigen::Success)
      throw invalid_argument_error(
          "correlation matrix: must be positive definite");
    CorrelationMatrix c;
    c.m_ = m;
    return c;
  }

  const Eigen::MatrixXd& matrix() const { return m_; }
  int dimension() const { return static_cast<int>(m_.rows()); }
  bool is_identity() const {
    return m_.isApprox(Eigen::MatrixXd::Identity(m_.rows(), m_.cols()), 1e-15);
  }

 private:
  CorrelationMatrix() = default;
  Eigen::MatrixXd m_;
};

namespace detail {

// Clip eigenvalues at 1e-10 and rescale to unit diagonal; pairwise Nataf
// solves need not be jointly positive definite.
inline Eigen::MatrixXd repair_positive_definite(Eigen::MatrixXd a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  Eigen::VectorXd ev = es.eigenvalues();
  bool repaired = false;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) < 1e-10) {
      ev(i) = 1e-10;
      repaired = true;
    }
  if (!repaired) return a;
  a = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  Eigen::VectorXd scale = a.diagonal().array().sqrt().inverse();
  a = scale.asDiagonal() * a * scale.asDiagonal();
  a = 0.5 * (a + a.transpose());
  a.diagonal().setOnes();
  return a;
}

}  // namespace detail

/// Gaussian-space correlation matrix reproducing rho_x for the given
/// continuous marginals under the Nataf (Gaussian copula) model.
inline Eigen::MatrixXd distort_correlation(
    const std::vector<Distribution>& marginals,
    const CorrelationMatrix& rho_x, int quad_points = 32) {
  const int d = static_cast<int>(marginals.size());
  if (rho_x.dimension() != d)
    throw invalid_argument_error("distort_correlation: dimension mismatch");
  for (const auto& m : marginals)
    if (m.discrete())
      throw invalid_argument_error(
          "distort_correlation: marginals must be continuous");

  const auto rule = math::gauss_hermite_probabilists(quad_points);
  const int q = static_cast<int>(rule.nodes.size());

  // Marginal values at the quadrature nodes, with quadrature-consistent
  // means and standard deviations.
  Eigen::MatrixXd node_vals(d, q);
  Eigen::VectorXd mu(d), sigma(d);
  for (int i = 0; i < d; ++i) {
    for (int a = 0; a < q; ++a)
      node_vals(i, a) = marginals[static_cast<std::size_t>(i)].icdf(
          clamp_unit(math::standard_normal_cdf(rule.nodes(a))));
    mu(i) = (node_vals.row(i).transpose().array() * rule.weights.array()).sum();
    const double var =
        ((node_vals.row(i).transpose().array() - mu(i)).square() *
         rule.weights.array())
            .sum();
    if (!(var > 0.0))
      throw numerical_error("distort_correlation: marginal has zero variance");
    sigma(i) = std::sqrt(var);
  }

  Eigen::MatrixXd rho_z = Eigen::MatrixXd::Identity(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      const double target = rho_x.matrix()(i, j);
      if (target == 0.0) continue;
      const auto& mi = marginals[static_cast<std::size_t>(i)];
      const auto& mj = marginals[static_cast<std::size_t>(j)];
      if (mi.family() == Family::normal && mj.family() == Family::normal) {
        rho_z(i, j) = rho_z(j, i) = target;  // Nataf is the identity here
        continue;
      }
      const auto pair_corr = [&](double rho) {
        double e_xy = 0.0;
        const double root = std::sqrt(std::max(0.0, 1.0 - rho * rho));
        for (int a = 0; a < q; ++a) {
          const double zi = rule.nodes(a);
          const double gi = node_vals(i, a);
          double inner = 0.0;
          for (int b = 0; b < q; ++b) {
            const double zj = rho * zi + root * rule.nodes(b);
            inner += rule.weights(b) *
                     mj.icdf(clamp_unit(math::standard_normal_cdf(zj)));
          }
          e_xy += rule.weights(a) * gi * inner;
        }
        return (e_xy - mu(i) * mu(j)) / (sigma(i) * sigma(j));
      };
      const double lo = -0.9999, hi = 0.9999;
      const double flo = pair_corr(lo) - target;
      const double fhi = pair_corr(hi) - target;
      if ((flo > 0.0) == (fhi > 0.0)) {
        std::ostringstream os;
        os << "distort_correlation: no rho_Z in (-1,1) reproduces rho_X="
           << target << " for marginal pair (" << i << ", " << j << ")";
        throw infeasible_correlation_error(os.str());
      }
      const double solved = math::brent_root(
          [&](double rho) { return pair_corr(rho) - target; }, lo, hi, 1e-6);
      rho_z(i, j) = rho_z(j, i) = solved;
    }
  }

  if (Eigen::LLT<Eigen::MatrixXd>(rho_z).info() != Eigen::Success)
    rho_z = detail::repair_positive_definite(rho_z);
  return rho_z;
}

/// z = u L^T rowwise, imposing rho_Z = L L^T on uncorrelated standard normals.
inline Eigen::MatrixXd correlate(const Eigen::MatrixXd& u,
                                 const CorrelationMatrix& rho_z) {
  if (u.cols() != rho_z.dimension())
    throw invalid_argument_error("correlate: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(rho_z.matrix());
  if (llt.info() != Eigen::Success)
    throw numerical_error("correlate: factorization failed");
  return u * Eigen::MatrixXd(llt.matrixL()).transpose();
}

/// Inverse of correlate: recovers u from z.
inline Eigen::MatrixXd decorrelate(const Eigen::MatrixXd& z,
                                   const CorrelationMatrix& rho_z) {
  if (z.cols() != rho_z.dimension())
    throw invalid_argument_error("decorrelate: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(rho_z.matrix());
  if (llt.info() != Eigen::Success)
    throw numerical_error("decorrelate: factorization failed");
  const Eigen::MatrixXd l = llt.matrixL();
  return l.triangularView<Eigen::Lower>()
      .solve(z.transpose())
      .transpose();
}

class NatafTransform {
 public:
  NatafTransform(std::vector<Distribution> marginals,
                 const CorrelationMatrix& rho_x)
      : marginals_(std::move(marginals)), rho_x_(rho_x.matrix()) {
    if (static_cast<int>(marginals_.size()) != rho_x.dimension())
      throw invalid_argument_error("nataf: dimension mismatch");
    rho_z_ = rho_x.is_identity()
                 ? rho_x.matrix()
                 : distort_correlation(marginals_, rho_x);
    Eigen::LLT<Eigen::MatrixXd> llt(rho_z_);
    if (llt.info() != Eigen::Success)
      throw numerical_error("nataf: rho_Z factorization failed");
    chol_l_ = llt.matrixL();
  }

  static NatafTransform independent(std::vector<Distribution> marginals) {
    const int d = static_cast<int>(marginals.size());
    return NatafTransform(std::move(marginals), CorrelationMatrix::identity(d));
  }

  int dimension() const { return static_cast<int>(marginals_.size()); }
  const std::vector<Distribution>& marginals() const { return marginals_; }
  const Eigen::MatrixXd& rho_x() const { return rho_x_; }
  const Eigen::MatrixXd& rho_z() const { return rho_z_; }
  const Eigen::MatrixXd& chol_l() const { return chol_l_; }

  /// X -> U: z_i = Phi^-1(F_i(x_i)) componentwise, then u = L^-1 z rowwise.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const {
    check_cols(x);
    Eigen::MatrixXd z(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      for (int i = 0; i < dimension(); ++i) {
        const auto& m = marginals_[static_cast<std::size_t>(i)];
        if (x(r, i) < m.support_lo() || x(r, i) > m.support_hi()) {
          std::ostringstream os;
          os << "nataf_forward: sample " << r << " component " << i
             << " outside the support of " << m.name();
          throw domain_error(os.str());
        }
        z(r, i) = math::standard_normal_icdf(clamp_unit(m.cdf(x(r, i))));
      }
    }
    return chol_l_.triangularView<Eigen::Lower>()
        .solve(z.transpose())
        .transpose();
  }

  /// U -> X: z = L u, x_i = F_i^-1(Phi(z_i)); Phi output clamped to (0,1).
  Eigen::MatrixXd inverse(const Eigen::MatrixXd& u) const {
    check_cols(u);
    const Eigen::MatrixXd z = u * chol_l_.transpose();
    Eigen::MatrixXd x(u.rows(), u.cols());
    for (Eigen::Index r = 0; r < u.rows(); ++r)
      for (int i = 0; i < dimension(); ++i)
        x(r, i) = marginals_[static_cast<std::size_t>(i)].icdf(
            clamp_unit(math::standard_normal_cdf(z(r, i))));
    return x;
  }

  Eigen::VectorXd inverse_row(const Eigen::VectorXd& u) const {
    return inverse(Eigen::MatrixXd(u.transpose())).row(0);
  }

 private:
  void check_cols(const Eigen::MatrixXd& m) const {
    if (m.cols() != dimension())
      throw invalid_argument_error("nataf: sample dimension mismatch");
  }

  std::vector<Distribution> marginals_;
  Eigen::MatrixXd rho_x_;
  Eigen::MatrixXd rho_z_;
  Eigen::MatrixXd chol_l_;
};

}  // namespace uq
