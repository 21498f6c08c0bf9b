#pragma once

// Polynomial chaos expansion: truncated multi-index bases over orthonormal
// Hermite/Legendre families, fit by least squares, ridge, or least-angle
// regression (LARS selects the path point with the smallest leave-one-out
// error of an OLS refit on the active set).
//
// Input standardization (Wiener-Askey matching with a generic fallback):
//   normal(mu,sigma)  -> z = (x-mu)/sigma          with Hermite
//   uniform(a,b)      -> z = 2(x-a)/(b-a) - 1      with Legendre
//   anything else     -> z = Phi^-1(F(x))          with Hermite

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "uq/distributions.hpp"
#include "uq/errors.hpp"
#include "uq/math/special.hpp"
#include "uq/copula.hpp"
#include "uq/polynomials.hpp"

namespace uq {

using MultiIndex = std::vector<int>;

enum class Truncation { tensor_product, total_degree, hyperbolic };

inline const char* truncation_name(Truncation t) {
  switch (t) {
    case Truncation::tensor_product: return "tensor_product";
    case Truncation::total_degree: return "total_degree";
    case Truncation::hyperbolic: return "hyperbolic";
  }
  return "?";
}

namespace detail {

inline void enumerate_bounded(int d, int budget, bool per_dim_cap,
                              MultiIndex& current,
                              std::vector<MultiIndex>& out) {
  if (static_cast<int>(current.size()) == d) {
    out.push_back(current);
    return;
  }
  for (int a = 0; a <= budget; ++a) {
    current.push_back(a);
    enumerate_bounded(d, per_dim_cap ? budget : budget - a, per_dim_cap,
                      current, out);
    current.pop_back();
  }
}

inline void sort_graded_lex(std::vector<MultiIndex>& indices) {
  std::sort(indices.begin(), indices.end(),
            [](const MultiIndex& a, const MultiIndex& b) {
              int ta = 0, tb = 0;
              for (int v : a) ta += v;
              for (int v : b) tb += v;
              if (ta != tb) return ta < tb;
              return a < b;
            });
}

}  // namespace detail

/// Multi-index set for the truncation scheme, in graded lexicographic order.
/// tensor_product: max_i a_i <= p; total_degree: sum a_i <= p;
/// hyperbolic: (sum a_i^q)^(1/q) <= p with q in (0,1].
inline std::vector<MultiIndex> build_multi_indices(Truncation truncation,
                                                   int d, int p,
                                                   double q = 1.0) {
  if (d < 1) throw invalid_argument_error("build_multi_indices: d must be >= 1");
  if (p < 0) throw invalid_argument_error("build_multi_indices: p must be >= 0");
  if (!(q > 0.0 && q <= 1.0))
    throw invalid_argument_error("build_multi_indices: q must lie in (0,1]");
  std::vector<MultiIndex> out;
  MultiIndex scratch;
  if (truncation == Truncation::tensor_product) {
    detail::enumerate_bounded(d, p, true, scratch, out);
  } else {
    detail::enumerate_bounded(d, p, false, scratch, out);  // sum <= p
    if (truncation == Truncation::hyperbolic && q < 1.0) {
      std::vector<MultiIndex> kept;
      for (const auto& idx : out) {
        double s = 0.0;
        for (int a : idx) s += std::pow(static_cast<double>(a), q);
        if (std::pow(s, 1.0 / q) <= static_cast<double>(p) + 1e-9)
          kept.push_back(idx);
      }
      out = std::move(kept);
    }
  }
  detail::sort_graded_lex(out);
  return out;
}

struct PceBasis {
  std::vector<PolynomialFamily> families;  // per dimension
  std::vector<MultiIndex> multi_indices;   // graded lexicographic
  Truncation truncation = Truncation::total_degree;
  int degree = 0;
  double q = 1.0;

  int dimension() const { return static_cast<int>(families.size()); }
  int size() const { return static_cast<int>(multi_indices.size()); }
};

inline PolynomialFamily pce_family_for(const Distribution& marginal) {
  return marginal.family() == Family::uniform ? PolynomialFamily::legendre
                                              : PolynomialFamily::hermite;
}

inline PceBasis build_basis(Truncation truncation, int d, int p, double q = 1.0,
                            std::vector<PolynomialFamily> families = {}) {
  if (families.empty())
    families.assign(static_cast<std::size_t>(d), PolynomialFamily::hermite);
  if (static_cast<int>(families.size()) != d)
    throw invalid_argument_error("build_basis: families length mismatch");
  PceBasis basis;
  basis.families = std::move(families);
  basis.multi_indices = build_multi_indices(truncation, d, p, q);
  basis.truncation = truncation;
  basis.degree = p;
  basis.q = q;
  return basis;
}

/// Basis whose per-dimension families follow the marginals.
inline PceBasis basis_for(const std::vector<Distribution>& marginals,
                          Truncation truncation, int p, double q = 1.0) {
  std::vector<PolynomialFamily> families;
  families.reserve(marginals.size());
  for (const auto& m : marginals) families.push_back(pce_family_for(m));
  return build_basis(truncation, static_cast<int>(marginals.size()), p, q,
                     std::move(families));
}

/// Maps one physical coordinate to its standard variable.
inline double pce_standardize(const Distribution& marginal, double x) {
  switch (marginal.family()) {
    case Family::normal:
      return (x - marginal.param(0)) / marginal.param(1);
    case Family::uniform: {
      const double a = marginal.param(0);
      const double b = marginal.param(1);
      return 2.0 * (x - a) / (b - a) - 1.0;
    }
    default:
      return math::standard_normal_icdf(clamp_unit(marginal.cdf(x)));
  }
}

struct PceModel {
  PceBasis basis;
  Eigen::VectorXd coefficients;          // aligned with basis.multi_indices
  std::vector<Distribution> marginals;   // defines the input transform
  std::optional<double> validation_error;  // relative leave-one-out error

  double mean() const { return coefficients(0); }
  double variance() const {
    return coefficients.tail(coefficients.size() - 1).squaredNorm();
  }
};

/// Design matrix Psi[i,j] = prod_k phi_{alpha_jk}(z_ik) on standardized inputs.
inline Eigen::MatrixXd pce_design_matrix(
    const PceBasis& basis, const std::vector<Distribution>& marginals,
    const Eigen::MatrixXd& x) {
  const int d = basis.dimension();
  if (x.cols() != d || static_cast<int>(marginals.size()) != d)
    throw invalid_argument_error("pce: dimension mismatch");
  Eigen::MatrixXd z(x.rows(), d);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (int j = 0; j < d; ++j)
      z(i, j) = pce_standardize(marginals[static_cast<std::size_t>(j)], x(i, j));
  Eigen::MatrixXd psi(x.rows(), basis.size());
  for (int t = 0; t < basis.size(); ++t) {
    const auto& idx = basis.multi_indices[static_cast<std::size_t>(t)];
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      double v = 1.0;
      for (int j = 0; j < d; ++j)
        if (idx[static_cast<std::size_t>(j)] > 0)
          v *= polynomial_eval(basis.families[static_cast<std::size_t>(j)],
                               idx[static_cast<std::size_t>(j)], z(i, j));
      psi(i, t) = v;
    }
  }
  return psi;
}

enum class PceRegressor { least_squares, ridge, lars };

inline const char* pce_regressor_name(PceRegressor r) {
  switch (r) {
    case PceRegressor::least_squares: return "least_squares";
    case PceRegressor::ridge: return "ridge";
    case PceRegressor::lars: return "lars";
  }
  return "?";
}

struct PceFitOptions {
  PceRegressor regressor = PceRegressor::least_squares;
  double ridge_lambda = 1e-6;
  int lars_max_terms = -1;  // -1: full path (bounded by n-2 and basis size)
};

namespace detail {

// Relative leave-one-out error of an OLS fit via the hat-matrix identity,
// for the design columns listed in `cols` (always including column 0).
struct OlsLoo {
  Eigen::VectorXd coeffs;  // dense over all basis terms
  double rel_loo = 0.0;
};

inline OlsLoo ols_with_loo(const Eigen::MatrixXd& psi, const Eigen::VectorXd& y,
                           const std::vector<int>& cols) {
  const auto n = psi.rows();
  Eigen::MatrixXd sub(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    sub.col(static_cast<Eigen::Index>(j)) = psi.col(cols[j]);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(sub);
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd residual = y - sub * beta;
  const Eigen::MatrixXd thin_q =
      qr.householderQ() * Eigen::MatrixXd::Identity(n, sub.cols());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = thin_q.row(i).squaredNorm();
    const double denom = std::max(1.0 - h, 1e-8);
    const double e = residual(i) / denom;
    acc += e * e;
  }
  const double var_y = (y.array() - y.mean()).square().mean();
  OlsLoo out;
  out.coeffs = Eigen::VectorXd::Zero(psi.cols());
  for (std::size_t j = 0; j < cols.size(); ++j)
    out.coeffs(cols[j]) = beta(static_cast<Eigen::Index>(j));
  out.rel_loo = (var_y > 0.0) ? (acc / n) / var_y : acc / n;
  return out;
}

// Least-angle regression on centered, unit-norm columns (constant column
// excluded); returns the order in which columns become active.
inline std::vector<int> lars_activation_order(const Eigen::MatrixXd& psi,
                                              const Eigen::VectorXd& y,
                                              int max_active) {
  const auto n = psi.rows();
  std::vector<int> candidates;
  Eigen::MatrixXd xs(n, psi.cols());
  for (Eigen::Index j = 1; j < psi.cols(); ++j) {
    Eigen::VectorXd col = psi.col(j);
    col.array() -= col.mean();
    const double norm = col.norm();
    if (norm > 1e-12) {
      xs.col(j) = col / norm;
      candidates.push_back(static_cast<int>(j));
    }
  }
  Eigen::VectorXd ys = y.array() - y.mean();

  std::vector<int> active;
  std::vector<bool> is_active(static_cast<std::size_t>(psi.cols()), false);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);

  while (static_cast<int>(active.size()) < max_active) {
    // correlation with the current residual
    double best_c = 0.0;
    int best_j = -1;
    for (int j : candidates) {
      if (is_active[static_cast<std::size_t>(j)]) continue;
      const double c = std::abs(xs.col(j).dot(ys - mu));
      if (c > best_c) {
        best_c = c;
        best_j = j;
      }
    }
    if (best_j < 0 || best_c < 1e-12) break;
    active.push_back(best_j);
    is_active[static_cast<std::size_t>(best_j)] = true;

    // equiangular direction over the active set
    const int k = static_cast<int>(active.size());
    Eigen::MatrixXd xa(n, k);
    for (int j = 0; j < k; ++j) {
      const int col = active[static_cast<std::size_t>(j)];
      const double sign = xs.col(col).dot(ys - mu) >= 0.0 ? 1.0 : -1.0;
      xa.col(j) = sign * xs.col(col);
    }
    const Eigen::MatrixXd g = xa.transpose() * xa;
    const Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) break;
    Eigen::VectorXd w = llt.solve(Eigen::VectorXd::Ones(k));
    const double norm_const = 1.0 / std::sqrt(w.sum());
    w *= norm_const;
    const Eigen::VectorXd u = xa * w;
    const double c_max = std::abs(xa.col(k - 1).dot(ys - mu));

    // step length to the next equi-correlation point
    double gamma = c_max / norm_const;  // full least-squares step
    bool any_inactive = false;
    for (int j : candidates) {
      if (is_active[static_cast<std::size_t>(j)]) continue;
      any_inactive = true;
      const double cj = xs.col(j).dot(ys - mu);
      const double aj = xs.col(j).dot(u);
      for (const double cand : {(c_max - cj) / (norm_const - aj),
                                (c_max + cj) / (norm_const + aj)}) {
        if (cand > 1e-12 && cand < gamma) gamma = cand;
      }
    }
    if (!any_inactive) gamma = c_max / norm_const;
    mu += gamma * u;
  }
  return active;
}

}  // namespace detail

/// Fits the expansion coefficients. LeastSquares solves min ||Psi c - y|| by
/// QR and rejects rank-deficient designs; Ridge penalizes all but the
/// constant term; LARS orders candidate terms and keeps the prefix with the
/// smallest leave-one-out error of an OLS refit.
inline PceModel pce_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const std::vector<Distribution>& marginals,
                        const PceBasis& basis, const PceFitOptions& opt = {}) {
  if (x.rows() < 1 || x.rows() != y.size())
    throw invalid_argument_error("pce_fit: inconsistent training data");
  for (std::size_t j = 0; j < marginals.size(); ++j)
    if (pce_family_for(marginals[j]) != basis.families[j])
      throw invalid_argument_error(
          "pce_fit: basis families do not match the marginals");
  const Eigen::MatrixXd psi = pce_design_matrix(basis, marginals, x);

  PceModel model;
  model.basis = basis;
  model.marginals = marginals;

  switch (opt.regressor) {
    case PceRegressor::least_squares: {
      const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(psi);
      if (qr.rank() < psi.cols())
        throw numerical_error(
            "pce_fit: rank-deficient design matrix; consider ridge or lars");
      model.coefficients = qr.solve(y);
      std::vector<int> all_cols(static_cast<std::size_t>(psi.cols()));
      for (int j = 0; j < psi.cols(); ++j) all_cols[static_cast<std::size_t>(j)] = j;
      if (psi.rows() > psi.cols())
        model.validation_error = detail::ols_with_loo(psi, y, all_cols).rel_loo;
      break;
    }
    case PceRegressor::ridge: {
      if (!(opt.ridge_lambda >= 0.0))
        throw invalid_argument_error("pce_fit: ridge lambda must be >= 0");
      Eigen::MatrixXd normal = psi.transpose() * psi;
      for (Eigen::Index j = 1; j < normal.rows(); ++j)
        normal(j, j) += opt.ridge_lambda;
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
      if (ldlt.info() != Eigen::Success)
        throw numerical_error("pce_fit: ridge normal equations failed");
      model.coefficients = ldlt.solve(psi.transpose() * y);
      break;
    }
    case PceRegressor::lars: {
      const int cap = static_cast<int>(
          std::min<Eigen::Index>(psi.cols() - 1, std::max<Eigen::Index>(1, x.rows() - 2)));
      const int max_active = opt.lars_max_terms > 0
                                 ? std::min(opt.lars_max_terms, cap)
                                 : cap;
      const auto order = detail::lars_activation_order(psi, y, max_active);
      if (order.empty()) {
        // target indistinguishable from a constant
        model.coefficients = Eigen::VectorXd::Zero(psi.cols());
        model.coefficients(0) = y.mean();
        model.validation_error = 0.0;
        break;
      }
      double best = std::numeric_limits<double>::infinity();
      detail::OlsLoo best_fit;
      std::vector<int> cols = {0};
      for (int j : order) {
        cols.push_back(j);
        const auto fit = detail::ols_with_loo(psi, y, cols);
        if (fit.rel_loo < best) {
          best = fit.rel_loo;
          best_fit = fit;
        }
      }
      model.coefficients = best_fit.coeffs;
      model.validation_error = best;
      break;
    }
  }
  return model;
}

inline Eigen::VectorXd pce_predict(const PceModel& m,
                                   const Eigen::MatrixXd& x_query) {
  return pce_design_matrix(m.basis, m.marginals, x_query) * m.coefficients;
}

/// (mean, variance) from the coefficients of the orthonormal expansion.
inline std::pair<double, double> pce_moments(const PceModel& m) {
  return {m.mean(), m.variance()};
}

}  // namespace uq
