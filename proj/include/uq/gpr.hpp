#pragma once

// Gaussian process regression. Hyperparameters maximize the log marginal
// likelihood by multi-start Nelder-Mead in log-parameter space (the optimizer
// is derivative-free by design). Targets are centered internally, so a
// constant target is reproduced exactly. Factorizations escalate through the
// jitter ladder {1e-10, 1e-8, 1e-6} x max(1, signal variance) before failing.

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <utility>

#include "uq/errors.hpp"
#include "uq/kernels.hpp"
#include "uq/math/optim.hpp"
#include "uq/random.hpp"

namespace uq {

struct GprModel {
  Kernel kernel;
  double noise_variance = 0.0;
  Eigen::MatrixXd x_train;
  Eigen::VectorXd y_train;
  double y_mean = 0.0;
  Eigen::MatrixXd chol_l;         // factor of K + (noise + jitter) I
  Eigen::VectorXd alpha_weights;  // solve(K + noise I, y - y_mean)
  double lml = 0.0;
  double jitter = 0.0;
};

/// Factorizes the training covariance for fixed hyperparameters (any n >= 1).
inline GprModel gpr_build(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const Kernel& kernel, double noise_variance) {
  if (x.rows() < 1 || x.rows() != y.size())
    throw invalid_argument_error("gpr_build: inconsistent training data");
  if (noise_variance < 0.0)
    throw invalid_argument_error("gpr_build: noise variance must be >= 0");
  GprModel m;
  m.kernel = kernel;
  m.noise_variance = noise_variance;
  m.x_train = x;
  m.y_train = y;
  m.y_mean = y.mean();

  const Eigen::MatrixXd k = kernel_gram(kernel, x, x);
  const double jitter_unit = std::max(1.0, kernel.signal_variance);
  const double ladder[] = {0.0, 1e-10, 1e-8, 1e-6};
  Eigen::LLT<Eigen::MatrixXd> llt;
  bool ok = false;
  for (double j : ladder) {
    Eigen::MatrixXd kn = k;
    kn.diagonal().array() += noise_variance + j * jitter_unit;
    llt.compute(kn);
    if (llt.info() == Eigen::Success) {
      m.jitter = j * jitter_unit;
      ok = true;
      break;
    }
  }
  if (!ok)
    throw numerical_error(
        "gpr_build: covariance ill-conditioned (jitter ladder exhausted)");

  m.chol_l = llt.matrixL();
  const Eigen::VectorXd yc = y.array() - m.y_mean;
  m.alpha_weights = llt.solve(yc);
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < m.chol_l.rows(); ++i)
    log_det += std::log(m.chol_l(i, i));
  const double n = static_cast<double>(x.rows());
  m.lml = -0.5 * yc.dot(m.alpha_weights) - log_det -
          0.5 * n * std::log(2.0 * std::numbers::pi);
  return m;
}

/// Posterior mean and variance at query rows; variance clamped to >= 0.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> gpr_predict(
    const GprModel& m, const Eigen::MatrixXd& x_query) {
  const Eigen::MatrixXd k_star = kernel_gram(m.kernel, m.x_train, x_query);
  Eigen::VectorXd mean =
      (k_star.transpose() * m.alpha_weights).array() + m.y_mean;
  const Eigen::MatrixXd v =
      m.chol_l.triangularView<Eigen::Lower>().solve(k_star);
  Eigen::VectorXd variance(x_query.rows());
  for (Eigen::Index i = 0; i < x_query.rows(); ++i) {
    const double kxx = m.kernel(x_query.row(i).transpose(),
                                x_query.row(i).transpose());
    variance(i) = std::max(0.0, kxx - v.col(i).squaredNorm());
  }
  return {std::move(mean), std::move(variance)};
}

struct GprFitOptions {
  std::optional<double> fixed_noise;  // nullopt: noise optimized
  int n_restarts = 10;
  std::uint64_t seed = 0;
  // bounds are multiples of the per-dimension input range / target variance
  double lengthscale_lo = 1e-3, lengthscale_hi = 1e3;
  double signal_lo = 1e-6, signal_hi = 1e6;
  double noise_lo = 1e-10, noise_hi = 1.0;
  int max_iter = 300;
};

/// Maximum-marginal-likelihood fit; best of n_restarts local searches started
/// uniformly inside the (log-space) bounds.
inline GprModel gpr_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        KernelKind kind, const GprFitOptions& opt = {}) {
  const auto n = x.rows();
  const int d = static_cast<int>(x.cols());
  if (n < 2) throw invalid_argument_error("gpr_fit: needs n >= 2");
  if (y.size() != n)
    throw invalid_argument_error("gpr_fit: target length mismatch");
  if (opt.fixed_noise && *opt.fixed_noise == 0.0)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j)
        if ((x.row(i) - x.row(j)).norm() == 0.0)
          throw invalid_argument_error(
              "gpr_fit: duplicate training rows with zero noise");

  Eigen::VectorXd range(d);
  for (int j = 0; j < d; ++j) {
    const double r = x.col(j).maxCoeff() - x.col(j).minCoeff();
    range(j) = r > 0.0 ? r : 1.0;
  }
  const double y_var_raw = (y.array() - y.mean()).square().mean();
  const double y_var = y_var_raw > 0.0 ? y_var_raw : 1.0;

  const bool opt_noise = !opt.fixed_noise.has_value();
  const int n_params = d + 1 + (opt_noise ? 1 : 0);
  Eigen::VectorXd lo(n_params), hi(n_params);
  for (int j = 0; j < d; ++j) {
    lo(j) = std::log(opt.lengthscale_lo * range(j));
    hi(j) = std::log(opt.lengthscale_hi * range(j));
  }
  lo(d) = std::log(opt.signal_lo * y_var);
  hi(d) = std::log(opt.signal_hi * y_var);
  if (opt_noise) {
    lo(d + 1) = std::log(opt.noise_lo * y_var);
    hi(d + 1) = std::log(opt.noise_hi * y_var);
  }

  const auto unpack = [&](const Eigen::VectorXd& p) {
    const Kernel k = Kernel::make(kind, p.head(d).array().exp(),
                                  std::exp(p(d)));
    const double noise =
        opt_noise ? std::exp(p(d + 1)) : *opt.fixed_noise;
    return std::make_pair(k, noise);
  };
  const auto neg_lml = [&](const Eigen::VectorXd& p) -> double {
    try {
      const auto [k, noise] = unpack(p);
      return -gpr_build(x, y, k, noise).lml;
    } catch (const std::exception&) {
      return 1e300;
    }
  };

  RandomStream rng(opt.seed);
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_p;
  for (int r = 0; r < std::max(1, opt.n_restarts); ++r) {
    Eigen::VectorXd p0(n_params);
    if (r == 0) {
      // heuristic start: mid-range lengthscales, target variance
      for (int j = 0; j < d; ++j) p0(j) = std::log(0.5 * range(j));
      p0(d) = std::log(y_var);
      if (opt_noise) p0(d + 1) = std::log(1e-4 * y_var);
    } else {
      for (int j = 0; j < n_params; ++j)
        p0(j) = lo(j) + (hi(j) - lo(j)) * rng.uniform01();
    }
    const auto res = math::nelder_mead(neg_lml, p0, lo, hi, opt.max_iter);
    if (res.value < best) {
      best = res.value;
      best_p = res.x;
    }
  }
  if (!best_p.size())
    throw numerical_error("gpr_fit: every restart failed to factorize");
  const auto [k, noise] = unpack(best_p);
  return gpr_build(x, y, k, noise);
}

}  // namespace uq
