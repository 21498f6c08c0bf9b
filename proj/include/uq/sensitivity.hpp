#pragma once

// Global sensitivity analysis: Morris elementary-effect screening, pick-freeze
// Sobol indices (first order: Janon estimator; total order: Jansen estimator),
// Chatterjee's rank coefficient, Cramer-von Mises indices on the pick-freeze
// design, and exact indices from a fitted polynomial chaos expansion.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "uq/distributions.hpp"
#include "uq/errors.hpp"
#include "uq/joint.hpp"
#include "uq/model.hpp"
#include "uq/pce.hpp"
#include "uq/random.hpp"
#include "uq/runner.hpp"

namespace uq {

struct SensitivityResult {
  std::string method;
  Eigen::VectorXd first_order;  // per input, where defined
  Eigen::VectorXd total_order;  // per input, where defined
  Eigen::VectorXd mu, mu_star, sigma;  // Morris screening measures
  Eigen::VectorXd first_order_stderr, total_order_stderr;  // bootstrap
  long n_model_evals = 0;
  SeedRecord seed_record;
};

// ---------------------------------------------------------------------------
// Morris screening

struct MorrisOptions {
  int n_trajectories = 10;
  int n_levels = 4;  // p, must be even
  std::uint64_t seed = 0;
  int workers = 1;
  int max_retries = 100000;
};

/// One-at-a-time elementary effects over r random trajectories on the
/// p-level grid of the unit cube, delta = p/(2(p-1)), mapped through the
/// marginal quantiles before evaluation. Exactly r(d+1) model evaluations.
inline SensitivityResult morris(const ModelSpec& model,
                                const std::vector<Distribution>& marginals,
                                const MorrisOptions& opt) {
  const int d = static_cast<int>(marginals.size());
  const int p = opt.n_levels;
  const int r = opt.n_trajectories;
  if (p < 2 || p % 2 != 0)
    throw invalid_argument_error("morris: n_levels must be even and >= 2");
  if (r < 2) throw invalid_argument_error("morris: needs >= 2 trajectories");
  if (model.input_dim() != d)
    throw invalid_argument_error("morris: model arity mismatch");

  const double delta = static_cast<double>(p) / (2.0 * (p - 1));
  const double level_step = 1.0 / (p - 1);
  RandomStream rng(opt.seed);

  // grid points of each trajectory plus the signed coordinate order
  Eigen::MatrixXd points(r * (d + 1), d);
  Eigen::MatrixXi coord_of_move(r, d);  // move k of trajectory t flips coord
  Eigen::MatrixXd sign_of_move(r, d);
  int retries = 0;
  for (int t = 0; t < r; ++t) {
    while (true) {
      if (++retries > opt.max_retries)
        throw numerical_error("morris: could not place a trajectory on the grid");
      Eigen::VectorXd base(d);
      Eigen::VectorXd sign(d);
      bool valid = true;
      for (int j = 0; j < d; ++j) {
        base(j) = level_step * static_cast<double>(rng.uniform_index(p));
        sign(j) = rng.uniform01() < 0.5 ? -1.0 : 1.0;
        const double moved = base(j) + sign(j) * delta;
        if (moved < -1e-12 || moved > 1.0 + 1e-12) valid = false;
      }
      if (!valid) continue;
      std::vector<int> order(static_cast<std::size_t>(d));
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(order);
      Eigen::VectorXd x = base;
      points.row(t * (d + 1)) = x.transpose();
      for (int k = 0; k < d; ++k) {
        const int j = order[static_cast<std::size_t>(k)];
        x(j) = std::min(1.0, std::max(0.0, x(j) + sign(j) * delta));
        points.row(t * (d + 1) + k + 1) = x.transpose();
        coord_of_move(t, k) = j;
        sign_of_move(t, k) = sign(j);
      }
      break;
    }
  }

  // map the unit-cube grid through the marginal quantiles and evaluate
  Eigen::MatrixXd physical(points.rows(), d);
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    for (int j = 0; j < d; ++j)
      physical(i, j) =
          marginals[static_cast<std::size_t>(j)].icdf(clamp_unit(points(i, j)));
  const Eigen::VectorXd g = run_scalar_strict(model, physical, opt.workers);

  Eigen::MatrixXd effects(r, d);
  for (int t = 0; t < r; ++t)
    for (int k = 0; k < d; ++k) {
      const int j = coord_of_move(t, k);
      effects(t, j) = (g(t * (d + 1) + k + 1) - g(t * (d + 1) + k)) /
                      (sign_of_move(t, k) * delta);
    }

  SensitivityResult res;
  res.method = "morris";
  res.mu = effects.colwise().mean();
  res.mu_star.resize(d);
  res.sigma.resize(d);
  for (int j = 0; j < d; ++j) {
    res.mu_star(j) = effects.col(j).cwiseAbs().mean();
    const double m = res.mu(j);
    res.sigma(j) = std::sqrt((effects.col(j).array() - m).square().sum() /
                             (r - 1));
  }
  res.n_model_evals = static_cast<long>(r) * (d + 1);
  res.seed_record = {RandomStream::generator_id(), opt.seed};
  return res;
}

// ---------------------------------------------------------------------------
// Pick-freeze designs (Sobol, Cramer-von Mises)

struct SobolOptions {
  int n = 1 << 14;
  std::uint64_t seed = 0;
  int workers = 1;
  int bootstrap_resamples = 0;  // 0: no confidence intervals
};

namespace detail {

struct PickFreeze {
  Eigen::VectorXd y_a;
  Eigen::VectorXd y_b;
  Eigen::MatrixXd y_ab;  // column i: A with column i replaced from B
  long n_model_evals = 0;
};

inline PickFreeze pick_freeze_evaluate(const ModelSpec& model,
                                       const JointDistribution& joint, int n,
                                       std::uint64_t seed, int workers) {
  if (!joint.independent_coupling())
    throw invalid_argument_error(
        "pick-freeze designs require independent inputs");
  const int d = joint.dimension();
  RandomStream rng(seed);
  const Eigen::MatrixXd a = joint.sample(n, rng);
  const Eigen::MatrixXd b = joint.sample(n, rng);
  Eigen::MatrixXd all((d + 2) * n, d);
  all.topRows(n) = a;
  all.middleRows(n, n) = b;
  for (int i = 0; i < d; ++i) {
    Eigen::MatrixXd abi = a;
    abi.col(i) = b.col(i);
    all.middleRows((2 + i) * n, n) = abi;
  }
  const Eigen::VectorXd g = run_scalar_strict(model, all, workers);
  PickFreeze out;
  out.y_a = g.head(n);
  out.y_b = g.segment(n, n);
  out.y_ab.resize(n, d);
  for (int i = 0; i < d; ++i) out.y_ab.col(i) = g.segment((2 + i) * n, n);
  out.n_model_evals = static_cast<long>(n) * (d + 2);
  return out;
}

// Janon first-order estimator from the (B, AB_i) pair.
inline double janon_first(const Eigen::VectorXd& y_b,
                          const Eigen::VectorXd& y_abi) {
  const double m = 0.5 * (y_b.mean() + y_abi.mean());
  const double num = (y_b.array() * y_abi.array()).mean() - m * m;
  const double den =
      0.5 * (y_b.array().square().mean() + y_abi.array().square().mean()) -
      m * m;
  return num / den;
}

// Jansen total-order estimator normalized by the variance of y_a.
inline double jansen_total(const Eigen::VectorXd& y_a,
                           const Eigen::VectorXd& y_abi, double var_a) {
  return (y_a - y_abi).squaredNorm() / (2.0 * y_a.size()) / var_a;
}

inline Eigen::VectorXd take(const Eigen::VectorXd& v,
                            const std::vector<int>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out(static_cast<Eigen::Index>(k)) = v(idx[k]);
  return out;
}

}  // namespace detail

/// First and total Sobol indices on the pick-freeze design; n(d+2) model
/// evaluations. Optional percentile bootstrap over design rows fills the
/// stderr fields.
inline SensitivityResult sobol(const ModelSpec& model,
                               const JointDistribution& joint,
                               const SobolOptions& opt) {
  const int d = joint.dimension();
  const auto pf = detail::pick_freeze_evaluate(model, joint, opt.n, opt.seed,
                                               opt.workers);
  const double var_a =
      (pf.y_a.array() - pf.y_a.mean()).square().mean();
  if (!(var_a > 0.0))
    throw numerical_error("sobol: output variance is zero; indices undefined");

  SensitivityResult res;
  res.method = "sobol";
  res.first_order.resize(d);
  res.total_order.resize(d);
  for (int i = 0; i < d; ++i) {
    res.first_order(i) = detail::janon_first(pf.y_b, pf.y_ab.col(i));
    res.total_order(i) = detail::jansen_total(pf.y_a, pf.y_ab.col(i), var_a);
  }
  res.n_model_evals = pf.n_model_evals;
  res.seed_record = {RandomStream::generator_id(), opt.seed};

  if (opt.bootstrap_resamples > 0) {
    RandomStream rng(RandomStream::derive(opt.seed, 1));
    Eigen::MatrixXd s1(opt.bootstrap_resamples, d);
    Eigen::MatrixXd st(opt.bootstrap_resamples, d);
    std::vector<int> idx(static_cast<std::size_t>(opt.n));
    for (int b = 0; b < opt.bootstrap_resamples; ++b) {
      for (auto& v : idx) v = static_cast<int>(rng.uniform_index(opt.n));
      const Eigen::VectorXd ya = detail::take(pf.y_a, idx);
      const Eigen::VectorXd yb = detail::take(pf.y_b, idx);
      const double va = (ya.array() - ya.mean()).square().mean();
      for (int i = 0; i < d; ++i) {
        const Eigen::VectorXd yabi = detail::take(pf.y_ab.col(i), idx);
        s1(b, i) = detail::janon_first(yb, yabi);
        st(b, i) = va > 0.0 ? detail::jansen_total(ya, yabi, va) : 0.0;
      }
    }
    res.first_order_stderr.resize(d);
    res.total_order_stderr.resize(d);
    for (int i = 0; i < d; ++i) {
      res.first_order_stderr(i) =
          std::sqrt((s1.col(i).array() - s1.col(i).mean()).square().mean());
      res.total_order_stderr(i) =
          std::sqrt((st.col(i).array() - st.col(i).mean()).square().mean());
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Chatterjee's xi

/// Rank correlation coefficient xi(x -> y), tie-corrected form with max-rank
/// convention; x ties are broken by original order. Errors on constant x or y.
inline double chatterjee(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const auto n = x.size();
  if (n < 3) throw invalid_argument_error("chatterjee: needs n >= 3");
  if (y.size() != n)
    throw invalid_argument_error("chatterjee: length mismatch");
  if ((x.array() == x(0)).all())
    throw invalid_argument_error("chatterjee: x is constant; xi undefined");

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return x(a) < x(b); });

  std::vector<double> sorted_y(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) sorted_y[static_cast<std::size_t>(i)] = y(i);
  std::sort(sorted_y.begin(), sorted_y.end());

  // r_k = #{j: y_j <= y_k}, l_k = #{j: y_j >= y_k}
  Eigen::VectorXd r(n), l(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = y(order[static_cast<std::size_t>(i)]);
    r(i) = static_cast<double>(
        std::upper_bound(sorted_y.begin(), sorted_y.end(), v) -
        sorted_y.begin());
    l(i) = static_cast<double>(
        sorted_y.end() -
        std::lower_bound(sorted_y.begin(), sorted_y.end(), v));
  }
  double sum_dr = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) sum_dr += std::abs(r(i + 1) - r(i));
  double denom = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) denom += l(i) * (n - l(i));
  if (!(denom > 0.0))
    throw invalid_argument_error("chatterjee: y is constant; xi undefined");
  return 1.0 - static_cast<double>(n) * sum_dr / (2.0 * denom);
}

/// Per-input xi from one Monte Carlo batch of n model evaluations.
inline SensitivityResult chatterjee_sensitivity(const ModelSpec& model,
                                                const JointDistribution& joint,
                                                int n, std::uint64_t seed,
                                                int workers = 1) {
  RandomStream rng(seed);
  const Eigen::MatrixXd x = joint.sample(n, rng);
  const Eigen::VectorXd y = run_scalar_strict(model, x, workers);
  SensitivityResult res;
  res.method = "chatterjee";
  res.first_order.resize(joint.dimension());
  for (int i = 0; i < joint.dimension(); ++i)
    res.first_order(i) = chatterjee(x.col(i), y);
  res.n_model_evals = n;
  res.seed_record = {RandomStream::generator_id(), seed};
  return res;
}

// ---------------------------------------------------------------------------
// Cramer-von Mises indices

struct CvmOptions {
  int n = 1 << 12;
  int m_grid = 100;  // empirical Y-quantile grid for the outer integral
  std::uint64_t seed = 0;
  int workers = 1;
};

/// S_i = int Var(E[1{Y<=t}|X_i]) dF_Y / int Var(1{Y<=t}) dF_Y, the outer
/// integral over m_grid empirical quantiles of Y, the inner terms by the
/// Janon estimator on indicator outputs; reuses the Sobol pick-freeze design.
inline SensitivityResult cramer_von_mises(const ModelSpec& model,
                                          const JointDistribution& joint,
                                          const CvmOptions& opt) {
  const int d = joint.dimension();
  const auto pf = detail::pick_freeze_evaluate(model, joint, opt.n, opt.seed,
                                               opt.workers);
  const int n = opt.n;

  // empirical quantiles of the pooled outputs
  std::vector<double> pooled;
  pooled.reserve(static_cast<std::size_t>(2 * n));
  for (int i = 0; i < n; ++i) pooled.push_back(pf.y_a(i));
  for (int i = 0; i < n; ++i) pooled.push_back(pf.y_b(i));
  std::sort(pooled.begin(), pooled.end());
  if (pooled.front() == pooled.back())
    throw numerical_error("cvm: output variance is zero; indices undefined");
  Eigen::VectorXd grid(opt.m_grid);
  for (int k = 0; k < opt.m_grid; ++k) {
    const double level = (k + 0.5) / opt.m_grid;
    const auto pos = static_cast<std::size_t>(
        std::min<double>(pooled.size() - 1.0,
                         std::floor(level * static_cast<double>(pooled.size()))));
    grid(k) = pooled[pos];
  }

  Eigen::VectorXd num = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd den = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd ib(n), iabi(n);
  for (int k = 0; k < opt.m_grid; ++k) {
    const double t = grid(k);
    for (int i = 0; i < n; ++i) ib(i) = pf.y_b(i) <= t ? 1.0 : 0.0;
    for (int c = 0; c < d; ++c) {
      for (int i = 0; i < n; ++i) iabi(i) = pf.y_ab(i, c) <= t ? 1.0 : 0.0;
      const double m = 0.5 * (ib.mean() + iabi.mean());
      num(c) += (ib.array() * iabi.array()).mean() - m * m;
      den(c) += 0.5 * (ib.array().square().mean() +
                       iabi.array().square().mean()) -
                m * m;
    }
  }

  SensitivityResult res;
  res.method = "cramer_von_mises";
  res.first_order.resize(d);
  for (int c = 0; c < d; ++c)
    res.first_order(c) = den(c) > 0.0 ? num(c) / den(c) : 0.0;
  res.n_model_evals = pf.n_model_evals;
  res.seed_record = {RandomStream::generator_id(), opt.seed};
  return res;
}

// ---------------------------------------------------------------------------
// PCE-based indices

/// Exact first/total Sobol indices from the expansion coefficients; zero
/// extra model evaluations.
inline SensitivityResult pce_sensitivity(const PceModel& model) {
  const int d = model.basis.dimension();
  const double v = model.variance();
  if (!(v > 0.0))
    throw numerical_error("pce_sensitivity: expansion variance is zero");
  SensitivityResult res;
  res.method = "pce";
  res.first_order = Eigen::VectorXd::Zero(d);
  res.total_order = Eigen::VectorXd::Zero(d);
  for (int t = 1; t < model.basis.size(); ++t) {
    const auto& idx = model.basis.multi_indices[static_cast<std::size_t>(t)];
    const double c2 = model.coefficients(t) * model.coefficients(t);
    for (int i = 0; i < d; ++i) {
      if (idx[static_cast<std::size_t>(i)] == 0) continue;
      res.total_order(i) += c2;
      bool pure = true;
      for (int j = 0; j < d; ++j)
        if (j != i && idx[static_cast<std::size_t>(j)] > 0) {
          pure = false;
          break;
        }
      if (pure) res.first_order(i) += c2;
    }
  }
  res.first_order /= v;
  res.total_order /= v;
  res.n_model_evals = 0;
  return res;
}

}  // namespace uq
