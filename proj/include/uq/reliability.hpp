#pragma once

// Failure-probability estimation. Convention: failure <=> g <= 0.
//
// FORM: plain HL-RF iteration with central-difference gradients in U-space,
// G(u) = g(nataf_inverse(u)). Non-convergence is reported in the result, not
// thrown. SORM: Breitung correction pf = Phi(-beta) prod (1+beta*k_i)^{-1/2}
// with curvatures from the tangential block of the rotated scaled Hessian.
// Subset simulation: Au-Beck scheme, conditional levels sampled by the
// component-wise MMH kernel with constraint g <= b_j; the coefficient of
// variation is the Au-Beck product estimator
//   delta^2 = sum_j (1-p_j)/(N p_j) (1+gamma_j),
// gamma_j the autocorrelation correction of the level-j indicator along
// chains. Chain c of level j draws from RandomStream(seed + 1000003*j + c).

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "uq/errors.hpp"
#include "uq/logging.hpp"
#include "uq/math/special.hpp"
#include "uq/mcmc.hpp"
#include "uq/model.hpp"
#include "uq/random.hpp"
#include "uq/runner.hpp"
#include "uq/transformations.hpp"

namespace uq {

/// Scalar limit state g evaluated in standard normal space through the
/// isoprobabilistic transform of its input distribution.
class LimitState {
 public:
  LimitState(ModelSpec model, NatafTransform transform, int workers = 1)
      : model_(std::move(model)),
        transform_(std::move(transform)),
        workers_(workers) {
    if (model_.output_dim() != 1)
      throw invalid_argument_error("limit state: model output must be scalar");
    if (model_.input_dim() != transform_.dimension())
      throw invalid_argument_error(
          "limit state: model arity does not match transform dimension");
  }

  int dimension() const { return transform_.dimension(); }
  const NatafTransform& transform() const { return transform_; }
  int workers() const { return workers_; }

  Eigen::VectorXd evaluate_u(const Eigen::MatrixXd& u) const {
    return run_scalar_strict(model_, transform_.inverse(u), workers_);
  }

  double evaluate_u_single(const Eigen::VectorXd& u) const {
    return evaluate_u(Eigen::MatrixXd(u.transpose()))(0);
  }

 private:
  ModelSpec model_;
  NatafTransform transform_;
  int workers_;
};

struct FormOptions {
  double tol_u = 1e-6;
  double tol_g = 1e-6;
  int max_iter = 100;
  double fd_step = 1e-6;
};

struct FormResult {
  double beta = 0.0;
  Eigen::VectorXd u_star;
  Eigen::VectorXd x_star;
  Eigen::VectorXd alpha;  // -grad g / ||grad g|| at u_star
  double pf = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> g_history;
};

namespace detail {

// Central-difference gradient in U-space; one batched model call.
inline Eigen::VectorXd fd_gradient(const LimitState& ls,
                                   const Eigen::VectorXd& u, double step) {
  const int d = static_cast<int>(u.size());
  Eigen::MatrixXd pts(2 * d, d);
  for (int i = 0; i < d; ++i) {
    pts.row(2 * i) = u.transpose();
    pts(2 * i, i) += step;
    pts.row(2 * i + 1) = u.transpose();
    pts(2 * i + 1, i) -= step;
  }
  const Eigen::VectorXd g = ls.evaluate_u(pts);
  Eigen::VectorXd grad(d);
  for (int i = 0; i < d; ++i)
    grad(i) = (g(2 * i) - g(2 * i + 1)) / (2.0 * step);
  return grad;
}

}  // namespace detail

/// Hasofer-Lind design point search by the HL-RF recursion
/// u_{k+1} = [(grad.u_k - g(u_k)) / ||grad||^2] grad.
inline FormResult form(const LimitState& ls, const Eigen::VectorXd& u0,
                       const FormOptions& opt = {}) {
  if (u0.size() != ls.dimension())
    throw invalid_argument_error("form: u0 dimension mismatch");
  FormResult result;
  Eigen::VectorXd u = u0;
  double g_u = ls.evaluate_u_single(u);
  if (!std::isfinite(g_u))
    throw invalid_argument_error("form: g not finite at u0");
  // relative g criterion with an absolute floor so a start already on the
  // limit surface (g(u0) at rounding-noise level) can converge
  const double g_threshold = std::max(opt.tol_g * std::abs(g_u), 1e-14);
  result.g_history.push_back(g_u);

  Eigen::VectorXd grad;
  for (int iter = 1; iter <= opt.max_iter; ++iter) {
    grad = detail::fd_gradient(ls, u, opt.fd_step);
    const double norm2 = grad.squaredNorm();
    if (norm2 < 1e-30)
      throw numerical_error("form: singular (zero) gradient at iterate " +
                            std::to_string(iter));
    const Eigen::VectorXd u_next =
        ((grad.dot(u) - g_u) / norm2) * grad;
    const bool step_small = (u_next - u).norm() <= opt.tol_u;
    const bool g_small = std::abs(g_u) <= g_threshold;
    result.iterations = iter;
    u = u_next;
    g_u = ls.evaluate_u_single(u);
    result.g_history.push_back(g_u);
    log::debug("form: iter " + std::to_string(iter) + " g=" +
               std::to_string(g_u) + " |u|=" + std::to_string(u.norm()));
    if (step_small && g_small) {
      result.converged = true;
      break;
    }
  }

  result.u_star = u;
  result.alpha = -grad / grad.norm();
  result.beta = result.alpha.dot(u);
  result.pf = math::standard_normal_cdf(-result.beta);
  result.x_star = ls.transform().inverse_row(u);
  return result;
}

struct SormResult {
  double beta = 0.0;
  double pf_form = 0.0;
  double pf = 0.0;                // Breitung-corrected
  Eigen::VectorXd curvatures;     // d-1 principal curvatures at u_star
};

/// Second-order correction at a converged FORM design point.
inline SormResult sorm(const FormResult& fr, const LimitState& ls,
                       double fd_step = 1e-4, double grad_step = 1e-6) {
  if (!fr.converged)
    throw invalid_argument_error("sorm: FORM result must be converged");
  const int d = ls.dimension();
  SormResult out;
  out.beta = fr.beta;
  out.pf_form = fr.pf;
  if (d == 1) {
    out.pf = fr.pf;
    out.curvatures = Eigen::VectorXd(0);
    return out;
  }

  const Eigen::VectorXd& u = fr.u_star;
  const double g0 = ls.evaluate_u_single(u);
  Eigen::MatrixXd hess(d, d);
  {
    // diagonal stencil
    Eigen::MatrixXd pts(2 * d, d);
    for (int i = 0; i < d; ++i) {
      pts.row(2 * i) = u.transpose();
      pts(2 * i, i) += fd_step;
      pts.row(2 * i + 1) = u.transpose();
      pts(2 * i + 1, i) -= fd_step;
    }
    const Eigen::VectorXd g = ls.evaluate_u(pts);
    for (int i = 0; i < d; ++i)
      hess(i, i) = (g(2 * i) - 2.0 * g0 + g(2 * i + 1)) / (fd_step * fd_step);
  }
  if (d > 1) {
    const int pairs = d * (d - 1) / 2;
    Eigen::MatrixXd pts(4 * pairs, d);
    int row = 0;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        for (int s = 0; s < 4; ++s) pts.row(row + s) = u.transpose();
        pts(row + 0, i) += fd_step;
        pts(row + 0, j) += fd_step;
        pts(row + 1, i) += fd_step;
        pts(row + 1, j) -= fd_step;
        pts(row + 2, i) -= fd_step;
        pts(row + 2, j) += fd_step;
        pts(row + 3, i) -= fd_step;
        pts(row + 3, j) -= fd_step;
        row += 4;
      }
    const Eigen::VectorXd g = ls.evaluate_u(pts);
    row = 0;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        const double hij = (g(row) - g(row + 1) - g(row + 2) + g(row + 3)) /
                           (4.0 * fd_step * fd_step);
        hess(i, j) = hij;
        hess(j, i) = hij;
        row += 4;
      }
  }

  const Eigen::VectorXd grad = detail::fd_gradient(ls, u, grad_step);
  const double grad_norm = grad.norm();
  if (grad_norm < 1e-30)
    throw numerical_error("sorm: singular gradient at design point");

  // Householder Q with last column alpha: Q maps e_d -> alpha.
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd v = fr.alpha;
  v(d - 1) -= 1.0;
  const double vn2 = v.squaredNorm();
  if (vn2 > 1e-24) q -= (2.0 / vn2) * v * v.transpose();

  const Eigen::MatrixXd a = q.transpose() * hess * q / grad_norm;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      a.topLeftCorner(d - 1, d - 1));
  out.curvatures = es.eigenvalues();

  double factor = 1.0;
  for (Eigen::Index i = 0; i < out.curvatures.size(); ++i) {
    const double term = 1.0 + fr.beta * out.curvatures(i);
    if (term <= 0.0)
      throw numerical_error(
          "sorm: Breitung correction inapplicable (1 + beta*kappa <= 0)");
    factor *= 1.0 / std::sqrt(term);
  }
  out.pf = fr.pf * factor;
  return out;
}

struct SubsetOptions {
  int n_per_level = 1000;
  double p0 = 0.1;
  double proposal_scale = 1.0;
  int max_levels = 20;
  std::uint64_t seed = 0;
};

struct SubsetResult {
  double pf = 0.0;
  double cov = 0.0;
  std::vector<double> thresholds;
  int n_levels = 0;
  int samples_per_level = 0;
  bool converged = false;
  long n_model_evals = 0;
  SeedRecord seed_record;
};

namespace detail {

// Au-Beck autocorrelation correction gamma for chain-structured indicator
// values; chains is a list of 0/1 sequences of (nearly) equal length.
inline double subset_gamma(const std::vector<std::vector<int>>& chains,
                           double p_hat) {
  std::size_t len = 0;
  for (const auto& c : chains) len = std::max(len, c.size());
  if (len < 2) return 0.0;
  const double r0 = p_hat * (1.0 - p_hat);
  if (r0 <= 0.0) return 0.0;
  double gamma = 0.0;
  for (std::size_t k = 1; k < len; ++k) {
    double sum = 0.0;
    long count = 0;
    for (const auto& c : chains) {
      if (c.size() <= k) continue;
      for (std::size_t s = 0; s + k < c.size(); ++s)
        sum += static_cast<double>(c[s] * c[s + k]);
      count += static_cast<long>(c.size() - k);
    }
    if (count == 0) break;
    const double rk = sum / static_cast<double>(count) - p_hat * p_hat;
    gamma += 2.0 * (1.0 - static_cast<double>(k) / static_cast<double>(len)) *
             (rk / r0);
  }
  return std::max(0.0, gamma);
}

}  // namespace detail

/// Au-Beck subset simulation; pre: n_per_level * p0 must be an integer >= 1.
inline SubsetResult subset_simulation(const LimitState& ls,
                                      const SubsetOptions& opt) {
  const int n = opt.n_per_level;
  const int d = ls.dimension();
  if (!(opt.p0 > 0.0 && opt.p0 < 1.0))
    throw invalid_argument_error("subset: p0 must lie in (0,1)");
  const double n_seed_real = n * opt.p0;
  const int n_seed = static_cast<int>(std::lround(n_seed_real));
  if (std::abs(n_seed_real - n_seed) > 1e-9 || n_seed < 1)
    throw invalid_argument_error(
        "subset: n_per_level * p0 must be an integer >= 1");

  SubsetResult result;
  result.samples_per_level = n;
  result.seed_record = {RandomStream::generator_id(), opt.seed};

  // level 0: crude Monte Carlo in U-space
  RandomStream rng0(opt.seed);
  Eigen::MatrixXd states(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) states(i, j) = rng0.normal();
  Eigen::VectorXd g = ls.evaluate_u(states);
  result.n_model_evals += n;

  // chain organization of the current level; level 0 is a single iid block
  std::vector<std::vector<int>> level_chain_rows(1);
  for (int i = 0; i < n; ++i) level_chain_rows[0].push_back(i);
  bool level_is_mcmc = false;

  double delta2 = 0.0;
  for (int level = 0;; ++level) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return g(a) < g(b); });
    const double b_level = g(order[static_cast<std::size_t>(n_seed - 1)]);
    result.thresholds.push_back(b_level);
    result.n_levels = level + 1;

    const bool final_level = b_level <= 0.0;
    const double indicator_cut = final_level ? 0.0 : b_level;
    int n_below = 0;
    for (int i = 0; i < n; ++i)
      if (g(i) <= indicator_cut) ++n_below;
    const double p_hat =
        final_level ? static_cast<double>(n_below) / n : opt.p0;

    // cov contribution of this level
    if (p_hat > 0.0 && p_hat < 1.0) {
      double gamma = 0.0;
      if (level_is_mcmc) {
        std::vector<std::vector<int>> indicator_chains;
        indicator_chains.reserve(level_chain_rows.size());
        for (const auto& rows : level_chain_rows) {
          std::vector<int> seq;
          seq.reserve(rows.size());
          for (int r : rows) seq.push_back(g(r) <= indicator_cut ? 1 : 0);
          indicator_chains.push_back(std::move(seq));
        }
        gamma = detail::subset_gamma(indicator_chains, p_hat);
      }
      delta2 += (1.0 - p_hat) / (static_cast<double>(n) * p_hat) *
                (1.0 + gamma);
    }

    if (final_level) {
      result.pf = std::pow(opt.p0, level) * p_hat;
      result.converged = p_hat > 0.0;
      break;
    }
    if (level + 1 >= opt.max_levels) {
      result.pf = std::pow(opt.p0, level) *
                  (static_cast<double>(n_below) / n);
      result.converged = false;
      break;
    }

    // conditional level: MMH chains from the n_seed best samples
    const int base_len = n / n_seed;
    const int extra = n % n_seed;
    Eigen::MatrixXd next_states(n, d);
    Eigen::VectorXd next_g(n);
    std::vector<std::vector<int>> next_chain_rows(
        static_cast<std::size_t>(n_seed));

    struct Chain {
      Eigen::VectorXd x;
      double gx;
      RandomStream rng;
      int remaining;
    };
    std::vector<Chain> chains;
    chains.reserve(static_cast<std::size_t>(n_seed));
    int row = 0;
    for (int c = 0; c < n_seed; ++c) {
      const int src = order[static_cast<std::size_t>(c)];
      Chain ch{states.row(src).transpose(), g(src),
               RandomStream(opt.seed + 1000003ULL *
                                           static_cast<std::uint64_t>(level + 1) +
                            static_cast<std::uint64_t>(c)),
               base_len + (c < extra ? 1 : 0) - 1};
      next_states.row(row) = ch.x.transpose();
      next_g(row) = ch.gx;
      next_chain_rows[static_cast<std::size_t>(c)].push_back(row);
      ++row;
      chains.push_back(std::move(ch));
    }

    // advance all chains step-synchronized so candidate evaluations batch
    int max_remaining = 0;
    for (const auto& ch : chains) max_remaining = std::max(max_remaining, ch.remaining);
    for (int step = 0; step < max_remaining; ++step) {
      std::vector<int> pending;  // chain indices with a candidate to evaluate
      Eigen::MatrixXd candidates(n_seed, d);
      for (int c = 0; c < n_seed; ++c) {
        auto& ch = chains[static_cast<std::size_t>(c)];
        if (step >= ch.remaining) continue;
        Eigen::VectorXd cand = ch.x;
        bool moved = false;
        for (int i = 0; i < d; ++i) {
          const double yi = ch.x(i) + opt.proposal_scale * ch.rng.normal();
          // accept ratio against the standard normal marginal
          const double dlp = 0.5 * (ch.x(i) * ch.x(i) - yi * yi);
          if (std::log(ch.rng.uniform01_open()) < dlp) {
            cand(i) = yi;
            moved = true;
          }
        }
        if (moved) {
          candidates.row(static_cast<int>(pending.size())) = cand.transpose();
          pending.push_back(c);
        } else {
          // candidate equals the current state; chain stays
          const int r = row++;
          next_states.row(r) = ch.x.transpose();
          next_g(r) = ch.gx;
          next_chain_rows[static_cast<std::size_t>(c)].push_back(r);
        }
      }
      if (!pending.empty()) {
        const Eigen::VectorXd g_cand = ls.evaluate_u(
            candidates.topRows(static_cast<Eigen::Index>(pending.size())));
        result.n_model_evals += static_cast<long>(pending.size());
        for (std::size_t k = 0; k < pending.size(); ++k) {
          auto& ch = chains[static_cast<std::size_t>(pending[k])];
          if (g_cand(static_cast<Eigen::Index>(k)) <= b_level) {
            ch.x = candidates.row(static_cast<Eigen::Index>(k)).transpose();
            ch.gx = g_cand(static_cast<Eigen::Index>(k));
          }
          const int r = row++;
          next_states.row(r) = ch.x.transpose();
          next_g(r) = ch.gx;
          next_chain_rows[static_cast<std::size_t>(pending[k])].push_back(r);
        }
      }
    }

    states = std::move(next_states);
    g = std::move(next_g);
    level_chain_rows = std::move(next_chain_rows);
    level_is_mcmc = true;
  }

  result.cov = std::sqrt(delta2);
  return result;
}

}  // namespace uq
