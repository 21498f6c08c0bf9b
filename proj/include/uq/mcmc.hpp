#pragma once

// Markov chain Monte Carlo: random-walk Metropolis-Hastings, component-wise
// modified Metropolis-Hastings (the subset-simulation conditional sampler),
// and the affine-invariant stretch ensemble move.
//
// Reproducibility: chain (or walker) i of a run with master seed s draws from
// RandomStream(s + i), so results are independent of chain scheduling.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "uq/errors.hpp"
#include "uq/random.hpp"

namespace uq {

struct McmcOptions {
  int n_samples = 1000;  // saved states per chain
  int burn = 0;
  int jump = 1;  // thinning: save every jump-th state after burn
  std::uint64_t seed = 0;

  void validate() const {
    if (n_samples < 1) throw invalid_argument_error("mcmc: n_samples must be >= 1");
    if (burn < 0) throw invalid_argument_error("mcmc: burn must be >= 0");
    if (jump < 1) throw invalid_argument_error("mcmc: jump must be >= 1");
  }
};

struct ChainHistory {
  std::vector<Eigen::MatrixXd> states;      // per chain: n_saved x d
  std::vector<Eigen::VectorXd> log_target;  // matching saved values
  Eigen::VectorXd acceptance_rate;          // per chain, in [0,1]
  int burn = 0;
  int jump = 1;
  SeedRecord seed_record;

  int n_chains() const { return static_cast<int>(states.size()); }
  Eigen::Index n_saved() const { return states.empty() ? 0 : states[0].rows(); }

  /// All chains stacked row-wise: (n_chains * n_saved) x d.
  Eigen::MatrixXd pooled() const {
    if (states.empty()) return {};
    const auto rows = n_saved();
    Eigen::MatrixXd out(rows * n_chains(), states[0].cols());
    for (int c = 0; c < n_chains(); ++c)
      out.middleRows(c * rows, rows) = states[static_cast<std::size_t>(c)];
    return out;
  }
};

using LogTarget = std::function<double(const Eigen::VectorXd&)>;
using Constraint = std::function<bool(const Eigen::VectorXd&)>;

/// Random-walk Gaussian Metropolis-Hastings; chains evolve independently
/// from the rows of `init`.
inline ChainHistory mcmc_mh(const LogTarget& log_target,
                            const Eigen::VectorXd& proposal_scale,
                            const Eigen::MatrixXd& init,
                            const McmcOptions& opt) {
  opt.validate();
  const int n_chains = static_cast<int>(init.rows());
  const int d = static_cast<int>(init.cols());
  if (n_chains < 1) throw invalid_argument_error("mcmc_mh: needs init points");
  if (proposal_scale.size() != d)
    throw invalid_argument_error("mcmc_mh: proposal_scale dimension mismatch");

  ChainHistory h;
  h.burn = opt.burn;
  h.jump = opt.jump;
  h.seed_record = {RandomStream::generator_id(), opt.seed};
  h.states.resize(static_cast<std::size_t>(n_chains));
  h.log_target.resize(static_cast<std::size_t>(n_chains));
  h.acceptance_rate.resize(n_chains);

  const long n_total = static_cast<long>(opt.burn) +
                       static_cast<long>(opt.n_samples) * opt.jump;
  for (int c = 0; c < n_chains; ++c) {
    RandomStream rng(RandomStream::derive(opt.seed, c));
    Eigen::VectorXd x = init.row(c).transpose();
    double lp = log_target(x);
    if (!std::isfinite(lp))
      throw invalid_argument_error(
          "mcmc_mh: log_target not finite at an initial point");
    Eigen::MatrixXd saved(opt.n_samples, d);
    Eigen::VectorXd saved_lp(opt.n_samples);
    long accepted = 0;
    int out = 0;
    for (long t = 1; t <= n_total; ++t) {
      Eigen::VectorXd y(d);
      for (int i = 0; i < d; ++i) y(i) = x(i) + proposal_scale(i) * rng.normal();
      const double lpy = log_target(y);
      if (std::log(rng.uniform01_open()) < lpy - lp) {
        x = y;
        lp = lpy;
        ++accepted;
      }
      if (t > opt.burn && (t - opt.burn) % opt.jump == 0) {
        saved.row(out) = x.transpose();
        saved_lp(out) = lp;
        ++out;
      }
    }
    h.states[static_cast<std::size_t>(c)] = std::move(saved);
    h.log_target[static_cast<std::size_t>(c)] = std::move(saved_lp);
    h.acceptance_rate(c) =
        static_cast<double>(accepted) / static_cast<double>(n_total);
  }
  return h;
}

using LogMarginal = std::function<double(double)>;

namespace detail {

// One component-wise MMH proposal pass: each coordinate proposes a centered
// normal step and is accepted against its own marginal density. Returns the
// candidate; cur_lm is updated to the candidate's marginal values.
inline Eigen::VectorXd mmh_propose(const Eigen::VectorXd& x,
                                   const std::vector<LogMarginal>& marginals,
                                   const Eigen::VectorXd& scale,
                                   Eigen::VectorXd& cur_lm,
                                   RandomStream& rng) {
  const int d = static_cast<int>(x.size());
  Eigen::VectorXd candidate = x;
  for (int i = 0; i < d; ++i) {
    const double yi = x(i) + scale(i) * rng.normal();
    const double lmy = marginals[static_cast<std::size_t>(i)](yi);
    if (std::log(rng.uniform01_open()) < lmy - cur_lm(i)) {
      candidate(i) = yi;
      cur_lm(i) = lmy;
    }
  }
  return candidate;
}

}  // namespace detail

/// Component-wise modified Metropolis-Hastings. Each coordinate is proposed
/// and accepted against its own marginal density; the assembled candidate is
/// then accepted as a block iff `constraint` holds (chain stays otherwise).
/// An iteration counts as accepted when the state actually changed.
inline ChainHistory mcmc_mmh(const std::vector<LogMarginal>& log_marginals,
                             const std::optional<Constraint>& constraint,
                             const Eigen::VectorXd& proposal_scale,
                             const Eigen::MatrixXd& init,
                             const McmcOptions& opt) {
  opt.validate();
  const int n_chains = static_cast<int>(init.rows());
  const int d = static_cast<int>(init.cols());
  if (d < 1 || static_cast<int>(log_marginals.size()) != d)
    throw invalid_argument_error("mcmc_mmh: marginal count mismatch");
  if (proposal_scale.size() != d)
    throw invalid_argument_error("mcmc_mmh: proposal_scale dimension mismatch");

  ChainHistory h;
  h.burn = opt.burn;
  h.jump = opt.jump;
  h.seed_record = {RandomStream::generator_id(), opt.seed};
  h.states.resize(static_cast<std::size_t>(n_chains));
  h.log_target.resize(static_cast<std::size_t>(n_chains));
  h.acceptance_rate.resize(n_chains);

  const auto total_lm = [&](const Eigen::VectorXd& lm) { return lm.sum(); };
  const long n_total = static_cast<long>(opt.burn) +
                       static_cast<long>(opt.n_samples) * opt.jump;
  for (int c = 0; c < n_chains; ++c) {
    RandomStream rng(RandomStream::derive(opt.seed, c));
    Eigen::VectorXd x = init.row(c).transpose();
    Eigen::VectorXd lm(d);
    for (int i = 0; i < d; ++i)
      lm(i) = log_marginals[static_cast<std::size_t>(i)](x(i));
    if (!lm.allFinite())
      throw invalid_argument_error(
          "mcmc_mmh: marginal log density not finite at an initial point");
    Eigen::MatrixXd saved(opt.n_samples, d);
    Eigen::VectorXd saved_lp(opt.n_samples);
    long accepted = 0;
    int out = 0;
    for (long t = 1; t <= n_total; ++t) {
      Eigen::VectorXd cand_lm = lm;
      const Eigen::VectorXd candidate =
          detail::mmh_propose(x, log_marginals, proposal_scale, cand_lm, rng);
      const bool moved = (candidate.array() != x.array()).any();
      if (moved && (!constraint || (*constraint)(candidate))) {
        x = candidate;
        lm = cand_lm;
        ++accepted;
      }
      if (t > opt.burn && (t - opt.burn) % opt.jump == 0) {
        saved.row(out) = x.transpose();
        saved_lp(out) = total_lm(lm);
        ++out;
      }
    }
    h.states[static_cast<std::size_t>(c)] = std::move(saved);
    h.log_target[static_cast<std::size_t>(c)] = std::move(saved_lp);
    h.acceptance_rate(c) =
        static_cast<double>(accepted) / static_cast<double>(n_total);
  }
  return h;
}

/// Affine-invariant ensemble sampler with the stretch move
/// z ~ g(z) prop. 1/sqrt(z) on [1/a, a], acceptance min(1, z^{d-1} e^{dlog}).
/// Walkers update sequentially in place; walker i draws from stream seed+i.
inline ChainHistory mcmc_stretch(const LogTarget& log_target, double a,
                                 const Eigen::MatrixXd& init_walkers,
                                 const McmcOptions& opt) {
  opt.validate();
  const int n_walkers = static_cast<int>(init_walkers.rows());
  const int d = static_cast<int>(init_walkers.cols());
  if (a < 1.0)
    throw invalid_argument_error("mcmc_stretch: stretch scale a must be >= 1");
  if (n_walkers < 2 * (d + 1))
    throw invalid_argument_error(
        "mcmc_stretch: needs at least 2(d+1) walkers");
  for (int i = 0; i < n_walkers; ++i)
    for (int j = i + 1; j < n_walkers; ++j)
      if ((init_walkers.row(i) - init_walkers.row(j)).norm() == 0.0)
        throw invalid_argument_error(
            "mcmc_stretch: duplicate walker initialization");

  ChainHistory h;
  h.burn = opt.burn;
  h.jump = opt.jump;
  h.seed_record = {RandomStream::generator_id(), opt.seed};
  h.states.assign(static_cast<std::size_t>(n_walkers),
                  Eigen::MatrixXd(opt.n_samples, d));
  h.log_target.assign(static_cast<std::size_t>(n_walkers),
                      Eigen::VectorXd(opt.n_samples));
  h.acceptance_rate = Eigen::VectorXd::Zero(n_walkers);

  std::vector<RandomStream> rngs;
  rngs.reserve(static_cast<std::size_t>(n_walkers));
  for (int w = 0; w < n_walkers; ++w)
    rngs.emplace_back(RandomStream::derive(opt.seed, w));

  Eigen::MatrixXd walkers = init_walkers;
  Eigen::VectorXd lp(n_walkers);
  for (int w = 0; w < n_walkers; ++w) {
    lp(w) = log_target(walkers.row(w).transpose());
    if (!std::isfinite(lp(w)))
      throw invalid_argument_error(
          "mcmc_stretch: log_target not finite at an initial walker");
  }

  Eigen::VectorXd accepted = Eigen::VectorXd::Zero(n_walkers);
  const long n_total = static_cast<long>(opt.burn) +
                       static_cast<long>(opt.n_samples) * opt.jump;
  int out = 0;
  for (long t = 1; t <= n_total; ++t) {
    for (int w = 0; w < n_walkers; ++w) {
      auto& rng = rngs[static_cast<std::size_t>(w)];
      int partner = static_cast<int>(rng.uniform_index(n_walkers - 1));
      if (partner >= w) ++partner;
      const double u = rng.uniform01();
      const double z = (a > 1.0)
                           ? ((a - 1.0) * u + 1.0) * ((a - 1.0) * u + 1.0) / a
                           : 1.0;
      const Eigen::VectorXd y =
          (z == 1.0) ? walkers.row(w).transpose()
                     : (walkers.row(partner).transpose() +
                        z * (walkers.row(w).transpose() -
                             walkers.row(partner).transpose()))
                           .eval();
      const double lpy = log_target(y);
      const double log_accept = (d - 1) * std::log(z) + lpy - lp(w);
      if (std::log(rng.uniform01_open()) < log_accept) {
        walkers.row(w) = y.transpose();
        lp(w) = lpy;
        accepted(w) += 1.0;
      }
    }
    if (t > opt.burn && (t - opt.burn) % opt.jump == 0) {
      for (int w = 0; w < n_walkers; ++w) {
        h.states[static_cast<std::size_t>(w)].row(out) = walkers.row(w);
        h.log_target[static_cast<std::size_t>(w)](out) = lp(w);
      }
      ++out;
    }
  }
  h.acceptance_rate = accepted / static_cast<double>(n_total);
  return h;
}

}  // namespace uq
