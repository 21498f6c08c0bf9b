#pragma once

// Static sample generation: Monte Carlo, Latin hypercube, true stratified,
// simplex, and importance sampling with multinomial resampling.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "uq/distributions.hpp"
#include "uq/errors.hpp"
#include "uq/joint.hpp"
#include "uq/random.hpp"
#include "uq/sample_set.hpp"
#include "uq/strata.hpp"

namespace uq {

/// i.i.d. draws from a univariate distribution.
inline SampleSet rvs(const Distribution& dist, int n, RandomStream& rng) {
  if (n < 1) throw invalid_argument_error("rvs: n must be >= 1");
  SampleSet s;
  s.samples.resize(n, 1);
  for (int i = 0; i < n; ++i) s.samples(i, 0) = dist.sample(rng);
  s.seed_record = {RandomStream::generator_id(), rng.seed()};
  s.space = SampleSpace::physical;
  return s;
}

/// i.i.d. draws from a joint distribution.
inline SampleSet rvs(const JointDistribution& joint, int n, RandomStream& rng) {
  if (n < 1) throw invalid_argument_error("rvs: n must be >= 1");
  SampleSet s;
  s.samples = joint.sample(n, rng);
  s.seed_record = {RandomStream::generator_id(), rng.seed()};
  s.space = SampleSpace::physical;
  return s;
}

inline SampleSet monte_carlo(const JointDistribution& joint, int n,
                             RandomStream& rng) {
  return rvs(joint, n, rng);
}

enum class LhsCriterion { random, centered, maximin };

namespace detail {

// One LHS design on the unit hypercube: per dimension a random permutation of
// the n equal-probability bins, with the point placed randomly (or centrally)
// inside its bin. Draw order is fixed: per dimension, permutation first, then
// offsets.
inline Eigen::MatrixXd lhs_unit_design(int n, int d, bool centered,
                                       RandomStream& rng) {
  Eigen::MatrixXd u(n, d);
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int j = 0; j < d; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    for (int i = 0; i < n; ++i) {
      const double offset = centered ? 0.5 : rng.uniform01();
      u(i, j) = (perm[static_cast<std::size_t>(i)] + offset) / n;
    }
  }
  return u;
}

inline double min_pairwise_distance(const Eigen::MatrixXd& u) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < u.rows(); ++a)
    for (Eigen::Index b = a + 1; b < u.rows(); ++b)
      best = std::min(best, (u.row(a) - u.row(b)).norm());
  return best;
}

}  // namespace detail

/// Latin hypercube sampling over independent marginals. MaxiMin keeps the
/// best of `maximin_candidates` random designs by max-min pairwise distance
/// in the unit cube; candidate 1 equals the Random design for the same seed.
inline SampleSet latin_hypercube(const std::vector<Distribution>& marginals,
                                 int n, LhsCriterion criterion,
                                 RandomStream& rng,
                                 int maximin_candidates = 100) {
  if (n < 1) throw invalid_argument_error("latin_hypercube: n must be >= 1");
  if (marginals.empty())
    throw invalid_argument_error("latin_hypercube: needs marginals");
  const int d = static_cast<int>(marginals.size());

  Eigen::MatrixXd u;
  switch (criterion) {
    case LhsCriterion::random:
      u = detail::lhs_unit_design(n, d, false, rng);
      break;
    case LhsCriterion::centered:
      u = detail::lhs_unit_design(n, d, true, rng);
      break;
    case LhsCriterion::maximin: {
      double best = -1.0;
      for (int k = 0; k < maximin_candidates; ++k) {
        Eigen::MatrixXd cand = detail::lhs_unit_design(n, d, false, rng);
        const double score = detail::min_pairwise_distance(cand);
        if (score > best) {
          best = score;
          u = std::move(cand);
        }
      }
      break;
    }
  }

  SampleSet s;
  s.samples.resize(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      s.samples(i, j) =
          marginals[static_cast<std::size_t>(j)].icdf(clamp_unit(u(i, j)));
  s.seed_record = {RandomStream::generator_id(), rng.seed()};
  s.space = SampleSpace::physical;
  return s;
}

/// Joint-distribution overload; rejects anything but independent coupling.
inline SampleSet latin_hypercube(const JointDistribution& joint, int n,
                                 LhsCriterion criterion, RandomStream& rng,
                                 int maximin_candidates = 100) {
  if (!joint.independent_coupling())
    throw invalid_argument_error(
        "latin_hypercube: unsupported coupling (independent marginals only)");
  return latin_hypercube(joint.marginals(), n, criterion, rng,
                         maximin_candidates);
}

/// True stratified sampling: uniform draws within each stratum of the unit
/// cube, mapped through marginal quantiles; weights are volume/count.
inline SampleSet stratified(const RectangularStrata& strata,
                            const std::vector<Distribution>& marginals,
                            const std::vector<int>& per_stratum,
                            RandomStream& rng) {
  const auto k = strata.count();
  const int d = static_cast<int>(marginals.size());
  if (strata.dim() != d)
    throw invalid_argument_error("stratified: strata/marginal dim mismatch");
  if (static_cast<Eigen::Index>(per_stratum.size()) != k)
    throw invalid_argument_error("stratified: counts length mismatch");
  int n = 0;
  for (int c : per_stratum) {
    if (c < 1) throw invalid_argument_error("stratified: counts must be >= 1");
    n += c;
  }

  SampleSet s;
  s.samples.resize(n, d);
  Eigen::VectorXd w(n);
  int row = 0;
  for (Eigen::Index st = 0; st < k; ++st) {
    const int c = per_stratum[static_cast<std::size_t>(st)];
    for (int i = 0; i < c; ++i, ++row) {
      for (int j = 0; j < d; ++j) {
        const double lo = strata.lows()(st, j);
        const double hi = strata.highs()(st, j);
        const double u = lo + (hi - lo) * rng.uniform01();
        s.samples(row, j) =
            marginals[static_cast<std::size_t>(j)].icdf(clamp_unit(u));
      }
      w(row) = strata.volumes()(st) / c;
    }
  }
  s.weights = w;
  s.seed_record = {RandomStream::generator_id(), rng.seed()};
  s.space = SampleSpace::physical;
  return s;
}

/// Uniform samples in the simplex spanned by d+1 vertices, via sorted-uniform
/// spacings (flat Dirichlet barycentric coordinates).
inline SampleSet simplex(const Eigen::MatrixXd& vertices, int n,
                         RandomStream& rng) {
  const auto d = vertices.cols();
  if (vertices.rows() != d + 1)
    throw invalid_argument_error("simplex: needs (d+1) x d vertices");
  if (n < 1) throw invalid_argument_error("simplex: n must be >= 1");
  Eigen::MatrixXd edges(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    edges.row(i) = vertices.row(i + 1) - vertices.row(0);
  double log_fact = 0.0;
  for (Eigen::Index i = 2; i <= d; ++i) log_fact += std::log(double(i));
  const double volume =
      std::abs(edges.determinant()) / std::exp(log_fact);
  if (volume < 1e-14)
    throw invalid_argument_error("simplex: degenerate (volume < 1e-14)");

  SampleSet s;
  s.samples.resize(n, d);
  std::vector<double> cuts(static_cast<std::size_t>(d));
  for (int i = 0; i < n; ++i) {
    for (auto& c : cuts) c = rng.uniform01();
    std::sort(cuts.begin(), cuts.end());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
    double prev = 0.0;
    for (Eigen::Index v = 0; v <= d; ++v) {
      const double next = (v < d) ? cuts[static_cast<std::size_t>(v)] : 1.0;
      x += (next - prev) * vertices.row(v).transpose();
      prev = next;
    }
    s.samples.row(i) = x.transpose();
  }
  s.seed_record = {RandomStream::generator_id(), rng.seed()};
  s.space = SampleSpace::physical;
  return s;
}

using LogDensity = std::function<double(const Eigen::VectorXd&)>;

/// Draws from the proposal weighted by exp(log_target - log_proposal),
/// normalized. The proposal must dominate the target on its support.
inline SampleSet importance_sampling(const JointDistribution& proposal,
                                     const LogDensity& log_target, int n,
                                     RandomStream& rng) {
  if (n < 1) throw invalid_argument_error("importance_sampling: n must be >= 1");
  SampleSet s;
  s.samples = proposal.sample(n, rng);
  Eigen::VectorXd log_w(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = s.samples.row(i).transpose();
    log_w(i) = log_target(x) - proposal.log_pdf(x);
  }
  const double max_lw = log_w.maxCoeff();
  if (!std::isfinite(max_lw))
    throw degenerate_weights_error(
        "importance_sampling: all weights zero or non-finite");
  Eigen::VectorXd w = (log_w.array() - max_lw).exp();
  const double total = w.sum();
  if (!(total > 0.0) || !w.allFinite())
    throw degenerate_weights_error(
        "importance_sampling: degenerate weight normalization");
  s.weights = w / total;
  s.seed_record = {RandomStream::generator_id(), rng.seed()};
  s.space = SampleSpace::physical;
  return s;
}

/// Multinomial resampling by weight; returns an unweighted set of m rows.
inline SampleSet resample(const SampleSet& s, int m, RandomStream& rng) {
  if (m < 1) throw invalid_argument_error("resample: m must be >= 1");
  if (!s.weights)
    throw invalid_argument_error("resample: sample set has no weights");
  const auto& w = *s.weights;
  Eigen::VectorXd cumulative(w.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    acc += w(i);
    cumulative(i) = acc;
  }
  SampleSet out;
  out.samples.resize(m, s.samples.cols());
  for (int i = 0; i < m; ++i) {
    const double u = rng.uniform01() * acc;
    Eigen::Index lo = 0, hi = w.size() - 1;
    while (lo < hi) {
      const Eigen::Index mid = (lo + hi) / 2;
      if (cumulative(mid) < u)
        lo = mid + 1;
      else
        hi = mid;
    }
    out.samples.row(i) = s.samples.row(lo);
  }
  out.seed_record = {RandomStream::generator_id(), rng.seed()};
  out.space = s.space;
  return out;
}

}  // namespace uq
