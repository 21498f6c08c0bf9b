#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "support/test_support.hpp"
#include "uq/mcmc.hpp"

using Catch::Approx;
using uq::ChainHistory;
using uq::McmcOptions;

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Eigen::MatrixXd single_init(double x) {
  Eigen::MatrixXd m(1, 1);
  m << x;
  return m;
}
}  // namespace

TEST_CASE("mh samples a uniform target", "[mcmc]") {
  const auto log_target = [](const Eigen::VectorXd& x) {
    return (x(0) >= 0.0 && x(0) <= 1.0) ? 0.0 : kNegInf;
  };
  McmcOptions opt;
  opt.n_samples = 10000;
  opt.burn = 500;
  opt.jump = 25;
  opt.seed = 77;
  const ChainHistory h = uq::mcmc_mh(log_target, Eigen::VectorXd::Constant(1, 0.5),
                                     single_init(0.5), opt);
  REQUIRE(h.n_saved() == 10000);
  const double ks = testsupport::ks_statistic(
      testsupport::to_vector(h.states[0].col(0)),
      [](double x) { return std::min(1.0, std::max(0.0, x)); });
  CHECK(ks < 1.95 / std::sqrt(10000.0));
  CHECK(h.acceptance_rate(0) > 0.0);
  CHECK(h.acceptance_rate(0) <= 1.0);
}

TEST_CASE("mh with a vanishing proposal freezes", "[mcmc]") {
  const auto log_target = [](const Eigen::VectorXd& x) {
    return -0.5 * x.squaredNorm();
  };
  McmcOptions opt;
  opt.n_samples = 200;
  opt.seed = 5;
  const ChainHistory h = uq::mcmc_mh(
      log_target, Eigen::VectorXd::Constant(1, 1e-12), single_init(0.3), opt);
  CHECK(h.acceptance_rate(0) == Approx(1.0).margin(1e-9));
  CHECK((h.states[0].col(0).array() - 0.3).abs().maxCoeff() < 1e-9);
}

TEST_CASE("mh matches the brute-force stationary distribution of a 3-state "
          "target", "[mcmc]") {
  // target probabilities on cells centered at {0,1,2}
  const Eigen::Vector3d p(0.2, 0.5, 0.3);
  const auto log_target = [&](const Eigen::VectorXd& x) {
    const double k = std::round(x(0));
    if (k < 0.0 || k > 2.0 || std::abs(x(0) - k) > 0.5) return kNegInf;
    return std::log(p(static_cast<int>(k)));
  };

  // oracle: transition-matrix power of the discrete +/-1 random-walk MH chain
  Eigen::Matrix3d t = Eigen::Matrix3d::Zero();
  for (int k = 0; k < 3; ++k) {
    double stay = 1.0;
    for (int j : {k - 1, k + 1}) {
      if (j < 0 || j > 2) continue;
      const double move = 0.5 * std::min(1.0, p(j) / p(k));
      t(k, j) = move;
      stay -= move;
    }
    t(k, k) = stay;
  }
  Eigen::Matrix3d power = Eigen::Matrix3d::Identity();
  for (int i = 0; i < 256; ++i) power *= t;
  const Eigen::Vector3d stationary = power.row(0).transpose();

  McmcOptions opt;
  opt.n_samples = 100000;
  opt.burn = 1000;
  opt.seed = 2024;
  const ChainHistory h = uq::mcmc_mh(
      log_target, Eigen::VectorXd::Constant(1, 1.0), single_init(1.0), opt);
  Eigen::Vector3d freq = Eigen::Vector3d::Zero();
  for (Eigen::Index i = 0; i < h.n_saved(); ++i)
    freq(static_cast<int>(std::round(h.states[0](i, 0)))) += 1.0;
  freq /= static_cast<double>(h.n_saved());

  const double tv = 0.5 * (freq - stationary).cwiseAbs().sum();
  CHECK(tv <= 1e-2);
}

TEST_CASE("mh requires a finite log target at the start", "[mcmc]") {
  McmcOptions opt;
  opt.n_samples = 10;
  CHECK_THROWS_AS(
      uq::mcmc_mh([](const Eigen::VectorXd&) { return kNegInf; },
                  Eigen::VectorXd::Ones(1), single_init(0.0), opt),
      uq::invalid_argument_error);
}

TEST_CASE("mh is bit-reproducible and respects burn/jump bookkeeping",
          "[mcmc]") {
  const auto log_target = [](const Eigen::VectorXd& x) {
    return -0.5 * x.squaredNorm();
  };
  McmcOptions opt;
  opt.n_samples = 11;
  opt.burn = 7;
  opt.jump = 3;
  opt.seed = 123;
  Eigen::MatrixXd init(2, 2);
  init << 0.1, -0.2, 1.0, 0.5;
  const ChainHistory a =
      uq::mcmc_mh(log_target, Eigen::VectorXd::Ones(2), init, opt);
  const ChainHistory b =
      uq::mcmc_mh(log_target, Eigen::VectorXd::Ones(2), init, opt);
  REQUIRE(a.n_chains() == 2);
  CHECK(a.n_saved() == 11);
  CHECK(a.states[0] == b.states[0]);
  CHECK(a.states[1] == b.states[1]);
  CHECK(a.acceptance_rate == b.acceptance_rate);
  for (Eigen::Index i = 0; i < a.log_target[0].size(); ++i)
    CHECK(std::isfinite(a.log_target[0](i)));
}

TEST_CASE("mmh marginals remain standard normal without a constraint",
          "[mcmc]") {
  const auto normal_lm = [](double x) { return -0.5 * x * x; };
  McmcOptions opt;
  opt.n_samples = 10000;
  opt.burn = 500;
  opt.jump = 10;
  opt.seed = 99;
  Eigen::MatrixXd init(1, 2);
  init << 0.0, 0.0;
  const ChainHistory h = uq::mcmc_mmh({normal_lm, normal_lm}, std::nullopt,
                                      Eigen::VectorXd::Ones(2), init, opt);
  for (int j = 0; j < 2; ++j) {
    const double ks = testsupport::ks_statistic(
        testsupport::to_vector(h.states[0].col(j)),
        [](double x) { return uq::math::standard_normal_cdf(x); });
    CHECK(ks < 1.95 / std::sqrt(10000.0));
  }
}

TEST_CASE("mmh with an always-false constraint never moves", "[mcmc]") {
  const auto normal_lm = [](double x) { return -0.5 * x * x; };
  McmcOptions opt;
  opt.n_samples = 100;
  opt.seed = 4;
  Eigen::MatrixXd init(1, 2);
  init << 0.4, -1.0;
  const ChainHistory h = uq::mcmc_mmh(
      {normal_lm, normal_lm},
      uq::Constraint([](const Eigen::VectorXd&) { return false; }),
      Eigen::VectorXd::Ones(2), init, opt);
  CHECK(h.acceptance_rate(0) == 0.0);
  for (Eigen::Index i = 0; i < h.n_saved(); ++i) {
    CHECK(h.states[0](i, 0) == 0.4);
    CHECK(h.states[0](i, 1) == -1.0);
  }
}

TEST_CASE("mmh constraint confines every saved state", "[mcmc]") {
  const auto normal_lm = [](double x) { return -0.5 * x * x; };
  McmcOptions opt;
  opt.n_samples = 2000;
  opt.seed = 14;
  Eigen::MatrixXd init(1, 2);
  init << -0.5, 0.2;
  const ChainHistory h = uq::mcmc_mmh(
      {normal_lm, normal_lm},
      uq::Constraint([](const Eigen::VectorXd& u) { return u(0) <= 0.0; }),
      Eigen::VectorXd::Ones(2), init, opt);
  for (Eigen::Index i = 0; i < h.n_saved(); ++i)
    CHECK(h.states[0](i, 0) <= 0.0);
  CHECK(h.acceptance_rate(0) > 0.0);
}

TEST_CASE("stretch sampler recovers standard normal moments", "[mcmc]") {
  const auto log_target = [](const Eigen::VectorXd& x) {
    return -0.5 * x.squaredNorm();
  };
  McmcOptions opt;
  opt.n_samples = 1000;  // x 10 walkers = 1e4 pooled states
  opt.burn = 200;
  opt.jump = 5;
  opt.seed = 31;
  Eigen::MatrixXd init(10, 1);
  for (int w = 0; w < 10; ++w) init(w, 0) = -1.0 + 0.2 * w + 0.01;
  const ChainHistory h = uq::mcmc_stretch(log_target, 2.0, init, opt);
  const Eigen::MatrixXd pooled = h.pooled();
  REQUIRE(pooled.rows() == 10000);
  const double mean = pooled.col(0).mean();
  const double var = (pooled.col(0).array() - mean).square().mean();
  CHECK(mean == Approx(0.0).margin(0.05));
  CHECK(var == Approx(1.0).margin(0.1));
}

TEST_CASE("stretch with a=1 never moves", "[mcmc]") {
  const auto log_target = [](const Eigen::VectorXd& x) {
    return -0.5 * x.squaredNorm();
  };
  McmcOptions opt;
  opt.n_samples = 50;
  opt.seed = 8;
  Eigen::MatrixXd init(6, 1);
  for (int w = 0; w < 6; ++w) init(w, 0) = 0.1 * (w + 1);
  const ChainHistory h = uq::mcmc_stretch(log_target, 1.0, init, opt);
  for (int w = 0; w < 6; ++w)
    for (Eigen::Index i = 0; i < h.n_saved(); ++i)
      CHECK(h.states[static_cast<std::size_t>(w)](i, 0) == init(w, 0));
}

TEST_CASE("stretch is affine-equivariant under target shifts", "[mcmc]") {
  // paired same-seed runs track each other exactly modulo the shift; the
  // window is kept short because the move amplifies rounding differences
  const double shift = 3.5;
  const auto base = [](const Eigen::VectorXd& x) {
    return -0.5 * x.squaredNorm();
  };
  const auto shifted = [&](const Eigen::VectorXd& x) {
    return -0.5 * (x.array() - shift).matrix().squaredNorm();
  };
  McmcOptions opt;
  opt.n_samples = 100;
  opt.seed = 55;
  Eigen::MatrixXd init(8, 1);
  for (int w = 0; w < 8; ++w) init(w, 0) = -0.7 + 0.2 * w;
  const ChainHistory a = uq::mcmc_stretch(base, 2.0, init, opt);
  const ChainHistory b =
      uq::mcmc_stretch(shifted, 2.0, init.array() + shift, opt);
  for (int w = 0; w < 8; ++w)
    CHECK(((b.states[static_cast<std::size_t>(w)].col(0).array() -
            a.states[static_cast<std::size_t>(w)].col(0).array()) -
           shift)
              .abs()
              .maxCoeff() <= 1e-9);
  CHECK(b.pooled().col(0).mean() - a.pooled().col(0).mean() ==
        Approx(shift).margin(1e-9));
}

TEST_CASE("stretch validates its ensemble", "[mcmc]") {
  const auto log_target = [](const Eigen::VectorXd& x) {
    return -0.5 * x.squaredNorm();
  };
  McmcOptions opt;
  opt.n_samples = 10;
  Eigen::MatrixXd too_few(3, 1);
  too_few << 0.0, 0.5, 1.0;
  CHECK_THROWS_AS(uq::mcmc_stretch(log_target, 2.0, too_few, opt),
                  uq::invalid_argument_error);
  Eigen::MatrixXd dup(4, 1);
  dup << 0.0, 0.5, 0.5, 1.0;
  CHECK_THROWS_AS(uq::mcmc_stretch(log_target, 2.0, dup, opt),
                  uq::invalid_argument_error);
}
