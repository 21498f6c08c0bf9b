#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "support/test_support.hpp"
#include "uq/reliability.hpp"
#include "uq/testfunctions.hpp"

using Catch::Approx;
using uq::Distribution;
using uq::FormOptions;
using uq::LimitState;
using uq::ModelSpec;
using uq::NatafTransform;

namespace {

LimitState standard_limit_state(ModelSpec model, int d) {
  return LimitState(std::move(model),
                    NatafTransform::independent(std::vector<Distribution>(
                        d, Distribution::normal(0, 1))));
}

}  // namespace

TEST_CASE("form solves the linear gaussian case exactly", "[reliability]") {
  const double beta0 = 3.0;
  const auto ls = standard_limit_state(
      ModelSpec::scalar([&](const Eigen::VectorXd& u) { return beta0 - u(0); },
                        2),
      2);
  const auto fr = uq::form(ls, Eigen::VectorXd::Zero(2));
  REQUIRE(fr.converged);
  CHECK(fr.beta == Approx(3.0).margin(1e-6));
  CHECK(fr.u_star(0) == Approx(3.0).margin(1e-6));
  CHECK(fr.u_star(1) == Approx(0.0).margin(1e-6));
  CHECK(fr.pf == Approx(1.3499e-3).epsilon(1e-3));
  CHECK(fr.pf == uq::math::standard_normal_cdf(-fr.beta));
  CHECK(fr.alpha(0) == Approx(1.0).margin(1e-8));
  CHECK(fr.alpha.norm() == Approx(1.0).margin(1e-10));
}

TEST_CASE("form is exact over a randomized linear family", "[reliability]") {
  uq::RandomStream rng(404);
  for (int d : {2, 5, 10}) {
    for (int trial = 0; trial < 7; ++trial) {
      Eigen::VectorXd a(d);
      for (int j = 0; j < d; ++j) a(j) = rng.normal();
      if (a.norm() < 0.3) a(0) += 1.0;
      const double c = 1.0 + 2.5 * rng.uniform01();
      const auto ls =
          standard_limit_state(uq::testfunctions::linear_limit_state(a, c), d);
      const auto fr = uq::form(ls, Eigen::VectorXd::Zero(d));
      REQUIRE(fr.converged);
      CHECK(std::abs(fr.beta - c) <= 1e-6);
      CHECK(fr.pf == uq::math::standard_normal_cdf(-fr.beta));
      CHECK((fr.alpha - a / a.norm()).norm() <= 1e-6);
      CHECK(std::abs(fr.u_star.norm() - fr.beta) <= 1e-6);
    }
  }
}

TEST_CASE("form at a design-point start converges immediately",
          "[reliability]") {
  // g = 3 - |u| with radial gradient; u0 already on the limit surface
  const auto ls = standard_limit_state(
      ModelSpec::scalar(
          [](const Eigen::VectorXd& u) { return 3.0 - u.norm(); }, 2),
      2);
  Eigen::VectorXd u0(2);
  u0 << 3.0, 0.0;
  const auto fr = uq::form(ls, u0);
  REQUIRE(fr.converged);
  CHECK(fr.iterations <= 2);
  CHECK(fr.beta == Approx(3.0).margin(1e-8));
}

TEST_CASE("form reports non-convergence without throwing", "[reliability]") {
  const auto ls = standard_limit_state(
      ModelSpec::scalar(
          [](const Eigen::VectorXd& u) {
            return 2.0 - u(0) + 0.8 * std::sin(3.0 * u(1)) + 0.5 * u(1) * u(1);
          },
          2),
      2);
  FormOptions opt;
  opt.max_iter = 1;
  const auto fr = uq::form(ls, Eigen::VectorXd::Zero(2), opt);
  CHECK_FALSE(fr.converged);
  CHECK(fr.iterations == 1);
}

TEST_CASE("form rejects a vanishing gradient", "[reliability]") {
  const auto ls = standard_limit_state(
      ModelSpec::scalar([](const Eigen::VectorXd&) { return 1.0; }, 2), 2);
  CHECK_THROWS_AS(uq::form(ls, Eigen::VectorXd::Zero(2)), uq::numerical_error);
}

TEST_CASE("sorm on a linear limit state reduces to form", "[reliability]") {
  const auto ls = standard_limit_state(
      ModelSpec::scalar([](const Eigen::VectorXd& u) { return 2.5 - u(0); },
                        3),
      3);
  const auto fr = uq::form(ls, Eigen::VectorXd::Zero(3));
  REQUIRE(fr.converged);
  const auto sr = uq::sorm(fr, ls);
  CHECK(sr.curvatures.cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(std::abs(sr.pf - fr.pf) <= 1e-12);
}

TEST_CASE("sorm recovers the parabolic curvature and Breitung factor",
          "[reliability]") {
  const double curvature = 0.1;
  const auto ls = standard_limit_state(
      uq::testfunctions::parabolic_limit_state(3.0, curvature), 2);
  const auto fr = uq::form(ls, Eigen::VectorXd::Zero(2));
  REQUIRE(fr.converged);
  CHECK(fr.beta == Approx(3.0).margin(1e-6));
  const auto sr = uq::sorm(fr, ls);
  REQUIRE(sr.curvatures.size() == 1);
  // principal curvature of u1 = 3 + c*u2^2 is 2c (positive: curving away)
  CHECK(sr.curvatures(0) == Approx(2.0 * curvature).margin(1e-4));
  CHECK(sr.pf ==
        Approx(fr.pf / std::sqrt(1.0 + fr.beta * 2.0 * curvature))
            .epsilon(1e-4));
}

TEST_CASE("sorm is invariant under orthogonal input rotation",
          "[reliability]") {
  const double theta = 0.6;
  Eigen::Matrix2d rot;
  rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  const auto g = [](const Eigen::VectorXd& u) {
    return 3.0 - u(0) + 0.1 * u(1) * u(1);
  };
  const auto ls_orig = standard_limit_state(ModelSpec::scalar(g, 2), 2);
  const auto ls_rot = standard_limit_state(
      ModelSpec::scalar(
          [&](const Eigen::VectorXd& u) { return g(rot * u); }, 2),
      2);
  const auto fr_orig = uq::form(ls_orig, Eigen::VectorXd::Zero(2));
  const auto fr_rot = uq::form(ls_rot, Eigen::VectorXd::Zero(2));
  REQUIRE(fr_orig.converged);
  REQUIRE(fr_rot.converged);
  CHECK(fr_rot.beta == Approx(fr_orig.beta).margin(1e-6));
  const auto sr_orig = uq::sorm(fr_orig, ls_orig);
  const auto sr_rot = uq::sorm(fr_rot, ls_rot);
  CHECK(sr_rot.curvatures(0) == Approx(sr_orig.curvatures(0)).margin(1e-4));
  CHECK(sr_rot.pf == Approx(sr_orig.pf).epsilon(1e-6));
}

TEST_CASE("sorm refuses an inapplicable Breitung correction",
          "[reliability]") {
  const auto ls = standard_limit_state(
      ModelSpec::scalar(
          [](const Eigen::VectorXd& u) {
            return 3.0 - u(0) - 0.5 * u(1) * u(1);
          },
          2),
      2);
  const auto fr = uq::form(ls, Eigen::VectorXd::Zero(2));
  REQUIRE(fr.converged);
  CHECK_THROWS_AS(uq::sorm(fr, ls), uq::numerical_error);
}

TEST_CASE("sorm requires a converged form result", "[reliability]") {
  const auto ls = standard_limit_state(
      ModelSpec::scalar([](const Eigen::VectorXd& u) { return 3.0 - u(0); },
                        2),
      2);
  uq::FormResult fr;
  fr.converged = false;
  CHECK_THROWS_AS(uq::sorm(fr, ls), uq::invalid_argument_error);
}

TEST_CASE("subset simulation with an always-failed state returns pf=1",
          "[reliability]") {
  const auto ls = standard_limit_state(
      ModelSpec::scalar([](const Eigen::VectorXd&) { return -1.0; }, 2), 2);
  uq::SubsetOptions opt;
  opt.n_per_level = 200;
  opt.seed = 5;
  const auto sr = uq::subset_simulation(ls, opt);
  CHECK(sr.pf == 1.0);
  CHECK(sr.n_levels == 1);
  CHECK(sr.converged);
}

TEST_CASE("subset simulation handles a probability-1/2 event",
          "[reliability]") {
  const auto ls = standard_limit_state(
      ModelSpec::scalar([](const Eigen::VectorXd& u) { return -u(0); }, 2), 2);
  uq::SubsetOptions opt;
  opt.n_per_level = 1000;
  opt.p0 = 0.5;
  opt.seed = 11;
  const auto sr = uq::subset_simulation(ls, opt);
  CHECK(sr.pf == Approx(0.5).margin(0.05));
  CHECK(sr.n_levels <= 2);
}

TEST_CASE("subset simulation estimates a rare linear event across seeds",
          "[reliability]") {
  const double pf_true = uq::math::standard_normal_cdf(-3.5);
  const auto ls = standard_limit_state(
      ModelSpec::scalar([](const Eigen::VectorXd& u) { return 3.5 - u(0); },
                        2),
      2);
  int within_2cov = 0;
  std::vector<double> estimates;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    uq::SubsetOptions opt;
    opt.n_per_level = 1000;
    opt.p0 = 0.1;
    opt.seed = seed;
    const auto sr = uq::subset_simulation(ls, opt);
    REQUIRE(sr.converged);
    CHECK(sr.pf > 0.0);
    CHECK(sr.pf <= 1.0);
    for (std::size_t j = 1; j < sr.thresholds.size(); ++j)
      CHECK(sr.thresholds[j] < sr.thresholds[j - 1]);
    CHECK(sr.thresholds.back() <= 0.0);
    estimates.push_back(sr.pf);
    if (std::abs(sr.pf - pf_true) <= 2.0 * sr.cov * sr.pf) ++within_2cov;
  }
  CHECK(within_2cov >= 8);
  std::sort(estimates.begin(), estimates.end());
  const double median = 0.5 * (estimates[4] + estimates[5]);
  CHECK(median / pf_true <= 1.5);
  CHECK(pf_true / median <= 1.5);
}

TEST_CASE("subset simulation is bitwise reproducible", "[reliability]") {
  const auto ls = standard_limit_state(
      ModelSpec::scalar([](const Eigen::VectorXd& u) { return 2.0 - u(0); },
                        2),
      2);
  uq::SubsetOptions opt;
  opt.n_per_level = 500;
  opt.seed = 33;
  const auto a = uq::subset_simulation(ls, opt);
  const auto b = uq::subset_simulation(ls, opt);
  CHECK(a.pf == b.pf);
  CHECK(a.cov == b.cov);
  CHECK(a.thresholds == b.thresholds);
}

TEST_CASE("subset simulation validates the seed count", "[reliability]") {
  const auto ls = standard_limit_state(
      ModelSpec::scalar([](const Eigen::VectorXd& u) { return 2.0 - u(0); },
                        2),
      2);
  uq::SubsetOptions opt;
  opt.n_per_level = 1000;
  opt.p0 = 0.0003;  // n*p0 = 0.3 is not an integer
  CHECK_THROWS_AS(uq::subset_simulation(ls, opt), uq::invalid_argument_error);
}

TEST_CASE("limit state evaluation maps through the transform",
          "[reliability]") {
  // lognormal marginal: failure at the 90% quantile in physical space means
  // beta = Phi^-1(0.9) in standard normal space
  const auto marginal = Distribution::lognormal(0.0, 1.0);
  const double q90 = marginal.icdf(0.9);
  const LimitState ls(
      ModelSpec::scalar(
          [&](const Eigen::VectorXd& x) { return q90 - x(0); }, 1),
      NatafTransform::independent({marginal}));
  const auto fr = uq::form(ls, Eigen::VectorXd::Zero(1));
  REQUIRE(fr.converged);
  CHECK(fr.beta == Approx(uq::math::standard_normal_icdf(0.9)).margin(1e-5));
  CHECK(fr.x_star(0) == Approx(q90).epsilon(1e-6));
}
