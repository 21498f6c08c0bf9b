#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "support/test_support.hpp"
#include "uq/pce.hpp"
#include "uq/sampling.hpp"
#include "uq/sensitivity.hpp"
#include "uq/surrogate_io.hpp"

using Catch::Approx;
using uq::Distribution;
using uq::PceBasis;
using uq::PceFitOptions;
using uq::PceRegressor;
using uq::PolynomialFamily;
using uq::Truncation;

namespace {

int index_position(const PceBasis& basis, const uq::MultiIndex& idx) {
  const auto it = std::find(basis.multi_indices.begin(),
                            basis.multi_indices.end(), idx);
  REQUIRE(it != basis.multi_indices.end());
  return static_cast<int>(it - basis.multi_indices.begin());
}

}  // namespace

TEST_CASE("orthonormal polynomial values", "[pce]") {
  CHECK(uq::polynomial_eval(PolynomialFamily::hermite, 0, 0.37) == 1.0);
  CHECK(uq::polynomial_eval(PolynomialFamily::legendre, 0, -0.9) == 1.0);
  // He2(x) = x^2 - 1 normalized by sqrt(2!)
  CHECK(uq::polynomial_eval(PolynomialFamily::hermite, 2, 0.0) ==
        Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-14));
  // P2(x) = (3x^2 - 1)/2 scaled by sqrt(5)
  CHECK(uq::polynomial_eval(PolynomialFamily::legendre, 2, 0.5) ==
        Approx(std::sqrt(5.0) * (3.0 * 0.25 - 1.0) / 2.0).epsilon(1e-14));
}

TEST_CASE("polynomials are orthonormal under their weights", "[pce]") {
  // quadrature oracle, independent of the recurrence being checked
  for (int j = 0; j <= 6; ++j) {
    for (int k = 0; k <= 6; ++k) {
      const double hermite = testsupport::simpson(
          [&](double z) {
            return uq::polynomial_eval(PolynomialFamily::hermite, j, z) *
                   uq::polynomial_eval(PolynomialFamily::hermite, k, z) *
                   std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
          },
          -14.0, 14.0, 1e-11);
      const double legendre = testsupport::simpson(
          [&](double z) {
            return uq::polynomial_eval(PolynomialFamily::legendre, j, z) *
                   uq::polynomial_eval(PolynomialFamily::legendre, k, z) * 0.5;
          },
          -1.0, 1.0, 1e-11);
      const double expected = (j == k) ? 1.0 : 0.0;
      CHECK(hermite == Approx(expected).margin(1e-8));
      CHECK(legendre == Approx(expected).margin(1e-8));
    }
  }
}

TEST_CASE("basis truncation sizes and ordering", "[pce]") {
  CHECK(uq::build_multi_indices(Truncation::total_degree, 2, 2).size() == 6);
  CHECK(uq::build_multi_indices(Truncation::tensor_product, 2, 2).size() == 9);
  // C(d+p, p) for a few shapes
  CHECK(uq::build_multi_indices(Truncation::total_degree, 3, 4).size() == 35);
  CHECK(uq::build_multi_indices(Truncation::tensor_product, 3, 2).size() == 27);

  const auto indices = uq::build_multi_indices(Truncation::total_degree, 2, 3);
  CHECK(indices.front() == uq::MultiIndex({0, 0}));
  for (std::size_t i = 1; i < indices.size(); ++i) {
    int prev = 0, cur = 0;
    for (int v : indices[i - 1]) prev += v;
    for (int v : indices[i]) cur += v;
    CHECK(prev <= cur);  // graded ordering
  }
}

TEST_CASE("hyperbolic truncation prunes interactions but keeps pure powers",
          "[pce]") {
  const auto hyperbolic =
      uq::build_multi_indices(Truncation::hyperbolic, 3, 3, 0.5);
  const auto total = uq::build_multi_indices(Truncation::total_degree, 3, 3);
  const std::set<uq::MultiIndex> total_set(total.begin(), total.end());
  CHECK(hyperbolic.size() < total.size());
  for (const auto& idx : hyperbolic) CHECK(total_set.count(idx) == 1);
  const std::set<uq::MultiIndex> hyper_set(hyperbolic.begin(),
                                           hyperbolic.end());
  for (int p = 1; p <= 3; ++p) {
    CHECK(hyper_set.count({p, 0, 0}) == 1);
    CHECK(hyper_set.count({0, p, 0}) == 1);
    CHECK(hyper_set.count({0, 0, p}) == 1);
  }
  // direct enumeration oracle of the q-norm rule
  std::size_t expected = 0;
  for (int a = 0; a <= 3; ++a)
    for (int b = 0; b <= 3; ++b)
      for (int c = 0; c <= 3; ++c) {
        const double s = std::sqrt(a * 1.0) + std::sqrt(b * 1.0) +
                         std::sqrt(c * 1.0);
        if (s * s <= 3.0 + 1e-9) ++expected;
      }
  CHECK(hyperbolic.size() == expected);
}

TEST_CASE("hyperbolic with q=1 equals total degree exactly", "[pce]") {
  const auto a = uq::build_multi_indices(Truncation::hyperbolic, 4, 5, 1.0);
  const auto b = uq::build_multi_indices(Truncation::total_degree, 4, 5);
  CHECK(a == b);
}

TEST_CASE("least squares recovers an in-basis polynomial exactly", "[pce]") {
  const std::vector<Distribution> marginals = {Distribution::normal(0, 1),
                                               Distribution::normal(0, 1)};
  const PceBasis basis = uq::basis_for(marginals, Truncation::total_degree, 2);
  uq::RandomStream rng(2);
  const auto train =
      uq::latin_hypercube(marginals, 50, uq::LhsCriterion::random, rng);
  Eigen::VectorXd y(50);
  for (int i = 0; i < 50; ++i) y(i) = 2.0 + 3.0 * train.samples(i, 0);
  const auto model = uq::pce_fit(train.samples, y, marginals, basis);

  CHECK(model.coefficients(index_position(basis, {0, 0})) ==
        Approx(2.0).margin(1e-8));
  CHECK(model.coefficients(index_position(basis, {1, 0})) ==
        Approx(3.0).margin(1e-8));
  for (int t = 0; t < basis.size(); ++t) {
    const auto& idx = basis.multi_indices[static_cast<std::size_t>(t)];
    if (idx != uq::MultiIndex{0, 0} && idx != uq::MultiIndex{1, 0})
      CHECK(std::abs(model.coefficients(t)) <= 1e-8);
  }

  // moments follow from the coefficients of the orthonormal basis
  const auto [mean, variance] = uq::pce_moments(model);
  CHECK(mean == Approx(2.0).margin(1e-8));
  CHECK(variance == Approx(9.0).margin(1e-6));

  // exactness extends to arbitrary query points
  uq::RandomStream rng2(3);
  Eigen::MatrixXd query(20, 2);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 2; ++j) query(i, j) = 2.5 * rng2.normal();
  const Eigen::VectorXd pred = uq::pce_predict(model, query);
  for (int i = 0; i < 20; ++i)
    CHECK(pred(i) == Approx(2.0 + 3.0 * query(i, 0)).margin(1e-8));
}

TEST_CASE("legendre projection recovers a unit coefficient", "[pce]") {
  const std::vector<Distribution> marginals = {Distribution::uniform(-1, 1),
                                               Distribution::uniform(-1, 1)};
  const PceBasis basis = uq::basis_for(marginals, Truncation::total_degree, 3);
  uq::RandomStream rng(5);
  const auto train =
      uq::latin_hypercube(marginals, 80, uq::LhsCriterion::random, rng);
  Eigen::VectorXd y(80);
  for (int i = 0; i < 80; ++i)
    y(i) = uq::polynomial_eval(PolynomialFamily::legendre, 2,
                               train.samples(i, 0));
  const auto model = uq::pce_fit(train.samples, y, marginals, basis);
  CHECK(model.coefficients(index_position(basis, {2, 0})) ==
        Approx(1.0).margin(1e-8));
}

TEST_CASE("constant expansions predict their constant", "[pce]") {
  const std::vector<Distribution> marginals = {Distribution::normal(0, 1)};
  const PceBasis basis = uq::basis_for(marginals, Truncation::total_degree, 3);
  uq::PceModel model;
  model.basis = basis;
  model.marginals = marginals;
  model.coefficients = Eigen::VectorXd::Zero(basis.size());
  model.coefficients(0) = 5.0;
  const Eigen::VectorXd pred =
      uq::pce_predict(model, (Eigen::MatrixXd(3, 1) << -1.0, 0.0, 2.0).finished());
  for (int i = 0; i < 3; ++i) CHECK(pred(i) == 5.0);
  CHECK(model.variance() == 0.0);
}

TEST_CASE("pce moments agree with brute-force monte carlo of the expansion",
          "[pce]") {
  const std::vector<Distribution> marginals = {Distribution::normal(0, 1),
                                               Distribution::normal(0, 1)};
  const PceBasis basis = uq::basis_for(marginals, Truncation::total_degree, 2);
  uq::PceModel model;
  model.basis = basis;
  model.marginals = marginals;
  model.coefficients = Eigen::VectorXd::Zero(basis.size());
  model.coefficients(index_position(basis, {0, 0})) = 1.5;
  model.coefficients(index_position(basis, {1, 0})) = 0.8;
  model.coefficients(index_position(basis, {0, 2})) = -0.6;
  model.coefficients(index_position(basis, {1, 1})) = 0.4;

  uq::RandomStream rng(31);
  const int n = 1000000;
  Eigen::MatrixXd x(n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 2; ++j) x(i, j) = rng.normal();
  const Eigen::VectorXd y = uq::pce_predict(model, x);
  const double mc_mean = y.mean();
  const double mc_var = (y.array() - mc_mean).square().mean();
  const auto [mean, variance] = uq::pce_moments(model);
  CHECK(mc_mean == Approx(mean).margin(4.0 * std::sqrt(variance / n)));
  CHECK(mc_var == Approx(variance).epsilon(0.01));
}

TEST_CASE("lars activates the truly correlated term first", "[pce]") {
  const std::vector<Distribution> marginals = {Distribution::normal(0, 1),
                                               Distribution::normal(0, 1)};
  const PceBasis basis = uq::basis_for(marginals, Truncation::total_degree, 3);
  REQUIRE(basis.size() == 10);
  uq::RandomStream rng(7);
  const auto train =
      uq::latin_hypercube(marginals, 60, uq::LhsCriterion::random, rng);
  Eigen::VectorXd y(60);
  for (int i = 0; i < 60; ++i) y(i) = 3.0 * train.samples(i, 1);
  const Eigen::MatrixXd psi =
      uq::pce_design_matrix(basis, marginals, train.samples);
  const auto order = uq::detail::lars_activation_order(psi, y, 9);
  REQUIRE_FALSE(order.empty());
  CHECK(order[0] == index_position(basis, {0, 1}));

  PceFitOptions opt;
  opt.regressor = PceRegressor::lars;
  const auto model = uq::pce_fit(train.samples, y, marginals, basis, opt);
  CHECK(model.coefficients(index_position(basis, {0, 1})) ==
        Approx(3.0).margin(1e-8));
  REQUIRE(model.validation_error.has_value());
  CHECK(*model.validation_error <= 1e-12);
}

TEST_CASE("ridge shrinks but stays close on clean data", "[pce]") {
  const std::vector<Distribution> marginals = {Distribution::normal(0, 1)};
  const PceBasis basis = uq::basis_for(marginals, Truncation::total_degree, 2);
  uq::RandomStream rng(11);
  const auto train =
      uq::latin_hypercube(marginals, 40, uq::LhsCriterion::random, rng);
  Eigen::VectorXd y(40);
  for (int i = 0; i < 40; ++i) y(i) = 2.0 + 3.0 * train.samples(i, 0);
  PceFitOptions opt;
  opt.regressor = PceRegressor::ridge;
  opt.ridge_lambda = 1e-8;
  const auto model = uq::pce_fit(train.samples, y, marginals, basis, opt);
  CHECK(model.coefficients(0) == Approx(2.0).margin(1e-5));
  CHECK(model.coefficients(index_position(basis, {1})) ==
        Approx(3.0).margin(1e-5));
}

TEST_CASE("rank-deficient least squares suggests alternatives", "[pce]") {
  const std::vector<Distribution> marginals = {Distribution::normal(0, 1),
                                               Distribution::normal(0, 1)};
  const PceBasis basis = uq::basis_for(marginals, Truncation::total_degree, 4);
  uq::RandomStream rng(13);
  const auto train =
      uq::latin_hypercube(marginals, 8, uq::LhsCriterion::random, rng);
  Eigen::VectorXd y = train.samples.col(0);
  try {
    uq::pce_fit(train.samples, y, marginals, basis);
    FAIL("expected rank-deficiency error");
  } catch (const uq::numerical_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("ridge") != std::string::npos);
    CHECK(msg.find("lars") != std::string::npos);
  }
}

TEST_CASE("pce save/load round-trips bit-exactly", "[pce]") {
  const std::vector<Distribution> marginals = {
      Distribution::uniform(-std::numbers::pi, std::numbers::pi),
      Distribution::normal(0, 2)};
  const PceBasis basis =
      uq::basis_for(marginals, Truncation::hyperbolic, 4, 0.75);
  uq::RandomStream rng(17);
  const auto train =
      uq::latin_hypercube(marginals, 100, uq::LhsCriterion::random, rng);
  Eigen::VectorXd y(100);
  for (int i = 0; i < 100; ++i)
    y(i) = std::sin(train.samples(i, 0)) + 0.3 * train.samples(i, 1);
  const auto model = uq::pce_fit(train.samples, y, marginals, basis);

  const auto j = uq::io::pce_to_json(model);
  CHECK(j.at("schema") == "uq.surrogate.pce/1");
  const auto reloaded = uq::io::pce_from_json(j);
  CHECK(reloaded.coefficients == model.coefficients);
  CHECK(reloaded.basis.multi_indices == model.basis.multi_indices);

  const auto s1 = uq::pce_sensitivity(model);
  const auto s2 = uq::pce_sensitivity(reloaded);
  CHECK(s1.first_order == s2.first_order);
  CHECK(s1.total_order == s2.total_order);

  Eigen::MatrixXd q(5, 2);
  q << 0.1, 0.2, -1.0, 0.5, 2.0, -0.3, 0.7, 1.1, -2.2, 0.0;
  CHECK(uq::pce_predict(model, q) == uq::pce_predict(reloaded, q));
}

TEST_CASE("gpr save/load round-trips predictions", "[pce]") {
  Eigen::MatrixXd x(6, 1);
  Eigen::VectorXd y(6);
  for (int i = 0; i < 6; ++i) {
    x(i, 0) = 0.6 * i;
    y(i) = std::sin(x(i, 0));
  }
  const auto model = uq::gpr_build(
      x, y, uq::Kernel::isotropic(uq::KernelKind::matern32, 1, 1.2, 0.9),
      1e-8);
  const auto reloaded = uq::io::gpr_from_json(uq::io::gpr_to_json(model));
  Eigen::MatrixXd q(4, 1);
  q << 0.3, 1.1, 2.2, 3.0;
  const auto [m1, v1] = uq::gpr_predict(model, q);
  const auto [m2, v2] = uq::gpr_predict(reloaded, q);
  CHECK(m1 == m2);
  CHECK(v1 == v2);
}
