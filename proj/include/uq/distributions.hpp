#pragma once

// Parametric univariate distributions. Parameter conventions (also the
// external config contract, see README):
//
//   normal       mean, std          std > 0
//   lognormal    mu, sigma          of the underlying normal; sigma > 0
//   uniform      a, b               a < b
//   exponential  rate               rate > 0
//   gamma        shape, scale       both > 0
//   beta         alpha, beta        both > 0, support (0,1)
//   weibull      shape, scale       both > 0
//   gumbel       loc, scale         scale > 0 (max-type)
//   laplace      loc, scale         scale > 0
//   logistic     loc, scale         scale > 0
//   binomial     n, p               integer n >= 1, p in (0,1)
//   poisson      rate               rate > 0
//
// Objects are immutable after construction; invalid parameters are rejected
// at construction so every evaluation surface may assume validity.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "uq/errors.hpp"
#include "uq/math/special.hpp"
#include "uq/random.hpp"

namespace uq {

enum class Family {
  normal,
  lognormal,
  uniform,
  exponential,
  gamma,
  beta,
  weibull,
  gumbel,
  laplace,
  logistic,
  binomial,
  poisson
};

inline const char* family_name(Family f) {
  switch (f) {
    case Family::normal: return "normal";
    case Family::lognormal: return "lognormal";
    case Family::uniform: return "uniform";
    case Family::exponential: return "exponential";
    case Family::gamma: return "gamma";
    case Family::beta: return "beta";
    case Family::weibull: return "weibull";
    case Family::gumbel: return "gumbel";
    case Family::laplace: return "laplace";
    case Family::logistic: return "logistic";
    case Family::binomial: return "binomial";
    case Family::poisson: return "poisson";
  }
  return "?";
}

/// Closed-form moments; absent when undefined for the family/parameters.
struct Moments {
  std::optional<double> mean;
  std::optional<double> variance;
  std::optional<double> skewness;
  std::optional<double> excess_kurtosis;
};

class Distribution {
 public:
  static Distribution normal(double mean, double std) {
    require(std > 0.0, "normal: std must be > 0");
    return {Family::normal, mean, std};
  }
  static Distribution lognormal(double mu, double sigma) {
    require(sigma > 0.0, "lognormal: sigma must be > 0");
    return {Family::lognormal, mu, sigma};
  }
  static Distribution uniform(double a, double b) {
    require(a < b, "uniform: requires a < b");
    return {Family::uniform, a, b};
  }
  static Distribution exponential(double rate) {
    require(rate > 0.0, "exponential: rate must be > 0");
    return {Family::exponential, rate, 0.0};
  }
  static Distribution gamma(double shape, double scale) {
    require(shape > 0.0 && scale > 0.0, "gamma: shape and scale must be > 0");
    return {Family::gamma, shape, scale};
  }
  static Distribution beta(double alpha, double beta_) {
    require(alpha > 0.0 && beta_ > 0.0, "beta: alpha and beta must be > 0");
    return {Family::beta, alpha, beta_};
  }
  static Distribution weibull(double shape, double scale) {
    require(shape > 0.0 && scale > 0.0, "weibull: shape and scale must be > 0");
    return {Family::weibull, shape, scale};
  }
  static Distribution gumbel(double loc, double scale) {
    require(scale > 0.0, "gumbel: scale must be > 0");
    return {Family::gumbel, loc, scale};
  }
  static Distribution laplace(double loc, double scale) {
    require(scale > 0.0, "laplace: scale must be > 0");
    return {Family::laplace, loc, scale};
  }
  static Distribution logistic(double loc, double scale) {
    require(scale > 0.0, "logistic: scale must be > 0");
    return {Family::logistic, loc, scale};
  }
  static Distribution binomial(int n, double p) {
    require(n >= 1, "binomial: n must be >= 1");
    require(p > 0.0 && p < 1.0, "binomial: p must lie in (0,1)");
    return {Family::binomial, static_cast<double>(n), p};
  }
  static Distribution poisson(double rate) {
    require(rate > 0.0, "poisson: rate must be > 0");
    return {Family::poisson, rate, 0.0};
  }

  Family family() const { return family_; }
  const char* name() const { return family_name(family_); }
  double param(int i) const { return params_[static_cast<std::size_t>(i)]; }

  bool discrete() const {
    return family_ == Family::binomial || family_ == Family::poisson;
  }

  double support_lo() const {
    switch (family_) {
      case Family::lognormal:
      case Family::gamma:
      case Family::beta:
        return 0.0;
      case Family::exponential:
      case Family::weibull:
      case Family::binomial:
      case Family::poisson:
        return 0.0;
      case Family::uniform:
        return params_[0];
      default:
        return -std::numeric_limits<double>::infinity();
    }
  }

  double support_hi() const {
    switch (family_) {
      case Family::uniform:
        return params_[1];
      case Family::beta:
        return 1.0;
      case Family::binomial:
        return params_[0];
      default:
        return std::numeric_limits<double>::infinity();
    }
  }

  /// Density for continuous families, pmf at integer points for discrete.
  double pdf(double x) const {
    const double lp = log_pdf(x);
    return std::isinf(lp) && lp < 0.0 ? 0.0 : std::exp(lp);
  }

  double log_pdf(double x) const {
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    const double a = params_[0];
    const double b = params_[1];
    switch (family_) {
      case Family::normal: {
        const double z = (x - a) / b;
        return -0.5 * z * z - std::log(b * std::sqrt(2.0 * std::numbers::pi));
      }
      case Family::lognormal: {
        if (x <= 0.0) return neg_inf;
        const double z = (std::log(x) - a) / b;
        return -0.5 * z * z -
               std::log(x * b * std::sqrt(2.0 * std::numbers::pi));
      }
      case Family::uniform:
        return (x >= a && x <= b) ? -std::log(b - a) : neg_inf;
      case Family::exponential:
        return (x >= 0.0) ? std::log(a) - a * x : neg_inf;
      case Family::gamma: {
        if (x <= 0.0) return neg_inf;
        return (a - 1.0) * std::log(x) - x / b - std::lgamma(a) -
               a * std::log(b);
      }
      case Family::beta: {
        if (x <= 0.0 || x >= 1.0) return neg_inf;
        return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) -
               (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
      }
      case Family::weibull: {
        if (x < 0.0) return neg_inf;
        if (x == 0.0) return (a == 1.0) ? -std::log(b) : (a > 1.0 ? neg_inf : std::numeric_limits<double>::infinity());
        const double t = x / b;
        return std::log(a / b) + (a - 1.0) * std::log(t) - std::pow(t, a);
      }
      case Family::gumbel: {
        const double z = (x - a) / b;
        return -std::log(b) - z - std::exp(-z);
      }
      case Family::laplace:
        return -std::log(2.0 * b) - std::abs(x - a) / b;
      case Family::logistic: {
        const double z = std::abs((x - a) / b);
        return -z - std::log(b) - 2.0 * std::log1p(std::exp(-z));
      }
      case Family::binomial: {
        const int n = static_cast<int>(a);
        if (x < 0.0 || x > n || x != std::floor(x)) return neg_inf;
        const double k = x;
        return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
               std::lgamma(n - k + 1.0) + k * std::log(b) +
               (n - k) * std::log1p(-b);
      }
      case Family::poisson: {
        if (x < 0.0 || x != std::floor(x)) return neg_inf;
        return x * std::log(a) - a - std::lgamma(x + 1.0);
      }
    }
    return neg_inf;
  }

  double cdf(double x) const {
    const double a = params_[0];
    const double b = params_[1];
    switch (family_) {
      case Family::normal:
        return math::standard_normal_cdf((x - a) / b);
      case Family::lognormal:
        return x <= 0.0 ? 0.0 : math::standard_normal_cdf((std::log(x) - a) / b);
      case Family::uniform:
        return x <= a ? 0.0 : (x >= b ? 1.0 : (x - a) / (b - a));
      case Family::exponential:
        return x <= 0.0 ? 0.0 : -std::expm1(-a * x);
      case Family::gamma:
        return x <= 0.0 ? 0.0 : math::regularized_gamma_p(a, x / b);
      case Family::beta:
        return math::regularized_beta(x, a, b);
      case Family::weibull:
        return x <= 0.0 ? 0.0 : -std::expm1(-std::pow(x / b, a));
      case Family::gumbel:
        return std::exp(-std::exp(-(x - a) / b));
      case Family::laplace:
        return x < a ? 0.5 * std::exp((x - a) / b)
                     : 1.0 - 0.5 * std::exp(-(x - a) / b);
      case Family::logistic:
        return 1.0 / (1.0 + std::exp(-(x - a) / b));
      case Family::binomial: {
        const int n = static_cast<int>(a);
        const double k = std::floor(x);
        if (k < 0.0) return 0.0;
        if (k >= n) return 1.0;
        return math::regularized_beta(1.0 - b, n - k, k + 1.0);
      }
      case Family::poisson: {
        const double k = std::floor(x);
        if (k < 0.0) return 0.0;
        return math::regularized_gamma_q(k + 1.0, a);
      }
    }
    return 0.0;
  }

  /// Quantile. Continuous families invert the cdf exactly or numerically
  /// (bisection bracket + Newton polish, |dx| tolerance 1e-12 relative);
  /// discrete families return the generalized inverse inf{x : cdf(x) >= p}.
  double icdf(double p) const {
    if (!(p > 0.0 && p < 1.0))
      throw domain_error("icdf: p must lie in (0,1)");
    const double a = params_[0];
    const double b = params_[1];
    switch (family_) {
      case Family::normal:
        return a + b * math::standard_normal_icdf(p);
      case Family::lognormal:
        return std::exp(a + b * math::standard_normal_icdf(p));
      case Family::uniform:
        return a + (b - a) * p;
      case Family::exponential:
        return -std::log1p(-p) / a;
      case Family::gamma: {
        // initial bracket from the mean/variance scale
        double hi = a * b + 10.0 * std::sqrt(a) * b + b;
        while (cdf(hi) < p) hi *= 2.0;
        return invert_continuous(p, 0.0, hi);
      }
      case Family::beta:
        return invert_continuous(p, 0.0, 1.0);
      case Family::weibull:
        return b * std::pow(-std::log1p(-p), 1.0 / a);
      case Family::gumbel:
        return a - b * std::log(-std::log(p));
      case Family::laplace:
        return p < 0.5 ? a + b * std::log(2.0 * p)
                       : a - b * std::log(2.0 * (1.0 - p));
      case Family::logistic:
        return a + b * std::log(p / (1.0 - p));
      case Family::binomial: {
        const int n = static_cast<int>(a);
        double acc = 0.0;
        for (int k = 0; k <= n; ++k) {
          acc += pdf(k);
          if (acc >= p || k == n) return k;
        }
        return n;
      }
      case Family::poisson: {
        double acc = 0.0;
        double k = 0.0;
        double pk = std::exp(-a);
        while (true) {
          acc += pk;
          if (acc >= p) return k;
          pk *= a / (k + 1.0);
          k += 1.0;
          if (k > 1e9) return k;  // unreachable for sane rates
        }
      }
    }
    return 0.0;
  }

  Moments moments() const {
    const double a = params_[0];
    const double b = params_[1];
    Moments m;
    switch (family_) {
      case Family::normal:
        m = {a, b * b, 0.0, 0.0};
        break;
      case Family::lognormal: {
        const double s2 = b * b;
        const double es2 = std::exp(s2);
        m.mean = std::exp(a + s2 / 2.0);
        m.variance = (es2 - 1.0) * std::exp(2.0 * a + s2);
        m.skewness = (es2 + 2.0) * std::sqrt(es2 - 1.0);
        m.excess_kurtosis = std::exp(4.0 * s2) + 2.0 * std::exp(3.0 * s2) +
                            3.0 * std::exp(2.0 * s2) - 6.0;
        break;
      }
      case Family::uniform:
        m = {(a + b) / 2.0, (b - a) * (b - a) / 12.0, 0.0, -1.2};
        break;
      case Family::exponential:
        m = {1.0 / a, 1.0 / (a * a), 2.0, 6.0};
        break;
      case Family::gamma:
        m = {a * b, a * b * b, 2.0 / std::sqrt(a), 6.0 / a};
        break;
      case Family::beta: {
        const double s = a + b;
        m.mean = a / s;
        m.variance = a * b / (s * s * (s + 1.0));
        m.skewness =
            2.0 * (b - a) * std::sqrt(s + 1.0) / ((s + 2.0) * std::sqrt(a * b));
        m.excess_kurtosis = 6.0 *
                            ((a - b) * (a - b) * (s + 1.0) - a * b * (s + 2.0)) /
                            (a * b * (s + 2.0) * (s + 3.0));
        break;
      }
      case Family::weibull: {
        const auto raw = [&](int i) {
          return std::pow(b, i) * std::tgamma(1.0 + i / a);
        };
        const double m1 = raw(1), m2 = raw(2), m3 = raw(3), m4 = raw(4);
        const double var = m2 - m1 * m1;
        const double sd = std::sqrt(var);
        const double mu3 = m3 - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1;
        const double mu4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 -
                           3.0 * m1 * m1 * m1 * m1;
        m = {m1, var, mu3 / (sd * sd * sd), mu4 / (var * var) - 3.0};
        break;
      }
      case Family::gumbel: {
        constexpr double euler = 0.57721566490153286;
        constexpr double zeta3 = 1.2020569031595943;
        const double pi = std::numbers::pi;
        m.mean = a + b * euler;
        m.variance = pi * pi * b * b / 6.0;
        m.skewness = 12.0 * std::sqrt(6.0) * zeta3 / (pi * pi * pi);
        m.excess_kurtosis = 12.0 / 5.0;
        break;
      }
      case Family::laplace:
        m = {a, 2.0 * b * b, 0.0, 3.0};
        break;
      case Family::logistic:
        m = {a, b * b * std::numbers::pi * std::numbers::pi / 3.0, 0.0, 1.2};
        break;
      case Family::binomial: {
        const double n = a, p = b, q = 1.0 - b;
        m = {n * p, n * p * q, (q - p) / std::sqrt(n * p * q),
             (1.0 - 6.0 * p * q) / (n * p * q)};
        break;
      }
      case Family::poisson:
        m = {a, a, 1.0 / std::sqrt(a), 1.0 / a};
        break;
    }
    return m;
  }

  /// One draw by inversion; identical stream state gives identical output.
  double sample(RandomStream& rng) const { return icdf(rng.uniform01_open()); }

  std::vector<std::pair<std::string, double>> named_params() const {
    switch (family_) {
      case Family::normal: return {{"mean", params_[0]}, {"std", params_[1]}};
      case Family::lognormal: return {{"mu", params_[0]}, {"sigma", params_[1]}};
      case Family::uniform: return {{"a", params_[0]}, {"b", params_[1]}};
      case Family::exponential: return {{"rate", params_[0]}};
      case Family::gamma: return {{"shape", params_[0]}, {"scale", params_[1]}};
      case Family::beta: return {{"alpha", params_[0]}, {"beta", params_[1]}};
      case Family::weibull: return {{"shape", params_[0]}, {"scale", params_[1]}};
      case Family::gumbel: return {{"loc", params_[0]}, {"scale", params_[1]}};
      case Family::laplace: return {{"loc", params_[0]}, {"scale", params_[1]}};
      case Family::logistic: return {{"loc", params_[0]}, {"scale", params_[1]}};
      case Family::binomial: return {{"n", params_[0]}, {"p", params_[1]}};
      case Family::poisson: return {{"rate", params_[0]}};
    }
    return {};
  }

 private:
  Distribution(Family f, double p0, double p1) : family_(f), params_{p0, p1} {}

  static void require(bool ok, const char* msg) {
    if (!ok) throw invalid_argument_error(msg);
  }

  // Bisection to a tight bracket, then Newton polish against the cdf.
  double invert_continuous(double p, double lo, double hi) const {
    for (int i = 0; i < 80 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo));
         ++i) {
      const double mid = 0.5 * (lo + hi);
      if (cdf(mid) < p)
        lo = mid;
      else
        hi = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 30; ++i) {
      const double fx = cdf(x) - p;
      const double dfx = pdf(x);
      if (dfx <= 0.0) break;
      double step = fx / dfx;
      double xn = x - step;
      if (xn <= lo || xn >= hi) xn = 0.5 * (lo + hi);
      if (cdf(xn) < p)
        lo = xn;
      else
        hi = xn;
      if (std::abs(xn - x) <= 1e-12 * std::max(1.0, std::abs(x))) {
        x = xn;
        break;
      }
      x = xn;
    }
    return x;
  }

  Family family_;
  std::array<double, 2> params_;
};

}  // namespace uq
