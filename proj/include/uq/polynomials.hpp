#pragma once

// Orthonormal polynomial families for chaos expansions:
//   Hermite  (probabilists'): orthonormal under the standard normal density;
//   Legendre: orthonormal under Uniform(-1,1).

#include <cmath>

#include "uq/errors.hpp"

namespace uq {

enum class PolynomialFamily { hermite, legendre };

inline const char* polynomial_family_name(PolynomialFamily f) {
  return f == PolynomialFamily::hermite ? "hermite" : "legendre";
}

/// Value of the orthonormal polynomial of the given degree at x, by the
/// three-term recurrence in orthonormal form (no factorial overflow).
inline double polynomial_eval(PolynomialFamily family, int degree, double x) {
  if (degree < 0)
    throw invalid_argument_error("polynomial_eval: degree must be >= 0");
  if (family == PolynomialFamily::hermite) {
    // phi_{k+1} = (x phi_k - sqrt(k) phi_{k-1}) / sqrt(k+1)
    double prev = 1.0;
    if (degree == 0) return prev;
    double cur = x;
    for (int k = 1; k < degree; ++k) {
      const double next =
          (x * cur - std::sqrt(static_cast<double>(k)) * prev) /
          std::sqrt(static_cast<double>(k + 1));
      prev = cur;
      cur = next;
    }
    return cur;
  }
  // Legendre P_k by (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}, scaled by
  // sqrt(2k+1) for orthonormality under the uniform density on [-1,1].
  double prev = 1.0;
  if (degree == 0) return prev;
  double cur = x;
  for (int k = 1; k < degree; ++k) {
    const double next =
        ((2.0 * k + 1.0) * x * cur - k * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return std::sqrt(2.0 * degree + 1.0) * cur;
}

}  // namespace uq
