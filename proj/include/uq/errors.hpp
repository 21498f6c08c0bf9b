#pragma once

#include <stdexcept>
#include <string>

namespace uq {

/// Invalid construction arguments (bad parameters, inconsistent shapes).
struct invalid_argument_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Evaluation outside the mathematical domain of an operation.
struct domain_error : std::domain_error {
  using std::domain_error::domain_error;
};

/// A numerical routine failed (factorization, root bracketing, conditioning).
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// No rho_Z in (-1,1) reproduces the requested physical correlation.
struct infeasible_correlation_error : numerical_error {
  using numerical_error::numerical_error;
};

/// Importance weights all zero or non-finite.
struct degenerate_weights_error : numerical_error {
  using numerical_error::numerical_error;
};

/// Template text and variable declarations disagree.
struct template_error : invalid_argument_error {
  using invalid_argument_error::invalid_argument_error;
};

/// Configuration file failed validation; carries all messages joined by newlines.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace uq
