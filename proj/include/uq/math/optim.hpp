#pragma once

// Derivative-free local minimization (Nelder-Mead) with box bounds, used for
// hyperparameter searches in log-parameter space.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace uq::math {

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int n_evals = 0;
};

/// Minimizes f over the box [lower, upper]; evaluations outside the box are
/// clamped onto it. Plain Nelder-Mead with standard coefficients.
inline NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x0, const Eigen::VectorXd& lower,
    const Eigen::VectorXd& upper, int max_iter = 400, double ftol = 1e-9) {
  const auto n = x0.size();
  const auto clamp = [&](Eigen::VectorXd v) {
    for (Eigen::Index i = 0; i < n; ++i)
      v(i) = std::min(upper(i), std::max(lower(i), v(i)));
    return v;
  };
  int evals = 0;
  const auto eval = [&](const Eigen::VectorXd& v) {
    ++evals;
    const double y = f(v);
    return std::isfinite(y) ? y : 1e300;
  };

  std::vector<Eigen::VectorXd> simplex;
  std::vector<double> fx;
  simplex.push_back(clamp(x0));
  fx.push_back(eval(simplex[0]));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd v = simplex[0];
    const double span = upper(i) - lower(i);
    double step = (v(i) != 0.0) ? 0.05 * std::abs(v(i)) : 0.05;
    step = std::max(step, 0.02 * span);
    v(i) += step;
    v = clamp(v);
    if (v(i) == simplex[0](i)) v(i) -= 2.0 * step;
    simplex.push_back(clamp(v));
    fx.push_back(eval(simplex.back()));
  }

  std::vector<int> order(simplex.size());
  for (int it = 0; it < max_iter; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return fx[a] < fx[b]; });
    const int best = order.front();
    const int worst = order.back();
    const int second_worst = order[order.size() - 2];
    if (std::abs(fx[worst] - fx[best]) <=
        ftol * (std::abs(fx[best]) + std::abs(fx[worst]) + 1e-30))
      break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int idx : order)
      if (idx != worst) centroid += simplex[idx];
    centroid /= static_cast<double>(simplex.size() - 1);

    const Eigen::VectorXd reflected =
        clamp(centroid + (centroid - simplex[worst]));
    const double fr = eval(reflected);
    if (fr < fx[best]) {
      const Eigen::VectorXd expanded =
          clamp(centroid + 2.0 * (centroid - simplex[worst]));
      const double fe = eval(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        fx[worst] = fe;
      } else {
        simplex[worst] = reflected;
        fx[worst] = fr;
      }
    } else if (fr < fx[second_worst]) {
      simplex[worst] = reflected;
      fx[worst] = fr;
    } else {
      const Eigen::VectorXd contracted =
          clamp(centroid + 0.5 * (simplex[worst] - centroid));
      const double fc = eval(contracted);
      if (fc < fx[worst]) {
        simplex[worst] = contracted;
        fx[worst] = fc;
      } else {
        // shrink toward best
        for (std::size_t i = 0; i < simplex.size(); ++i) {
          if (static_cast<int>(i) == best) continue;
          simplex[i] = clamp(simplex[best] + 0.5 * (simplex[i] - simplex[best]));
          fx[i] = eval(simplex[i]);
        }
      }
    }
  }

  const auto best_it = std::min_element(fx.begin(), fx.end());
  NelderMeadResult result;
  result.x = simplex[static_cast<std::size_t>(best_it - fx.begin())];
  result.value = *best_it;
  result.n_evals = evals;
  return result;
}

}  // namespace uq::math
