#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "uq/errors.hpp"

namespace uq {

/// Axis-aligned decomposition of the unit hypercube into k disjoint boxes
/// whose volumes sum to 1.
class RectangularStrata {
 public:
  RectangularStrata(Eigen::MatrixXd lows, Eigen::MatrixXd highs)
      : lows_(std::move(lows)), highs_(std::move(highs)) {
    const auto k = lows_.rows();
    const auto d = lows_.cols();
    if (k < 1 || highs_.rows() != k || highs_.cols() != d)
      throw invalid_argument_error("strata: lows/highs shape mismatch");
    volumes_.resize(k);
    for (Eigen::Index s = 0; s < k; ++s) {
      double vol = 1.0;
      for (Eigen::Index j = 0; j < d; ++j) {
        const double lo = lows_(s, j);
        const double hi = highs_(s, j);
        if (!(lo < hi))
          throw invalid_argument_error("strata: requires lows < highs");
        if (lo < -1e-12 || hi > 1.0 + 1e-12)
          throw invalid_argument_error("strata: bounds must lie in [0,1]");
        vol *= hi - lo;
      }
      volumes_(s) = vol;
    }
    // pairwise disjoint up to shared faces
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index b = a + 1; b < k; ++b) {
        bool overlap = true;
        for (Eigen::Index j = 0; j < d; ++j)
          if (lows_(a, j) >= highs_(b, j) - 1e-15 ||
              lows_(b, j) >= highs_(a, j) - 1e-15) {
            overlap = false;
            break;
          }
        if (overlap)
          throw invalid_argument_error("strata: strata overlap");
      }
    if (std::abs(volumes_.sum() - 1.0) > 1e-12)
      throw invalid_argument_error("strata: volumes must sum to 1");
  }

  /// Regular grid with cells_per_dim[j] equal cells along dimension j.
  static RectangularStrata regular_grid(const std::vector<int>& cells_per_dim) {
    const int d = static_cast<int>(cells_per_dim.size());
    if (d < 1) throw invalid_argument_error("strata grid: needs >= 1 dim");
    Eigen::Index k = 1;
    for (int c : cells_per_dim) {
      if (c < 1) throw invalid_argument_error("strata grid: cells must be >= 1");
      k *= c;
    }
    Eigen::MatrixXd lows(k, d), highs(k, d);
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    for (Eigen::Index s = 0; s < k; ++s) {
      for (int j = 0; j < d; ++j) {
        const double w = 1.0 / cells_per_dim[static_cast<std::size_t>(j)];
        lows(s, j) = idx[static_cast<std::size_t>(j)] * w;
        highs(s, j) = lows(s, j) + w;
      }
      for (int j = d - 1; j >= 0; --j) {
        if (++idx[static_cast<std::size_t>(j)] <
            cells_per_dim[static_cast<std::size_t>(j)])
          break;
        idx[static_cast<std::size_t>(j)] = 0;
      }
    }
    return RectangularStrata(std::move(lows), std::move(highs));
  }

  Eigen::Index count() const { return lows_.rows(); }
  Eigen::Index dim() const { return lows_.cols(); }
  const Eigen::MatrixXd& lows() const { return lows_; }
  const Eigen::MatrixXd& highs() const { return highs_; }
  const Eigen::VectorXd& volumes() const { return volumes_; }

 private:
  Eigen::MatrixXd lows_;
  Eigen::MatrixXd highs_;
  Eigen::VectorXd volumes_;
};

}  // namespace uq
