#pragma once

#include <Eigen/Dense>
#include <optional>

#include "uq/errors.hpp"
#include "uq/random.hpp"

namespace uq {

enum class SampleSpace { physical, unit_hypercube, standard_normal };

inline const char* sample_space_name(SampleSpace s) {
  switch (s) {
    case SampleSpace::physical: return "physical";
    case SampleSpace::unit_hypercube: return "unit_hypercube";
    case SampleSpace::standard_normal: return "standard_normal";
  }
  return "?";
}

/// n x d matrix of realizations, optional normalized per-sample weights, and
/// the generator/seed record that produced them. Absent weights mean uniform.
struct SampleSet {
  Eigen::MatrixXd samples;
  std::optional<Eigen::VectorXd> weights;
  SeedRecord seed_record;
  SampleSpace space = SampleSpace::physical;

  Eigen::Index size() const { return samples.rows(); }
  Eigen::Index dim() const { return samples.cols(); }

  void validate() const {
    if (!samples.allFinite())
      throw invalid_argument_error("sample set: samples must be finite");
    if (weights) {
      if (weights->size() != samples.rows())
        throw invalid_argument_error("sample set: weight length mismatch");
      if ((weights->array() < 0.0).any())
        throw invalid_argument_error("sample set: weights must be >= 0");
      if (std::abs(weights->sum() - 1.0) > 1e-12)
        throw invalid_argument_error("sample set: weights must sum to 1");
    }
  }
};

}  // namespace uq
