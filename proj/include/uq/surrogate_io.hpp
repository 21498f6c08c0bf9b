#pragma once

// Versioned JSON serialization for fitted surrogates. Doubles round-trip
// exactly (shortest-representation encoding), so a reloaded model reproduces
// predictions and derived indices bit-identically.

#include <json.hpp>

#include <string>
#include <vector>

#include "uq/distributions.hpp"
#include "uq/errors.hpp"
#include "uq/gpr.hpp"
#include "uq/pce.hpp"

namespace uq::io {

inline nlohmann::json distribution_to_json(const Distribution& d) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : d.named_params()) params[k] = v;
  return {{"family", d.name()}, {"params", params}};
}

inline Distribution distribution_from_json(const nlohmann::json& j);

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return {};
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(i)].size()) != cols)
      throw invalid_argument_error("matrix_from_json: ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(i, c) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)]
                    .get<double>();
  }
  return m;
}

inline nlohmann::json gpr_to_json(const GprModel& m) {
  return {{"schema", "uq.surrogate.gpr/1"},
          {"kernel",
           {{"kind", kernel_name(m.kernel.kind)},
            {"lengthscales", vector_to_json(m.kernel.lengthscales)},
            {"signal_variance", m.kernel.signal_variance}}},
          {"noise_variance", m.noise_variance},
          {"x_train", matrix_to_json(m.x_train)},
          {"y_train", vector_to_json(m.y_train)},
          {"lml", m.lml}};
}

inline KernelKind kernel_kind_from_name(const std::string& name) {
  if (name == "rbf") return KernelKind::rbf;
  if (name == "matern12") return KernelKind::matern12;
  if (name == "matern32") return KernelKind::matern32;
  if (name == "matern52") return KernelKind::matern52;
  if (name == "matern_inf") return KernelKind::matern_inf;
  throw invalid_argument_error("unknown kernel kind '" + name + "'");
}

inline GprModel gpr_from_json(const nlohmann::json& j) {
  if (j.value("schema", "") != "uq.surrogate.gpr/1")
    throw invalid_argument_error("gpr_from_json: unsupported schema");
  const auto& jk = j.at("kernel");
  const Kernel kernel = Kernel::make(
      kernel_kind_from_name(jk.at("kind").get<std::string>()),
      vector_from_json(jk.at("lengthscales")),
      jk.at("signal_variance").get<double>());
  return gpr_build(matrix_from_json(j.at("x_train")),
                   vector_from_json(j.at("y_train")), kernel,
                   j.at("noise_variance").get<double>());
}

inline nlohmann::json pce_to_json(const PceModel& m) {
  nlohmann::json families = nlohmann::json::array();
  for (auto f : m.basis.families) families.push_back(polynomial_family_name(f));
  nlohmann::json indices = nlohmann::json::array();
  for (const auto& idx : m.basis.multi_indices) indices.push_back(idx);
  nlohmann::json marginals = nlohmann::json::array();
  for (const auto& d : m.marginals) marginals.push_back(distribution_to_json(d));
  nlohmann::json out = {{"schema", "uq.surrogate.pce/1"},
                        {"families", families},
                        {"multi_indices", indices},
                        {"truncation", truncation_name(m.basis.truncation)},
                        {"degree", m.basis.degree},
                        {"q", m.basis.q},
                        {"coefficients", vector_to_json(m.coefficients)},
                        {"marginals", marginals}};
  if (m.validation_error) out["validation_error"] = *m.validation_error;
  return out;
}

inline PceModel pce_from_json(const nlohmann::json& j) {
  if (j.value("schema", "") != "uq.surrogate.pce/1")
    throw invalid_argument_error("pce_from_json: unsupported schema");
  PceModel m;
  for (const auto& f : j.at("families")) {
    const auto name = f.get<std::string>();
    if (name == "hermite")
      m.basis.families.push_back(PolynomialFamily::hermite);
    else if (name == "legendre")
      m.basis.families.push_back(PolynomialFamily::legendre);
    else
      throw invalid_argument_error("unknown polynomial family '" + name + "'");
  }
  for (const auto& idx : j.at("multi_indices"))
    m.basis.multi_indices.push_back(idx.get<std::vector<int>>());
  const auto trunc = j.at("truncation").get<std::string>();
  if (trunc == "tensor_product") m.basis.truncation = Truncation::tensor_product;
  else if (trunc == "total_degree") m.basis.truncation = Truncation::total_degree;
  else if (trunc == "hyperbolic") m.basis.truncation = Truncation::hyperbolic;
  else throw invalid_argument_error("unknown truncation '" + trunc + "'");
  m.basis.degree = j.at("degree").get<int>();
  m.basis.q = j.value("q", 1.0);
  m.coefficients = vector_from_json(j.at("coefficients"));
  for (const auto& dj : j.at("marginals"))
    m.marginals.push_back(distribution_from_json(dj));
  if (j.contains("validation_error"))
    m.validation_error = j.at("validation_error").get<double>();
  if (static_cast<int>(m.basis.multi_indices.size()) != m.coefficients.size())
    throw invalid_argument_error("pce_from_json: coefficient count mismatch");
  return m;
}

inline Distribution distribution_from_json(const nlohmann::json& j) {
  const auto family = j.at("family").get<std::string>();
  const auto& p = j.at("params");
  const auto num = [&](const char* key) { return p.at(key).get<double>(); };
  if (family == "normal") return Distribution::normal(num("mean"), num("std"));
  if (family == "lognormal")
    return Distribution::lognormal(num("mu"), num("sigma"));
  if (family == "uniform") return Distribution::uniform(num("a"), num("b"));
  if (family == "exponential") return Distribution::exponential(num("rate"));
  if (family == "gamma") return Distribution::gamma(num("shape"), num("scale"));
  if (family == "beta") return Distribution::beta(num("alpha"), num("beta"));
  if (family == "weibull")
    return Distribution::weibull(num("shape"), num("scale"));
  if (family == "gumbel") return Distribution::gumbel(num("loc"), num("scale"));
  if (family == "laplace") return Distribution::laplace(num("loc"), num("scale"));
  if (family == "logistic")
    return Distribution::logistic(num("loc"), num("scale"));
  if (family == "binomial")
    return Distribution::binomial(static_cast<int>(num("n")), num("p"));
  if (family == "poisson") return Distribution::poisson(num("rate"));
  throw invalid_argument_error("unknown distribution family '" + family + "'");
}

}  // namespace uq::io
