#pragma once

// Study configuration: JSON only, every validation error reported at once
// with its JSON path, defaults materialized into a canonical resolved config.

#include <json.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "uq/distributions.hpp"
#include "uq/errors.hpp"
#include "uq/logging.hpp"
#include "uq/model.hpp"
#include "uq/reliability.hpp"
#include "uq/sensitivity.hpp"
#include "uq/surrogate_io.hpp"
#include "uq/testfunctions.hpp"

namespace uq {

enum class AnalysisType { sample, propagate, reliability, sensitivity, surrogate };

inline const char* analysis_type_name(AnalysisType t) {
  switch (t) {
    case AnalysisType::sample: return "sample";
    case AnalysisType::propagate: return "propagate";
    case AnalysisType::reliability: return "reliability";
    case AnalysisType::sensitivity: return "sensitivity";
    case AnalysisType::surrogate: return "surrogate";
  }
  return "?";
}

struct AnalysisConfig {
  AnalysisType type = AnalysisType::sample;

  // sample / propagate
  std::string sample_method = "monte_carlo";
  int n = 1000;
  std::string lhs_criterion = "random";
  std::vector<int> cells_per_dim;
  int n_per_stratum = 1;

  // reliability
  std::string reliability_method = "form";
  FormOptions form_opts;
  std::optional<Eigen::VectorXd> u0;
  SubsetOptions subset_opts;

  // sensitivity
  std::string sensitivity_method = "sobol";
  int morris_trajectories = 10;
  int morris_levels = 4;
  int cvm_m_grid = 100;
  int bootstrap_resamples = 0;

  // pce knobs (sensitivity method "pce" and surrogate kind "pce")
  int pce_degree = 5;
  std::string pce_truncation = "total_degree";
  double pce_q = 1.0;
  std::string pce_regressor = "least_squares";
  double ridge_lambda = 1e-6;
  int lars_max_terms = -1;

  // surrogate
  std::string surrogate_kind = "gpr";
  int n_train = 100;
  std::string train_sampling = "latin_hypercube";
  std::string gpr_kernel = "rbf";
  std::optional<double> gpr_noise;  // nullopt: optimized
  int gpr_restarts = 10;
};

struct ModelConfig {
  std::optional<std::string> builtin;
  nlohmann::json builtin_params = nlohmann::json::object();
  std::optional<ExternalModel> external;
};

struct StudyConfig {
  std::uint64_t seed = 0;
  int workers = 1;
  std::filesystem::path output_dir = "uq_output";
  log::Level log_level = log::Level::error;
  std::vector<Distribution> marginals;
  std::optional<Eigen::MatrixXd> correlation;
  std::optional<ModelConfig> model;
  AnalysisConfig analysis;
  nlohmann::json resolved;  // canonical config with defaults materialized

  int dimension() const { return static_cast<int>(marginals.size()); }

  JointDistribution joint() const {
    return JointDistribution::independent(marginals);
  }

  NatafTransform transform() const {
    return correlation ? NatafTransform(marginals,
                                        CorrelationMatrix::from(*correlation))
                       : NatafTransform::independent(marginals);
  }
};

namespace detail {

inline int edit_distance(const std::string& a, const std::string& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

struct FamilyName {
  const char* name;
  const char* canonical;  // alias target
};

inline const std::vector<FamilyName>& family_names() {
  static const std::vector<FamilyName> names = {
      {"normal", "normal"},     {"gaussian", "normal"},
      {"lognormal", "lognormal"}, {"uniform", "uniform"},
      {"exponential", "exponential"}, {"gamma", "gamma"},
      {"beta", "beta"},         {"weibull", "weibull"},
      {"gumbel", "gumbel"},     {"laplace", "laplace"},
      {"logistic", "logistic"}, {"binomial", "binomial"},
      {"poisson", "poisson"}};
  return names;
}

/// Nearest known family (canonical spelling) within edit distance 2.
inline std::optional<std::string> suggest_family(const std::string& bad) {
  int best = 3;
  std::optional<std::string> suggestion;
  for (const auto& f : family_names()) {
    const int dist = edit_distance(bad, f.name);
    if (dist < best) {
      best = dist;
      suggestion = f.canonical;
    }
  }
  return suggestion;
}

struct ErrorCollector {
  std::vector<std::string> messages;

  void add(const std::string& path, const std::string& msg) {
    messages.push_back(path + ": " + msg);
  }

  void raise_if_any() const {
    if (messages.empty()) return;
    std::string joined = "configuration invalid:";
    for (const auto& m : messages) joined += "\n  " + m;
    throw config_error(joined);
  }
};

inline std::optional<Distribution> parse_marginal(const nlohmann::json& j,
                                                  const std::string& path,
                                                  ErrorCollector& errors) {
  if (!j.is_object() || !j.contains("family") || !j["family"].is_string()) {
    errors.add(path, "expected an object with a \"family\" string");
    return std::nullopt;
  }
  std::string family = j["family"].get<std::string>();
  std::transform(family.begin(), family.end(), family.begin(), ::tolower);
  const auto& known = family_names();
  const auto it = std::find_if(known.begin(), known.end(), [&](const auto& f) {
    return family == f.name;
  });
  if (it == known.end()) {
    std::string msg = "unknown family \"" + family + "\"";
    if (const auto s = suggest_family(family))
      msg += " (did you mean \"" + *s + "\"?)";
    errors.add(path + "/family", msg);
    return std::nullopt;
  }
  nlohmann::json canonical = j;
  canonical["family"] = it->canonical;
  if (!canonical.contains("params") || !canonical["params"].is_object()) {
    errors.add(path + "/params", "expected a parameter object");
    return std::nullopt;
  }
  try {
    return io::distribution_from_json(canonical);
  } catch (const nlohmann::json::exception& e) {
    errors.add(path + "/params", std::string("missing parameter: ") + e.what());
  } catch (const std::exception& e) {
    errors.add(path + "/params", e.what());
  }
  return std::nullopt;
}

inline ExternalModel parse_external_model(const nlohmann::json& j,
                                          const std::string& path,
                                          ErrorCollector& errors) {
  ExternalModel m;
  if (j.contains("template"))
    m.template_text = j["template"].get<std::string>();
  else if (j.contains("template_file")) {
    std::ifstream in(j["template_file"].get<std::string>());
    if (!in)
      errors.add(path + "/template_file", "cannot read template file");
    else {
      std::ostringstream ss;
      ss << in.rdbuf();
      m.template_text = ss.str();
    }
  } else {
    errors.add(path, "external model needs \"template\" or \"template_file\"");
  }
  if (j.contains("var_names"))
    m.var_names = j["var_names"].get<std::vector<std::string>>();
  else
    errors.add(path + "/var_names", "required");
  if (j.contains("command"))
    m.command = j["command"].get<std::vector<std::string>>();
  else
    errors.add(path + "/command", "required");
  m.input_filename = j.value("input_filename", std::string("input.txt"));
  m.timeout_seconds = j.value("timeout_seconds", 60.0);
  m.output_dim = j.value("output_dim", 1);
  if (j.contains("output")) {
    const auto& o = j["output"];
    const std::string kind = o.value("kind", std::string("single_float"));
    if (kind == "single_float")
      m.parser.kind = OutputParserSpec::Kind::single_float_file;
    else if (kind == "delimited_row")
      m.parser.kind = OutputParserSpec::Kind::delimited_row;
    else
      errors.add(path + "/output/kind",
                 "expected \"single_float\" or \"delimited_row\"");
    m.parser.path = o.value("path", std::string("output.txt"));
    m.parser.delimiter = o.value("delimiter", std::string(","));
  }
  if (j.contains("workdir_root"))
    m.workdir_root = j["workdir_root"].get<std::string>();
  return m;
}

}  // namespace detail

/// Instantiates the configured model; the external workdir root defaults to
/// <output_dir>/runs when the config leaves it empty.
inline ModelSpec build_model(const StudyConfig& cfg) {
  if (!cfg.model)
    throw config_error("this analysis requires a \"model\" block");
  const auto& mc = *cfg.model;
  if (mc.external) {
    ExternalModel m = *mc.external;
    if (m.workdir_root.empty()) m.workdir_root = cfg.output_dir / "runs";
    return ModelSpec::external(std::move(m));
  }
  const auto& name = *mc.builtin;
  const auto& p = mc.builtin_params;
  const int d = cfg.dimension();
  if (name == "linear_limit_state") {
    Eigen::VectorXd a;
    if (p.contains("a"))
      a = io::vector_from_json(p["a"]);
    else
      a = Eigen::VectorXd::Ones(d);
    return testfunctions::linear_limit_state(a, p.value("beta", 3.0));
  }
  if (name == "parabolic_limit_state")
    return testfunctions::parabolic_limit_state(p.value("beta", 3.0),
                                                p.value("curvature", 0.1));
  if (name == "ishigami")
    return testfunctions::ishigami(p.value("a", 7.0), p.value("b", 0.1));
  if (name == "sobol_g") {
    if (!p.contains("a"))
      throw config_error("builtin sobol_g requires params.a");
    return testfunctions::sobol_g(io::vector_from_json(p["a"]));
  }
  if (name == "branin") return testfunctions::branin();
  throw config_error(
      "unknown builtin model \"" + name +
      "\" (known: linear_limit_state, parabolic_limit_state, ishigami, "
      "sobol_g, branin)");
}

/// Parses and validates a study configuration, reporting every violation
/// with its JSON path. Defaults are materialized into cfg.resolved.
inline StudyConfig parse_config_json(const nlohmann::json& j) {
  detail::ErrorCollector errors;
  StudyConfig cfg;

  if (!j.is_object()) {
    errors.add("/", "top level must be a JSON object");
    errors.raise_if_any();
  }

  if (!j.contains("seed") || !j["seed"].is_number_integer())
    errors.add("/seed", "required integer (runs have no implicit entropy)");
  else
    cfg.seed = j["seed"].get<std::uint64_t>();

  cfg.workers = j.value("workers", 1);
  if (cfg.workers < 1) errors.add("/workers", "must be >= 1");
  if (j.contains("output_dir"))
    cfg.output_dir = j["output_dir"].get<std::string>();
  if (j.contains("log_level")) {
    try {
      cfg.log_level = log::parse_level(j["log_level"].get<std::string>());
    } catch (const std::exception& e) {
      errors.add("/log_level", e.what());
    }
  }

  if (j.contains("marginals")) {
    if (!j["marginals"].is_array() || j["marginals"].empty()) {
      errors.add("/marginals", "expected a non-empty array");
    } else {
      for (std::size_t i = 0; i < j["marginals"].size(); ++i) {
        const auto parsed = detail::parse_marginal(
            j["marginals"][i], "/marginals/" + std::to_string(i), errors);
        if (parsed) cfg.marginals.push_back(*parsed);
      }
    }
  }

  if (j.contains("correlation")) {
    const auto& c = j["correlation"];
    bool shape_ok = c.is_array() && !c.empty();
    const std::size_t d = shape_ok ? c.size() : 0;
    for (std::size_t r = 0; shape_ok && r < d; ++r)
      shape_ok = c[r].is_array() && c[r].size() == d;
    if (!shape_ok) {
      errors.add("/correlation", "expected a square d x d array of rows");
    } else {
      Eigen::MatrixXd m(d, d);
      for (std::size_t r = 0; r < d; ++r)
        for (std::size_t cc = 0; cc < d; ++cc)
          m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(cc)) =
              c[r][cc].get<double>();
      cfg.correlation = m;
      if (j.contains("marginals") && !cfg.marginals.empty() &&
          static_cast<std::size_t>(cfg.dimension()) != d)
        errors.add("/correlation",
                   "dimension " + std::to_string(d) +
                       " does not match /marginals length " +
                       std::to_string(cfg.dimension()));
      try {
        CorrelationMatrix::from(m);
      } catch (const std::exception& e) {
        errors.add("/correlation", e.what());
      }
    }
  }

  if (j.contains("model")) {
    ModelConfig mc;
    const auto& jm = j["model"];
    if (jm.contains("builtin")) {
      mc.builtin = jm["builtin"].get<std::string>();
      if (jm.contains("params")) mc.builtin_params = jm["params"];
    } else if (jm.contains("external")) {
      mc.external = detail::parse_external_model(jm["external"],
                                                 "/model/external", errors);
    } else {
      errors.add("/model", "expected \"builtin\" or \"external\"");
    }
    cfg.model = std::move(mc);
  }

  // analysis block
  const nlohmann::json ja =
      j.contains("analysis") ? j["analysis"] : nlohmann::json::object();
  auto& a = cfg.analysis;
  {
    const std::string type = ja.value("type", std::string("sample"));
    if (type == "sample") a.type = AnalysisType::sample;
    else if (type == "propagate") a.type = AnalysisType::propagate;
    else if (type == "reliability") a.type = AnalysisType::reliability;
    else if (type == "sensitivity") a.type = AnalysisType::sensitivity;
    else if (type == "surrogate") a.type = AnalysisType::surrogate;
    else
      errors.add("/analysis/type",
                 "expected sample|propagate|reliability|sensitivity|surrogate");
  }
  a.n = ja.value("n", 1000);
  if (a.n < 1) errors.add("/analysis/n", "must be >= 1");
  a.sample_method = ja.value("method", std::string("monte_carlo"));
  a.lhs_criterion = ja.value("criterion", std::string("random"));
  if (ja.contains("cells_per_dim"))
    a.cells_per_dim = ja["cells_per_dim"].get<std::vector<int>>();
  a.n_per_stratum = ja.value("n_per_stratum", 1);

  if (a.type == AnalysisType::reliability) {
    a.reliability_method = ja.value("method", std::string("form"));
    if (a.reliability_method != "form" && a.reliability_method != "sorm" &&
        a.reliability_method != "subset")
      errors.add("/analysis/method", "expected form|sorm|subset");
    a.form_opts.tol_u = ja.value("tol_u", 1e-6);
    a.form_opts.tol_g = ja.value("tol_g", 1e-6);
    a.form_opts.max_iter = ja.value("max_iter", 100);
    a.form_opts.fd_step = ja.value("fd_step", 1e-6);
    if (ja.contains("u0")) a.u0 = io::vector_from_json(ja["u0"]);
    a.subset_opts.n_per_level = ja.value("n_per_level", 1000);
    a.subset_opts.p0 = ja.value("p0", 0.1);
    a.subset_opts.proposal_scale = ja.value("proposal_scale", 1.0);
    a.subset_opts.max_levels = ja.value("max_levels", 20);
  } else if (a.type == AnalysisType::sensitivity) {
    a.sensitivity_method = ja.value("method", std::string("sobol"));
    if (a.sensitivity_method != "sobol" && a.sensitivity_method != "morris" &&
        a.sensitivity_method != "chatterjee" &&
        a.sensitivity_method != "cramer_von_mises" &&
        a.sensitivity_method != "pce")
      errors.add("/analysis/method",
                 "expected sobol|morris|chatterjee|cramer_von_mises|pce");
    a.morris_trajectories = ja.value("n_trajectories", 10);
    a.morris_levels = ja.value("n_levels", 4);
    a.cvm_m_grid = ja.value("m_grid", 100);
    a.bootstrap_resamples = ja.value("bootstrap", 0);
    a.pce_degree = ja.value("degree", 5);
    a.pce_truncation = ja.value("truncation", std::string("total_degree"));
    a.pce_q = ja.value("q", 1.0);
    a.pce_regressor = ja.value("regressor", std::string("least_squares"));
    a.ridge_lambda = ja.value("lambda", 1e-6);
    a.lars_max_terms = ja.value("max_terms", -1);
  } else if (a.type == AnalysisType::surrogate) {
    a.surrogate_kind = ja.value("kind", std::string("gpr"));
    if (a.surrogate_kind != "gpr" && a.surrogate_kind != "pce")
      errors.add("/analysis/kind", "expected gpr|pce");
    a.n_train = ja.value("n_train", 100);
    a.train_sampling = ja.value("sampling", std::string("latin_hypercube"));
    a.gpr_kernel = ja.value("kernel", std::string("rbf"));
    if (ja.contains("noise") && ja["noise"].is_number())
      a.gpr_noise = ja["noise"].get<double>();
    a.gpr_restarts = ja.value("n_restarts", 10);
    a.pce_degree = ja.value("degree", 5);
    a.pce_truncation = ja.value("truncation", std::string("total_degree"));
    a.pce_q = ja.value("q", 1.0);
    a.pce_regressor = ja.value("regressor", std::string("least_squares"));
    a.ridge_lambda = ja.value("lambda", 1e-6);
    a.lars_max_terms = ja.value("max_terms", -1);
  }

  // cross-field requirements
  const bool needs_model = a.type != AnalysisType::sample;
  const bool needs_marginals = true;
  if (needs_marginals && cfg.marginals.empty() && !j.contains("marginals"))
    errors.add("/marginals", "required for this analysis");
  if (needs_model && !cfg.model) errors.add("/model", "required for this analysis");

  if (cfg.model && !cfg.marginals.empty()) {
    try {
      const ModelSpec m = build_model(cfg);
      if (m.input_dim() != cfg.dimension())
        errors.add("/model", "model arity " + std::to_string(m.input_dim()) +
                                 " does not match /marginals length " +
                                 std::to_string(cfg.dimension()));
    } catch (const std::exception& e) {
      errors.add("/model", e.what());
    }
  }

  errors.raise_if_any();

  // canonical resolved config with defaults materialized
  nlohmann::json r;
  r["seed"] = cfg.seed;
  r["workers"] = cfg.workers;
  r["output_dir"] = cfg.output_dir.string();
  r["log_level"] = log::level_name(cfg.log_level);
  if (!cfg.marginals.empty()) {
    nlohmann::json marr = nlohmann::json::array();
    for (const auto& m : cfg.marginals)
      marr.push_back(io::distribution_to_json(m));
    r["marginals"] = marr;
  }
  if (cfg.correlation) r["correlation"] = io::matrix_to_json(*cfg.correlation);
  if (j.contains("model")) r["model"] = j["model"];
  nlohmann::json ra = ja;
  ra["type"] = analysis_type_name(a.type);
  ra["n"] = a.n;
  r["analysis"] = ra;
  cfg.resolved = r;
  return cfg;
}

inline StudyConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config_json(j);
}

}  // namespace uq
