#pragma once

// End-to-end study execution: builds the configured analysis, writes
// samples.csv / result.json / manifest.json / resolved_config.json under the
// output directory, and maps outcomes to exit codes (0 success, 1 analysis
// did not converge, 2 configuration or runtime error — raised as exceptions
// and mapped by the CLI).
//
// result.json is a pure function of (config, seed) for builtin models; wall
// times and timestamps live only in manifest.json.

#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <string>
#include <vector>

#include "uq/config.hpp"
#include "uq/gpr.hpp"
#include "uq/io.hpp"
#include "uq/logging.hpp"
#include "uq/mcmc.hpp"
#include "uq/pce.hpp"
#include "uq/reliability.hpp"
#include "uq/runner.hpp"
#include "uq/sampling.hpp"
#include "uq/sensitivity.hpp"
#include "uq/surrogate_io.hpp"

namespace uq {

namespace detail {

inline SampleSet draw_study_samples(const StudyConfig& cfg, int n) {
  const auto& method = cfg.analysis.sample_method;
  RandomStream rng(cfg.seed);
  if (method == "monte_carlo") {
    if (cfg.correlation) {
      const NatafTransform t = cfg.transform();
      Eigen::MatrixXd u(n, cfg.dimension());
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < cfg.dimension(); ++j) u(i, j) = rng.normal();
      SampleSet s;
      s.samples = t.inverse(u);
      s.seed_record = {RandomStream::generator_id(), cfg.seed};
      return s;
    }
    return monte_carlo(cfg.joint(), n, rng);
  }
  if (cfg.correlation)
    throw config_error("sampling method \"" + method +
                       "\" supports independent marginals only");
  if (method == "latin_hypercube") {
    LhsCriterion crit = LhsCriterion::random;
    if (cfg.analysis.lhs_criterion == "centered")
      crit = LhsCriterion::centered;
    else if (cfg.analysis.lhs_criterion == "maximin")
      crit = LhsCriterion::maximin;
    else if (cfg.analysis.lhs_criterion != "random")
      throw config_error("unknown LHS criterion \"" +
                         cfg.analysis.lhs_criterion + "\"");
    return latin_hypercube(cfg.marginals, n, crit, rng);
  }
  if (method == "stratified") {
    if (cfg.analysis.cells_per_dim.empty())
      throw config_error("stratified sampling requires analysis.cells_per_dim");
    if (static_cast<int>(cfg.analysis.cells_per_dim.size()) != cfg.dimension())
      throw config_error("analysis.cells_per_dim length must equal dimension");
    const auto strata =
        RectangularStrata::regular_grid(cfg.analysis.cells_per_dim);
    const std::vector<int> counts(static_cast<std::size_t>(strata.count()),
                                  cfg.analysis.n_per_stratum);
    return stratified(strata, cfg.marginals, counts, rng);
  }
  throw config_error("unknown sampling method \"" + method +
                     "\" (monte_carlo|latin_hypercube|stratified)");
}

inline nlohmann::json summary_stats(const Eigen::MatrixXd& m) {
  nlohmann::json means = nlohmann::json::array();
  nlohmann::json stds = nlohmann::json::array();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double mean = m.col(j).mean();
    means.push_back(mean);
    stds.push_back(std::sqrt((m.col(j).array() - mean).square().mean()));
  }
  return {{"mean", means}, {"std", stds}};
}

inline nlohmann::json run_sample_analysis(const StudyConfig& cfg) {
  const SampleSet s = draw_study_samples(cfg, cfg.analysis.n);
  io::write_samples_csv(cfg.output_dir / "samples.csv", s);
  nlohmann::json result;
  result["analysis"] = "sample";
  result["method"] = cfg.analysis.sample_method;
  result["n"] = static_cast<long>(s.size());
  result["d"] = static_cast<long>(s.dim());
  result["seed"] = cfg.seed;
  result["generator"] = s.seed_record.generator;
  result["space"] = sample_space_name(s.space);
  result["samples"] = summary_stats(s.samples);
  result["files"] = {{"samples", "samples.csv"}};
  return result;
}

inline nlohmann::json run_propagate_analysis(const StudyConfig& cfg,
                                             int* exit_code) {
  const SampleSet s = draw_study_samples(cfg, cfg.analysis.n);
  io::write_samples_csv(cfg.output_dir / "samples.csv", s);
  const ModelSpec model = build_model(cfg);
  const ExecutionReport report = run(model, s, cfg.workers);

  std::vector<Eigen::Index> ok_rows;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (report.statuses[static_cast<std::size_t>(i)].ok) ok_rows.push_back(i);

  Eigen::MatrixXd table(static_cast<Eigen::Index>(ok_rows.size()),
                        1 + report.outputs.cols());
  for (Eigen::Index k = 0; k < table.rows(); ++k) {
    table(k, 0) = static_cast<double>(ok_rows[static_cast<std::size_t>(k)]);
    table.block(k, 1, 1, report.outputs.cols()) =
        report.outputs.row(ok_rows[static_cast<std::size_t>(k)]);
  }
  std::vector<std::string> cols = {"index"};
  for (Eigen::Index j = 0; j < report.outputs.cols(); ++j)
    cols.push_back("y" + std::to_string(j + 1));
  io::write_matrix_csv(cfg.output_dir / "outputs.csv", table, cols);

  nlohmann::json failures = nlohmann::json::array();
  for (std::size_t i = 0; i < report.statuses.size() && failures.size() < 20;
       ++i)
    if (!report.statuses[i].ok)
      failures.push_back({{"index", i}, {"reason", report.statuses[i].reason}});
  if (report.n_failed() > 0)
    log::warn("propagate: " + std::to_string(report.n_failed()) + " of " +
              std::to_string(s.size()) +
              " model evaluations failed; result excludes them");

  nlohmann::json result;
  result["analysis"] = "propagate";
  result["n_evals"] = static_cast<long>(s.size());
  result["n_failed"] = report.n_failed();
  result["failures"] = failures;
  result["seed"] = cfg.seed;
  if (!ok_rows.empty())
    result["outputs"] =
        summary_stats(table.rightCols(report.outputs.cols()));
  result["files"] = {{"samples", "samples.csv"}, {"outputs", "outputs.csv"}};
  (void)exit_code;
  return result;
}

inline nlohmann::json run_reliability_analysis(const StudyConfig& cfg,
                                               int* exit_code) {
  const ModelSpec model = build_model(cfg);
  const LimitState ls(model, cfg.transform(), cfg.workers);
  const auto& a = cfg.analysis;
  nlohmann::json result;
  result["analysis"] = "reliability";
  result["seed"] = cfg.seed;

  if (a.reliability_method == "form" || a.reliability_method == "sorm") {
    const Eigen::VectorXd u0 =
        a.u0 ? *a.u0 : Eigen::VectorXd::Zero(ls.dimension());
    const FormResult fr = form(ls, u0, a.form_opts);
    result["method"] = a.reliability_method;
    result["beta"] = fr.beta;
    result["pf"] = fr.pf;
    result["design_point_u"] = io::vector_to_json(fr.u_star);
    result["design_point_x"] = io::vector_to_json(fr.x_star);
    result["alpha"] = io::vector_to_json(fr.alpha);
    result["iterations"] = fr.iterations;
    result["converged"] = fr.converged;
    result["estimators"] = {{"search", "hlrf"}, {"gradient", "central_fd"}};
    if (!fr.converged) {
      *exit_code = 1;
      log::error("form: did not converge within max_iter iterations");
      return result;
    }
    if (a.reliability_method == "sorm") {
      const SormResult sr = sorm(fr, ls);
      result["pf_form"] = fr.pf;
      result["pf"] = sr.pf;
      result["curvatures"] = io::vector_to_json(sr.curvatures);
      result["estimators"]["sorm_correction"] = "breitung";
    }
    return result;
  }
  if (a.reliability_method == "subset") {
    SubsetOptions opts = a.subset_opts;
    opts.seed = cfg.seed;
    const SubsetResult sr = subset_simulation(ls, opts);
    result["method"] = "subset";
    result["pf"] = sr.pf;
    result["cov"] = sr.cov;
    result["thresholds"] = sr.thresholds;
    result["n_levels"] = sr.n_levels;
    result["samples_per_level"] = sr.samples_per_level;
    result["n_model_evals"] = sr.n_model_evals;
    result["converged"] = sr.converged;
    result["estimators"] = {{"cov", "au_beck"},
                            {"conditional_sampler", "mmh"}};
    if (!sr.converged) {
      *exit_code = 1;
      log::error("subset simulation: threshold did not reach 0");
    }
    return result;
  }
  throw config_error("unknown reliability method \"" + a.reliability_method +
                     "\"");
}

inline nlohmann::json run_sensitivity_analysis(const StudyConfig& cfg) {
  const auto& a = cfg.analysis;
  if (cfg.correlation)
    throw config_error("sensitivity analyses require independent marginals");
  const ModelSpec model = build_model(cfg);
  nlohmann::json result;
  result["analysis"] = "sensitivity";
  result["seed"] = cfg.seed;
  result["method"] = a.sensitivity_method;

  SensitivityResult sres;
  nlohmann::json estimators = nlohmann::json::object();
  if (a.sensitivity_method == "morris") {
    MorrisOptions opts;
    opts.n_trajectories = a.morris_trajectories;
    opts.n_levels = a.morris_levels;
    opts.seed = cfg.seed;
    opts.workers = cfg.workers;
    sres = morris(model, cfg.marginals, opts);
    result["mu"] = io::vector_to_json(sres.mu);
    result["mu_star"] = io::vector_to_json(sres.mu_star);
    result["sigma"] = io::vector_to_json(sres.sigma);
    estimators["screening"] = "elementary_effects";
  } else if (a.sensitivity_method == "sobol") {
    SobolOptions opts;
    opts.n = a.n;
    opts.seed = cfg.seed;
    opts.workers = cfg.workers;
    opts.bootstrap_resamples = a.bootstrap_resamples;
    sres = sobol(model, cfg.joint(), opts);
    estimators["sobol_first"] = "janon";
    estimators["sobol_total"] = "jansen";
    if (sres.first_order_stderr.size()) {
      result["first_order_stderr"] = io::vector_to_json(sres.first_order_stderr);
      result["total_order_stderr"] = io::vector_to_json(sres.total_order_stderr);
      estimators["ci"] = "bootstrap_percentile";
    }
  } else if (a.sensitivity_method == "chatterjee") {
    sres = chatterjee_sensitivity(model, cfg.joint(), a.n, cfg.seed,
                                  cfg.workers);
    estimators["ties"] = "max_rank_corrected";
  } else if (a.sensitivity_method == "cramer_von_mises") {
    CvmOptions opts;
    opts.n = a.n;
    opts.m_grid = a.cvm_m_grid;
    opts.seed = cfg.seed;
    opts.workers = cfg.workers;
    sres = cramer_von_mises(model, cfg.joint(), opts);
    estimators["inner"] = "janon_indicator";
    estimators["outer_grid"] = "empirical_quantiles";
  } else if (a.sensitivity_method == "pce") {
    RandomStream rng(cfg.seed);
    const SampleSet train =
        latin_hypercube(cfg.marginals, a.n, LhsCriterion::random, rng);
    const Eigen::VectorXd y =
        run_scalar_strict(model, train.samples, cfg.workers);
    Truncation trunc = Truncation::total_degree;
    if (a.pce_truncation == "tensor_product") trunc = Truncation::tensor_product;
    else if (a.pce_truncation == "hyperbolic") trunc = Truncation::hyperbolic;
    const PceBasis basis =
        basis_for(cfg.marginals, trunc, a.pce_degree, a.pce_q);
    PceFitOptions fit_opts;
    if (a.pce_regressor == "ridge") fit_opts.regressor = PceRegressor::ridge;
    else if (a.pce_regressor == "lars") fit_opts.regressor = PceRegressor::lars;
    fit_opts.ridge_lambda = a.ridge_lambda;
    fit_opts.lars_max_terms = a.lars_max_terms;
    const PceModel pce = pce_fit(train.samples, y, cfg.marginals, basis,
                                 fit_opts);
    sres = pce_sensitivity(pce);
    sres.n_model_evals = a.n;
    sres.seed_record = {RandomStream::generator_id(), cfg.seed};
    estimators["surrogate"] = "pce";
    estimators["regressor"] = a.pce_regressor;
    result["degree"] = a.pce_degree;
    if (pce.validation_error) result["validation_error"] = *pce.validation_error;
  } else {
    throw config_error("unknown sensitivity method \"" + a.sensitivity_method +
                       "\"");
  }

  if (sres.first_order.size())
    result["first_order"] = io::vector_to_json(sres.first_order);
  if (sres.total_order.size())
    result["total_order"] = io::vector_to_json(sres.total_order);
  result["n_model_evals"] = sres.n_model_evals;
  result["estimators"] = estimators;
  return result;
}

inline nlohmann::json run_surrogate_analysis(const StudyConfig& cfg) {
  const auto& a = cfg.analysis;
  const ModelSpec model = build_model(cfg);
  RandomStream rng(cfg.seed);
  SampleSet train;
  if (a.train_sampling == "monte_carlo")
    train = monte_carlo(cfg.joint(), a.n_train, rng);
  else
    train = latin_hypercube(cfg.marginals, a.n_train, LhsCriterion::random, rng);
  const Eigen::VectorXd y = run_scalar_strict(model, train.samples, cfg.workers);

  nlohmann::json result;
  result["analysis"] = "surrogate";
  result["kind"] = a.surrogate_kind;
  result["n_train"] = a.n_train;
  result["seed"] = cfg.seed;

  if (a.surrogate_kind == "gpr") {
    GprFitOptions opts;
    opts.fixed_noise = a.gpr_noise;
    opts.n_restarts = a.gpr_restarts;
    opts.seed = cfg.seed;
    const GprModel m = gpr_fit(train.samples, y,
                               io::kernel_kind_from_name(a.gpr_kernel), opts);
    io::write_file(cfg.output_dir / "surrogate.json",
                   io::gpr_to_json(m).dump(2) + "\n");
    const auto [mean, var] = gpr_predict(m, train.samples);
    result["lml"] = m.lml;
    result["training_rmse"] =
        std::sqrt((mean - y).squaredNorm() / static_cast<double>(y.size()));
    result["kernel"] = {{"kind", kernel_name(m.kernel.kind)},
                        {"lengthscales", io::vector_to_json(m.kernel.lengthscales)},
                        {"signal_variance", m.kernel.signal_variance}};
    result["noise_variance"] = m.noise_variance;
  } else {
    Truncation trunc = Truncation::total_degree;
    if (a.pce_truncation == "tensor_product") trunc = Truncation::tensor_product;
    else if (a.pce_truncation == "hyperbolic") trunc = Truncation::hyperbolic;
    const PceBasis basis =
        basis_for(cfg.marginals, trunc, a.pce_degree, a.pce_q);
    PceFitOptions fit_opts;
    if (a.pce_regressor == "ridge") fit_opts.regressor = PceRegressor::ridge;
    else if (a.pce_regressor == "lars") fit_opts.regressor = PceRegressor::lars;
    fit_opts.ridge_lambda = a.ridge_lambda;
    fit_opts.lars_max_terms = a.lars_max_terms;
    const PceModel m =
        pce_fit(train.samples, y, cfg.marginals, basis, fit_opts);
    io::write_file(cfg.output_dir / "surrogate.json",
                   io::pce_to_json(m).dump(2) + "\n");
    const auto [mean, variance] = pce_moments(m);
    result["n_terms"] = m.basis.size();
    result["degree"] = a.pce_degree;
    result["regressor"] = a.pce_regressor;
    result["moments"] = {{"mean", mean}, {"variance", variance}};
    if (m.validation_error) result["validation_error"] = *m.validation_error;
  }
  result["files"] = {{"model", "surrogate.json"}};
  return result;
}

}  // namespace detail

/// Executes the configured study; returns the process exit code.
inline int run_study(const StudyConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  // external run directories are refreshed per invocation
  if (fs::exists(cfg.output_dir / "runs"))
    fs::remove_all(cfg.output_dir / "runs");

  auto& logger = log::Logger::instance();
  logger.set_level(cfg.log_level);
  logger.add_file_sink((cfg.output_dir / "run.log").string());

  const std::string canonical = cfg.resolved.dump();
  io::write_file(cfg.output_dir / "resolved_config.json",
                 cfg.resolved.dump(2) + "\n");
  log::info("study: " + std::string(analysis_type_name(cfg.analysis.type)) +
            " (seed " + std::to_string(cfg.seed) + ")");

  const auto start = std::chrono::steady_clock::now();
  int exit_code = 0;
  nlohmann::json result;
  switch (cfg.analysis.type) {
    case AnalysisType::sample:
      result = detail::run_sample_analysis(cfg);
      break;
    case AnalysisType::propagate:
      result = detail::run_propagate_analysis(cfg, &exit_code);
      break;
    case AnalysisType::reliability:
      result = detail::run_reliability_analysis(cfg, &exit_code);
      break;
    case AnalysisType::sensitivity:
      result = detail::run_sensitivity_analysis(cfg);
      break;
    case AnalysisType::surrogate:
      result = detail::run_surrogate_analysis(cfg);
      break;
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  io::write_file(cfg.output_dir / "result.json", result.dump(2) + "\n");

  nlohmann::json manifest;
  manifest["schema"] = "uq.manifest/1";
  manifest["artifact_version"] = UQ_VERSION;
  manifest["config_hash"] = io::fnv1a64_hex(canonical);
  manifest["hash_algorithm"] = "fnv1a64";
  manifest["seed"] = cfg.seed;
  manifest["generator"] = RandomStream::generator_id();
  manifest["timings"] = {{"total_seconds", elapsed}};
  {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    manifest["timestamp_utc"] = buf;
  }
  nlohmann::json inventory = nlohmann::json::array();
  for (const char* f : {"resolved_config.json", "result.json", "samples.csv",
                        "outputs.csv", "surrogate.json", "run.log"})
    if (fs::exists(cfg.output_dir / f)) inventory.push_back(f);
  manifest["files"] = inventory;
  io::write_file(cfg.output_dir / "manifest.json", manifest.dump(2) + "\n");

  log::info("study: finished with exit code " + std::to_string(exit_code) +
            " in " + std::to_string(elapsed) + " s");
  return exit_code;
}

}  // namespace uq
