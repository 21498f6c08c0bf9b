// uq: config-driven command line for uncertainty-quantification studies.
//
//   uq <subcommand> --config path [--workers N] [--log-level L]
//                   [--output-dir D] [--verbose]
//
// Subcommands mirror the analysis taxonomy: sample, propagate, reliability,
// sensitivity, surrogate, plus validate-config. Exit codes: 0 success,
// 1 analysis-level non-convergence, 2 configuration/runtime error.

#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "uq/uq.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<int> workers;
  std::optional<std::string> log_level;
  std::optional<std::string> output_dir;
  bool verbose = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "study configuration (JSON)")
      ->required();
  cmd->add_option("--workers", args.workers,
                  "parallel workers for model evaluation");
  cmd->add_option("--log-level", args.log_level,
                  "notset|debug|info|warn|error|critical (default error)");
  cmd->add_option("--output-dir", args.output_dir,
                  "overrides the config output directory");
  cmd->add_flag("--verbose", args.verbose, "shorthand for --log-level info");
}

uq::StudyConfig load(const CommonArgs& args,
                     std::optional<uq::AnalysisType> expected) {
  uq::StudyConfig cfg = uq::parse_config(args.config_path);
  if (args.workers) {
    if (*args.workers < 1) throw uq::config_error("--workers must be >= 1");
    cfg.workers = *args.workers;
    cfg.resolved["workers"] = cfg.workers;
  }
  if (args.output_dir) {
    cfg.output_dir = *args.output_dir;
    cfg.resolved["output_dir"] = cfg.output_dir.string();
  }
  if (args.log_level) cfg.log_level = uq::log::parse_level(*args.log_level);
  if (args.verbose && cfg.log_level > uq::log::Level::info)
    cfg.log_level = uq::log::Level::info;
  cfg.resolved["log_level"] = uq::log::level_name(cfg.log_level);
  if (expected && cfg.analysis.type != *expected)
    throw uq::config_error(
        std::string("config analysis type \"") +
        uq::analysis_type_name(cfg.analysis.type) +
        "\" does not match the subcommand \"" +
        uq::analysis_type_name(*expected) + "\"");
  return cfg;
}

int dispatch(const CommonArgs& args, uq::AnalysisType type) {
  const uq::StudyConfig cfg = load(args, type);
  return uq::run_study(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uncertainty quantification studies from JSON configs"};
  app.require_subcommand(1);

  CommonArgs sample_args, propagate_args, reliability_args, sensitivity_args,
      surrogate_args, validate_args;

  auto* cmd_sample =
      app.add_subcommand("sample", "draw samples and write samples.csv");
  add_common(cmd_sample, sample_args);
  auto* cmd_propagate = app.add_subcommand(
      "propagate", "run the model at sample points and summarize outputs");
  add_common(cmd_propagate, propagate_args);
  auto* cmd_reliability = app.add_subcommand(
      "reliability", "estimate failure probability (form/sorm/subset)");
  add_common(cmd_reliability, reliability_args);
  auto* cmd_sensitivity = app.add_subcommand(
      "sensitivity", "global sensitivity analysis");
  add_common(cmd_sensitivity, sensitivity_args);
  auto* cmd_surrogate = app.add_subcommand(
      "surrogate", "fit and save a surrogate model (gpr/pce)");
  add_common(cmd_surrogate, surrogate_args);
  auto* cmd_validate = app.add_subcommand(
      "validate-config", "parse and validate a config without running");
  add_common(cmd_validate, validate_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_sample->parsed())
      return dispatch(sample_args, uq::AnalysisType::sample);
    if (cmd_propagate->parsed())
      return dispatch(propagate_args, uq::AnalysisType::propagate);
    if (cmd_reliability->parsed())
      return dispatch(reliability_args, uq::AnalysisType::reliability);
    if (cmd_sensitivity->parsed())
      return dispatch(sensitivity_args, uq::AnalysisType::sensitivity);
    if (cmd_surrogate->parsed())
      return dispatch(surrogate_args, uq::AnalysisType::surrogate);
    if (cmd_validate->parsed()) {
      const uq::StudyConfig cfg = load(validate_args, std::nullopt);
      std::cout << "config valid: analysis="
                << uq::analysis_type_name(cfg.analysis.type)
                << " d=" << cfg.dimension() << " seed=" << cfg.seed << "\n";
      return 0;
    }
  } catch (const uq::config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    uq::log::critical(e.what());
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
