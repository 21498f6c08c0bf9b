#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "support/test_support.hpp"
#include "uq/config.hpp"
#include "uq/io.hpp"
#include "uq/study.hpp"

using Catch::Approx;
namespace fs = std::filesystem;

namespace {

nlohmann::json minimal_sample_config() {
  return nlohmann::json{
      {"seed", 1},
      {"marginals",
       {{{"family", "normal"}, {"params", {{"mean", 0.0}, {"std", 1.0}}}}}},
      {"analysis", {{"type", "sample"}, {"n", 10}}}};
}

nlohmann::json form_config(const fs::path& out) {
  return nlohmann::json{
      {"seed", 7},
      {"output_dir", out.string()},
      {"marginals",
       {{{"family", "normal"}, {"params", {{"mean", 0.0}, {"std", 1.0}}}},
        {{"family", "normal"}, {"params", {{"mean", 0.0}, {"std", 1.0}}}}}},
      {"model",
       {{"builtin", "linear_limit_state"},
        {"params", {{"beta", 3.0}, {"a", {1.0, 0.0}}}}}},
      {"analysis", {{"type", "reliability"}, {"method", "form"}}}};
}

std::string config_message(const nlohmann::json& j) {
  try {
    uq::parse_config_json(j);
  } catch (const uq::config_error& e) {
    return e.what();
  }
  return {};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(UQ_CLI_BIN) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("minimal config parses with defaults materialized", "[cli]") {
  const auto cfg = uq::parse_config_json(minimal_sample_config());
  CHECK(cfg.seed == 1);
  CHECK(cfg.workers == 1);
  CHECK(cfg.analysis.type == uq::AnalysisType::sample);
  CHECK(cfg.dimension() == 1);
  CHECK(cfg.resolved.contains("workers"));
  CHECK(cfg.resolved.at("log_level") == "ERROR");
}

TEST_CASE("dimension mismatches name both offending fields", "[cli]") {
  auto j = minimal_sample_config();
  j["marginals"].push_back(j["marginals"][0]);
  j["marginals"].push_back(j["marginals"][0]);  // three marginals now
  j["correlation"] = {{1.0, 0.2}, {0.2, 1.0}};
  const std::string msg = config_message(j);
  CHECK(msg.find("/correlation") != std::string::npos);
  CHECK(msg.find("/marginals") != std::string::npos);
}

TEST_CASE("unknown families suggest the nearest known name", "[cli]") {
  auto j = minimal_sample_config();
  j["marginals"][0]["family"] = "gaussiann";
  const std::string msg = config_message(j);
  CHECK(msg.find("gaussiann") != std::string::npos);
  CHECK(msg.find("did you mean \"normal\"") != std::string::npos);
}

TEST_CASE("all violations are reported at once with JSON paths", "[cli]") {
  nlohmann::json j = {
      {"workers", 0},
      {"marginals",
       {{{"family", "nrmal"}, {"params", {{"mean", 0.0}, {"std", 1.0}}}},
        {{"family", "uniform"}, {"params", {{"a", 2.0}, {"b", 1.0}}}}}},
      {"analysis", {{"type", "sample"}}}};
  const std::string msg = config_message(j);
  CHECK(msg.find("/seed") != std::string::npos);
  CHECK(msg.find("/workers") != std::string::npos);
  CHECK(msg.find("/marginals/0/family") != std::string::npos);
  CHECK(msg.find("/marginals/1/params") != std::string::npos);
}

TEST_CASE("seed is mandatory", "[cli]") {
  auto j = minimal_sample_config();
  j.erase("seed");
  CHECK(config_message(j).find("/seed") != std::string::npos);
}

TEST_CASE("a form study writes the expected probability of failure",
          "[cli]") {
  testsupport::TempDir tmp("form_study");
  const auto cfg = uq::parse_config_json(form_config(tmp.path() / "out"));
  const int code = uq::run_study(cfg);
  uq::log::Logger::instance().reset_sinks();
  CHECK(code == 0);
  const auto result = nlohmann::json::parse(
      uq::io::read_file(tmp.path() / "out" / "result.json"));
  CHECK(result.at("method") == "form");
  CHECK(result.at("converged") == true);
  CHECK(result.at("beta").get<double>() == Approx(3.0).margin(1e-6));
  CHECK(result.at("pf").get<double>() == Approx(1.3499e-3).epsilon(1e-3));
  CHECK(result.at("estimators").at("search") == "hlrf");
  const auto manifest = nlohmann::json::parse(
      uq::io::read_file(tmp.path() / "out" / "manifest.json"));
  CHECK(manifest.at("seed") == 7);
  CHECK(manifest.contains("config_hash"));
}

TEST_CASE("identical config and seed reproduce result.json byte-for-byte",
          "[cli]") {
  testsupport::TempDir tmp("determinism");
  auto j = nlohmann::json{
      {"seed", 11},
      {"marginals",
       {{{"family", "uniform"},
         {"params", {{"a", -std::numbers::pi}, {"b", std::numbers::pi}}}},
        {{"family", "uniform"},
         {"params", {{"a", -std::numbers::pi}, {"b", std::numbers::pi}}}},
        {{"family", "uniform"},
         {"params", {{"a", -std::numbers::pi}, {"b", std::numbers::pi}}}}}},
      {"model", {{"builtin", "ishigami"}}},
      {"analysis",
       {{"type", "sensitivity"}, {"method", "sobol"}, {"n", 256}}}};
  j["output_dir"] = (tmp.path() / "a").string();
  const int code_a = uq::run_study(uq::parse_config_json(j));
  j["output_dir"] = (tmp.path() / "b").string();
  const int code_b = uq::run_study(uq::parse_config_json(j));
  uq::log::Logger::instance().reset_sinks();
  CHECK(code_a == 0);
  CHECK(code_b == 0);
  CHECK(uq::io::read_file(tmp.path() / "a" / "result.json") ==
        uq::io::read_file(tmp.path() / "b" / "result.json"));
}

TEST_CASE("resolved configs re-feed idempotently", "[cli]") {
  testsupport::TempDir tmp("resolved");
  auto j = form_config(tmp.path() / "first");
  const int code = uq::run_study(uq::parse_config_json(j));
  REQUIRE(code == 0);
  auto resolved = uq::parse_config(tmp.path() / "first" / "resolved_config.json");
  resolved.output_dir = tmp.path() / "second";
  const int code2 = uq::run_study(resolved);
  uq::log::Logger::instance().reset_sinks();
  CHECK(code2 == 0);
  CHECK(uq::io::read_file(tmp.path() / "first" / "result.json") ==
        uq::io::read_file(tmp.path() / "second" / "result.json"));
}

TEST_CASE("sample studies emit csv with the external column contract",
          "[cli]") {
  testsupport::TempDir tmp("samplecsv");
  auto j = minimal_sample_config();
  j["marginals"].push_back(
      {{"family", "gaussian"}, {"params", {{"mean", 1.0}, {"std", 2.0}}}});
  j["output_dir"] = (tmp.path() / "out").string();
  const int code = uq::run_study(uq::parse_config_json(j));
  uq::log::Logger::instance().reset_sinks();
  REQUIRE(code == 0);
  const std::string csv =
      uq::io::read_file(tmp.path() / "out" / "samples.csv");
  CHECK(csv.rfind("x1,x2\r\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);  // header + 10 rows
}

TEST_CASE("external models that fail per sample leave exit code 0", "[cli]") {
  testsupport::TempDir tmp("extstudy");
  {
    std::ofstream script(tmp.path() / "model.py");
    script << "import sys\n"
              "with open('input.txt') as f:\n"
              "    x = float(f.read().split('=')[1])\n"
              "if x > 0.5:\n"
              "    sys.exit(2)\n"
              "with open('output.txt', 'w') as f:\n"
              "    f.write(repr(2.0 * x))\n";
  }
  nlohmann::json j = {
      {"seed", 3},
      {"output_dir", (tmp.path() / "out").string()},
      {"marginals",
       {{{"family", "uniform"}, {"params", {{"a", 0.0}, {"b", 1.0}}}}}},
      {"model",
       {{"external",
         {{"template", "x={{x}}\n"},
          {"var_names", {"x"}},
          {"command", {"python3", (tmp.path() / "model.py").string()}}}}}},
      {"analysis", {{"type", "propagate"}, {"n", 12}}}};
  const int code = uq::run_study(uq::parse_config_json(j));
  uq::log::Logger::instance().reset_sinks();
  CHECK(code == 0);
  const auto result = nlohmann::json::parse(
      uq::io::read_file(tmp.path() / "out" / "result.json"));
  CHECK(result.at("n_failed").get<int>() >= 1);
  CHECK(result.at("failures").size() >= 1);
}

TEST_CASE("log levels filter identically across sinks", "[cli]") {
  auto& logger = uq::log::Logger::instance();
  logger.reset_sinks();
  std::ostringstream a, b;
  logger.add_sink(&a);
  logger.add_sink(&b);

  logger.set_level(uq::log::Level::error);
  uq::log::info("hidden info");
  uq::log::error("visible error");
  CHECK(a.str().find("hidden info") == std::string::npos);
  CHECK(a.str().find("visible error") != std::string::npos);
  CHECK(a.str() == b.str());

  logger.set_level(uq::log::Level::debug);
  uq::log::debug("now visible");
  CHECK(a.str().find("now visible") != std::string::npos);
  CHECK(a.str() == b.str());

  logger.set_level(uq::log::Level::critical);
  uq::log::error("suppressed");
  CHECK(a.str().find("suppressed") == std::string::npos);
  CHECK(a.str() == b.str());

  logger.reset_sinks();
  logger.set_level(uq::log::Level::error);
  CHECK_THROWS_AS(uq::log::parse_level("loud"), uq::config_error);
}

TEST_CASE("debug level emits per-iteration form diagnostics", "[cli]") {
  auto& logger = uq::log::Logger::instance();
  logger.reset_sinks();
  std::ostringstream sink;
  logger.add_sink(&sink);

  testsupport::TempDir tmp("formlog");
  auto j = form_config(tmp.path() / "quiet");
  REQUIRE(uq::run_study(uq::parse_config_json(j)) == 0);
  CHECK(sink.str().find("form: iter") == std::string::npos);  // default ERROR

  std::ostringstream verbose;
  logger.reset_sinks();
  logger.add_sink(&verbose);
  j["output_dir"] = (tmp.path() / "loud").string();
  j["log_level"] = "debug";
  REQUIRE(uq::run_study(uq::parse_config_json(j)) == 0);
  CHECK(verbose.str().find("form: iter") != std::string::npos);

  logger.reset_sinks();
  logger.set_level(uq::log::Level::error);
}

TEST_CASE("cli binary drives studies end to end", "[cli]") {
  testsupport::TempDir tmp("binary");
  {
    std::ofstream out(tmp.path() / "cfg.json");
    out << form_config(tmp.path() / "out").dump(2);
  }
  CHECK(run_cli("reliability --config " +
                (tmp.path() / "cfg.json").string()) == 0);
  CHECK(fs::exists(tmp.path() / "out" / "result.json"));
  CHECK(fs::exists(tmp.path() / "out" / "manifest.json"));
  CHECK(fs::exists(tmp.path() / "out" / "run.log"));

  CHECK(run_cli("validate-config --config " +
                (tmp.path() / "cfg.json").string()) == 0);
  // subcommand/config mismatch is a configuration error
  CHECK(run_cli("sample --config " + (tmp.path() / "cfg.json").string()) == 2);
  // invalid config file
  {
    std::ofstream out(tmp.path() / "bad.json");
    out << "{\"marginals\": []}";
  }
  CHECK(run_cli("validate-config --config " +
                (tmp.path() / "bad.json").string()) == 2);
}

TEST_CASE("non-converged analyses exit with code 1", "[cli]") {
  testsupport::TempDir tmp("nonconv");
  auto j = form_config(tmp.path() / "out");
  j["model"] = {{"builtin", "parabolic_limit_state"},
                {"params", {{"beta", 2.0}, {"curvature", 0.4}}}};
  j["analysis"]["max_iter"] = 1;
  const int code = uq::run_study(uq::parse_config_json(j));
  uq::log::Logger::instance().reset_sinks();
  CHECK(code == 1);
  const auto result = nlohmann::json::parse(
      uq::io::read_file(tmp.path() / "out" / "result.json"));
  CHECK(result.at("converged") == false);
}

TEST_CASE("surrogate studies fit and persist models", "[cli]") {
  testsupport::TempDir tmp("surrogate_study");
  nlohmann::json j = {
      {"seed", 5},
      {"output_dir", (tmp.path() / "gpr").string()},
      {"marginals",
       {{{"family", "uniform"}, {"params", {{"a", 0.0}, {"b", 6.28}}}}}},
      {"model",
       {{"builtin", "linear_limit_state"}, {"params", {{"beta", 0.0}, {"a", {-1.0}}}}}},
      {"analysis",
       {{"type", "surrogate"}, {"kind", "gpr"}, {"n_train", 12},
        {"noise", 1e-8}, {"n_restarts", 3}}}};
  REQUIRE(uq::run_study(uq::parse_config_json(j)) == 0);
  const auto gpr_json = nlohmann::json::parse(
      uq::io::read_file(tmp.path() / "gpr" / "surrogate.json"));
  CHECK(gpr_json.at("schema") == "uq.surrogate.gpr/1");
  const auto gpr_result = nlohmann::json::parse(
      uq::io::read_file(tmp.path() / "gpr" / "result.json"));
  CHECK(gpr_result.at("training_rmse").get<double>() < 1e-3);

  j["output_dir"] = (tmp.path() / "pce").string();
  j["analysis"] = {{"type", "surrogate"}, {"kind", "pce"},
                   {"n_train", 40},     {"degree", 2}};
  REQUIRE(uq::run_study(uq::parse_config_json(j)) == 0);
  uq::log::Logger::instance().reset_sinks();
  const auto pce_json = nlohmann::json::parse(
      uq::io::read_file(tmp.path() / "pce" / "surrogate.json"));
  CHECK(pce_json.at("schema") == "uq.surrogate.pce/1");
  const auto reloaded = uq::io::pce_from_json(pce_json);
  // the linear target is inside the basis: mean 3, slope -1 on [0, 6.28]
  CHECK(reloaded.mean() == Approx(-(0.0 + 6.28) / 2.0 * -1.0).margin(1e-6));
}

TEST_CASE("stratified sample studies carry the weight column", "[cli]") {
  testsupport::TempDir tmp("strat_study");
  nlohmann::json j = {
      {"seed", 2},
      {"output_dir", (tmp.path() / "out").string()},
      {"marginals",
       {{{"family", "uniform"}, {"params", {{"a", 0.0}, {"b", 1.0}}}},
        {{"family", "uniform"}, {"params", {{"a", 0.0}, {"b", 1.0}}}}}},
      {"analysis",
       {{"type", "sample"}, {"method", "stratified"},
        {"cells_per_dim", {2, 2}}, {"n_per_stratum", 3}}}};
  REQUIRE(uq::run_study(uq::parse_config_json(j)) == 0);
  uq::log::Logger::instance().reset_sinks();
  const std::string csv = uq::io::read_file(tmp.path() / "out" / "samples.csv");
  CHECK(csv.rfind("x1,x2,weight\r\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);  // header + 4*3 rows
}

TEST_CASE("the verbose flag surfaces info lines in the log file", "[cli]") {
  testsupport::TempDir tmp("verbose");
  {
    std::ofstream out(tmp.path() / "cfg.json");
    out << form_config(tmp.path() / "out").dump(2);
  }
  REQUIRE(run_cli("reliability --verbose --config " +
                  (tmp.path() / "cfg.json").string()) == 0);
  const std::string log = uq::io::read_file(tmp.path() / "out" / "run.log");
  CHECK(log.find("[INFO]") != std::string::npos);

  // default severity keeps info out of the log
  testsupport::TempDir tmp2("quiet");
  {
    std::ofstream out(tmp2.path() / "cfg.json");
    out << form_config(tmp2.path() / "out").dump(2);
  }
  REQUIRE(run_cli("reliability --config " +
                  (tmp2.path() / "cfg.json").string()) == 0);
  const std::string quiet = uq::io::read_file(tmp2.path() / "out" / "run.log");
  CHECK(quiet.find("[INFO]") == std::string::npos);
}
