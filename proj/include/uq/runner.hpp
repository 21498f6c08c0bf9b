#pragma once

// Batch model execution. In-process models run on a thread pool, external
// models on a pool of child processes; either way the report is assembled by
// sample index, so ordering never depends on completion order, and a failing
// sample never aborts the batch.

#include <sys/types.h>
#include <sys/wait.h>
#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <Eigen/Dense>
#include <atomic>
#include <chrono>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "uq/errors.hpp"
#include "uq/model.hpp"
#include "uq/sample_set.hpp"

namespace uq {

struct SampleStatus {
  bool ok = false;
  std::string reason;  // empty when ok
};

struct ExecutionReport {
  Eigen::MatrixXd outputs;  // n x m; failed rows are NaN
  std::vector<SampleStatus> statuses;
  std::vector<double> wall_times;  // seconds per sample
  int parallelism = 1;

  int n_failed() const {
    int k = 0;
    for (const auto& s : statuses)
      if (!s.ok) ++k;
    return k;
  }
};

namespace detail {

inline void run_in_process(const InProcessModel& model,
                           const Eigen::MatrixXd& samples, int workers,
                           ExecutionReport& report) {
  const auto n = samples.rows();
  std::atomic<Eigen::Index> next{0};
  const auto worker = [&]() {
    while (true) {
      const Eigen::Index i = next.fetch_add(1);
      if (i >= n) return;
      const auto start = std::chrono::steady_clock::now();
      try {
        const Eigen::VectorXd y = model.fn(samples.row(i).transpose());
        if (y.size() != model.output_dim)
          throw numerical_error("output dimension mismatch");
        if (!y.allFinite()) throw numerical_error("non-finite output");
        report.outputs.row(i) = y.transpose();
        report.statuses[static_cast<std::size_t>(i)] = {true, {}};
      } catch (const std::exception& e) {
        report.statuses[static_cast<std::size_t>(i)] = {false, e.what()};
      }
      report.wall_times[static_cast<std::size_t>(i)] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                        start)
              .count();
    }
  };
  if (workers == 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

struct ChildProcess {
  pid_t pid = -1;
  Eigen::Index sample = -1;
  std::chrono::steady_clock::time_point started;
  std::filesystem::path dir;
};

inline pid_t spawn_in_dir(const std::vector<std::string>& command,
                          const std::filesystem::path& dir) {
  std::vector<char*> argv;
  argv.reserve(command.size() + 1);
  for (const auto& a : command) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  const pid_t pid = ::fork();
  if (pid < 0) throw numerical_error("runner: fork failed");
  if (pid == 0) {
    ::setpgid(0, 0);  // own process group so a timeout can kill the tree
    if (::chdir(dir.c_str()) != 0) ::_exit(126);
    const int out = ::open("stdout.log", O_WRONLY | O_CREAT | O_TRUNC, 0644);
    const int err = ::open("stderr.log", O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (out >= 0) ::dup2(out, STDOUT_FILENO);
    if (err >= 0) ::dup2(err, STDERR_FILENO);
    ::execvp(argv[0], argv.data());
    ::_exit(127);
  }
  ::setpgid(pid, pid);  // also from the parent to avoid a race
  return pid;
}

inline bool parse_output(const ExternalModel& model,
                         const std::filesystem::path& dir, Eigen::VectorXd& y,
                         std::string& reason) {
  const auto path = dir / model.parser.path;
  std::ifstream in(path);
  if (!in) {
    reason = "missing output file " + model.parser.path;
    return false;
  }
  if (model.parser.kind == OutputParserSpec::Kind::single_float_file) {
    double v = 0.0;
    if (!(in >> v) || !std::isfinite(v)) {
      reason = "unparseable output in " + model.parser.path;
      return false;
    }
    y.resize(1);
    y(0) = v;
    return true;
  }
  std::string line;
  while (std::getline(in, line))
    if (line.find_first_not_of(" \t\r\n") != std::string::npos) break;
  std::vector<double> values;
  std::size_t pos = 0;
  const std::string& delim = model.parser.delimiter;
  while (pos <= line.size()) {
    const std::size_t next = line.find(delim, pos);
    const std::string tok =
        line.substr(pos, next == std::string::npos ? line.size() - pos
                                                   : next - pos);
    if (tok.find_first_not_of(" \t\r\n") != std::string::npos) {
      try {
        values.push_back(std::stod(tok));
      } catch (...) {
        reason = "unparseable token '" + tok + "' in " + model.parser.path;
        return false;
      }
    }
    if (next == std::string::npos) break;
    pos = next + delim.size();
  }
  if (static_cast<int>(values.size()) != model.output_dim) {
    reason = "expected " + std::to_string(model.output_dim) +
             " values, found " + std::to_string(values.size());
    return false;
  }
  y = Eigen::Map<Eigen::VectorXd>(values.data(),
                                  static_cast<Eigen::Index>(values.size()));
  if (!y.allFinite()) {
    reason = "non-finite output value";
    return false;
  }
  return true;
}

inline void run_external(const ExternalModel& model,
                         const Eigen::MatrixXd& samples, int workers,
                         ExecutionReport& report) {
  const auto n = samples.rows();
  std::map<pid_t, ChildProcess> running;
  Eigen::Index next = 0;

  const auto finish = [&](const ChildProcess& child, int wait_status,
                          bool timed_out) {
    const auto i = child.sample;
    report.wall_times[static_cast<std::size_t>(i)] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      child.started)
            .count();
    if (timed_out) {
      report.statuses[static_cast<std::size_t>(i)] = {
          false, "timeout after " + std::to_string(model.timeout_seconds) +
                     " s (process tree killed)"};
      return;
    }
    if (!WIFEXITED(wait_status) || WEXITSTATUS(wait_status) != 0) {
      const int code = WIFEXITED(wait_status) ? WEXITSTATUS(wait_status) : -1;
      report.statuses[static_cast<std::size_t>(i)] = {
          false, "exit code " + std::to_string(code)};
      return;
    }
    Eigen::VectorXd y;
    std::string reason;
    if (!parse_output(model, child.dir, y, reason)) {
      report.statuses[static_cast<std::size_t>(i)] = {false, reason};
      return;
    }
    report.outputs.row(i) = y.transpose();
    report.statuses[static_cast<std::size_t>(i)] = {true, {}};
  };

  while (next < n || !running.empty()) {
    while (next < n && static_cast<int>(running.size()) < workers) {
      ChildProcess child;
      child.sample = next;
      try {
        child.dir = prepare_workdir(model, samples.row(next).transpose(), next);
      } catch (const std::exception& e) {
        report.statuses[static_cast<std::size_t>(next)] = {false, e.what()};
        ++next;
        continue;
      }
      child.started = std::chrono::steady_clock::now();
      child.pid = spawn_in_dir(model.command, child.dir);
      running.emplace(child.pid, child);
      ++next;
    }
    if (running.empty()) continue;

    int status = 0;
    const pid_t reaped = ::waitpid(-1, &status, WNOHANG);
    if (reaped > 0) {
      const auto it = running.find(reaped);
      if (it != running.end()) {
        finish(it->second, status, false);
        running.erase(it);
      }
      continue;
    }

    const auto now = std::chrono::steady_clock::now();
    for (auto it = running.begin(); it != running.end();) {
      const double elapsed =
          std::chrono::duration<double>(now - it->second.started).count();
      if (elapsed > model.timeout_seconds) {
        ::kill(-it->second.pid, SIGKILL);
        int st = 0;
        ::waitpid(it->second.pid, &st, 0);
        finish(it->second, st, true);
        it = running.erase(it);
      } else {
        ++it;
      }
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
}

}  // namespace detail

/// Evaluates the model at every sample row. Output ordering equals input
/// ordering for any worker count; per-sample failures are recorded in
/// statuses and never abort the batch.
inline ExecutionReport run(const ModelSpec& model, const Eigen::MatrixXd& samples,
                           int workers = 1) {
  if (workers < 1) throw invalid_argument_error("run: workers must be >= 1");
  if (samples.cols() != model.input_dim())
    throw invalid_argument_error("run: sample dimension " +
                                 std::to_string(samples.cols()) +
                                 " does not match model arity " +
                                 std::to_string(model.input_dim()));
  if (model.serial_only()) workers = 1;

  ExecutionReport report;
  report.outputs.setConstant(samples.rows(), model.output_dim(),
                             std::numeric_limits<double>::quiet_NaN());
  report.statuses.assign(static_cast<std::size_t>(samples.rows()), {});
  report.wall_times.assign(static_cast<std::size_t>(samples.rows()), 0.0);
  report.parallelism = workers;

  if (model.is_external())
    detail::run_external(model.external_model(), samples, workers, report);
  else
    detail::run_in_process(model.in_process_model(), samples, workers, report);
  return report;
}

inline ExecutionReport run(const ModelSpec& model, const SampleSet& samples,
                           int workers = 1) {
  return run(model, samples.samples, workers);
}

/// Scalar-output convenience used by the analysis modules: every sample must
/// succeed, and the first column is returned.
inline Eigen::VectorXd run_scalar_strict(const ModelSpec& model,
                                         const Eigen::MatrixXd& samples,
                                         int workers = 1) {
  if (model.output_dim() != 1)
    throw invalid_argument_error("run_scalar_strict: model must be scalar");
  const ExecutionReport report = run(model, samples, workers);
  for (std::size_t i = 0; i < report.statuses.size(); ++i)
    if (!report.statuses[i].ok)
      throw numerical_error("model evaluation failed for sample " +
                            std::to_string(i) + ": " +
                            report.statuses[i].reason);
  return report.outputs.col(0);
}

}  // namespace uq
