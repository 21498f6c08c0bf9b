#pragma once

// Structured severity-filtered logging with multiple sinks. Levels follow the
// NOTSET < DEBUG < INFO < WARN < ERROR < CRITICAL ladder, ERROR by default;
// every registered sink receives the identical filtered stream.

#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include "uq/errors.hpp"

namespace uq::log {

enum class Level {
  notset = 0,
  debug = 10,
  info = 20,
  warn = 30,
  error = 40,
  critical = 50
};

inline const char* level_name(Level l) {
  switch (l) {
    case Level::notset: return "NOTSET";
    case Level::debug: return "DEBUG";
    case Level::info: return "INFO";
    case Level::warn: return "WARN";
    case Level::error: return "ERROR";
    case Level::critical: return "CRITICAL";
  }
  return "?";
}

inline Level parse_level(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "notset") return Level::notset;
  if (s == "debug") return Level::debug;
  if (s == "info") return Level::info;
  if (s == "warn" || s == "warning") return Level::warn;
  if (s == "error") return Level::error;
  if (s == "critical") return Level::critical;
  throw config_error("unknown log level '" + s +
                     "' (expected notset|debug|info|warn|error|critical)");
}

class Logger {
 public:
  static Logger& instance() {
    static Logger logger;
    return logger;
  }

  void set_level(Level l) { level_ = l; }
  Level level() const { return level_; }

  void add_sink(std::ostream* sink) {
    std::lock_guard<std::mutex> lock(mutex_);
    sinks_.push_back(sink);
  }

  /// Opens a logfile sink; kept open until reset_sinks or replacement.
  void add_file_sink(const std::string& path) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto file = std::make_unique<std::ofstream>(path, std::ios::app);
    if (!*file) throw config_error("cannot open log file " + path);
    sinks_.push_back(file.get());
    owned_.push_back(std::move(file));
  }

  /// Drops every sink and reattaches stderr.
  void reset_sinks() {
    std::lock_guard<std::mutex> lock(mutex_);
    sinks_.clear();
    owned_.clear();
    sinks_.push_back(&std::cerr);
  }

  void write(Level l, const std::string& msg) {
    if (static_cast<int>(l) < static_cast<int>(level_)) return;
    std::lock_guard<std::mutex> lock(mutex_);
    for (auto* sink : sinks_) {
      (*sink) << "[" << level_name(l) << "] " << msg << "\n";
      sink->flush();
    }
  }

 private:
  Logger() { sinks_.push_back(&std::cerr); }

  Level level_ = Level::error;
  std::vector<std::ostream*> sinks_;
  std::vector<std::unique_ptr<std::ofstream>> owned_;
  std::mutex mutex_;
};

inline void set_level(Level l) { Logger::instance().set_level(l); }
inline void debug(const std::string& m) { Logger::instance().write(Level::debug, m); }
inline void info(const std::string& m) { Logger::instance().write(Level::info, m); }
inline void warn(const std::string& m) { Logger::instance().write(Level::warn, m); }
inline void error(const std::string& m) { Logger::instance().write(Level::error, m); }
inline void critical(const std::string& m) {
  Logger::instance().write(Level::critical, m);
}

}  // namespace uq::log
