#pragma once

// Model descriptions: in-process callables and external programs driven by
// ASCII text templates.
//
// Template contract: `{{name}}` substitutes the sample value for `name` with
// 17 significant digits (round-trip-exact decimal); `{{name:.Ne}}` (also .Nf,
// .Ng) applies the printf-style precision instead, e.g. {{a:.3e}} with
// a=1234.5 renders "1.234e+03". Placeholders and declared var_names must
// match exactly (both directions).

#include <Eigen/Dense>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "uq/errors.hpp"

namespace uq {

inline std::string format_full_precision(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

struct Placeholder {
  std::string name;
  std::string format;  // empty = default
  std::size_t offset = 0;
};

inline std::vector<Placeholder> scan_placeholders(const std::string& text) {
  std::vector<Placeholder> out;
  std::size_t pos = 0;
  while ((pos = text.find("{{", pos)) != std::string::npos) {
    const std::size_t end = text.find("}}", pos + 2);
    if (end == std::string::npos)
      throw template_error("template: unterminated placeholder at offset " +
                           std::to_string(pos));
    const std::string body = text.substr(pos + 2, end - pos - 2);
    Placeholder p;
    p.offset = pos;
    const std::size_t colon = body.find(':');
    if (colon == std::string::npos) {
      p.name = body;
    } else {
      p.name = body.substr(0, colon);
      p.format = body.substr(colon + 1);
    }
    if (p.name.empty())
      throw template_error("template: empty placeholder name at offset " +
                           std::to_string(pos));
    out.push_back(std::move(p));
    pos = end + 2;
  }
  return out;
}

inline std::string apply_format(const std::string& fmt, double v,
                                const std::string& name, std::size_t offset) {
  // accepted grammar: .<digits><e|f|g>
  bool ok = fmt.size() >= 3 && fmt.front() == '.';
  if (ok) {
    const char conv = fmt.back();
    ok = (conv == 'e' || conv == 'f' || conv == 'g');
    for (std::size_t i = 1; ok && i + 1 < fmt.size(); ++i)
      ok = std::isdigit(static_cast<unsigned char>(fmt[i])) != 0;
  }
  if (!ok)
    throw template_error("template: bad format '" + fmt + "' for '" + name +
                         "' at offset " + std::to_string(offset));
  char spec[16];
  std::snprintf(spec, sizeof(spec), "%%%s", fmt.c_str());
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace detail

/// Substitutes every placeholder in `template_text` with the matching entry
/// of `sample_row` (positionally aligned with var_names). Unknown names are
/// reported with their byte offset.
inline std::string render_template(const std::string& template_text,
                                   const std::vector<std::string>& var_names,
                                   const Eigen::VectorXd& sample_row) {
  if (static_cast<Eigen::Index>(var_names.size()) != sample_row.size())
    throw template_error("render_template: var_names/sample length mismatch");
  const auto placeholders = detail::scan_placeholders(template_text);
  std::string out;
  out.reserve(template_text.size());
  std::size_t cursor = 0;
  for (const auto& p : placeholders) {
    const auto it = std::find(var_names.begin(), var_names.end(), p.name);
    if (it == var_names.end())
      throw template_error("template: unknown placeholder '" + p.name +
                           "' at offset " + std::to_string(p.offset));
    const auto idx = static_cast<Eigen::Index>(it - var_names.begin());
    out.append(template_text, cursor, p.offset - cursor);
    const double v = sample_row(idx);
    out += p.format.empty() ? format_full_precision(v)
                            : detail::apply_format(p.format, v, p.name, p.offset);
    const std::size_t close = template_text.find("}}", p.offset);
    cursor = close + 2;
  }
  out.append(template_text, cursor, std::string::npos);
  return out;
}

struct InProcessModel {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fn;
  int input_dim = 0;
  int output_dim = 1;
  bool serial_only = false;
};

struct OutputParserSpec {
  enum class Kind { single_float_file, delimited_row };
  Kind kind = Kind::single_float_file;
  std::string path = "output.txt";  // relative to the run directory
  std::string delimiter = ",";
};

struct ExternalModel {
  std::string template_text;
  std::vector<std::string> var_names;
  std::vector<std::string> command;  // argv; executed in the run directory
  std::string input_filename = "input.txt";
  OutputParserSpec parser;
  int output_dim = 1;
  double timeout_seconds = 60.0;
  std::filesystem::path workdir_root;
};

class ModelSpec {
 public:
  static ModelSpec in_process(InProcessModel m) {
    if (!m.fn) throw invalid_argument_error("model: missing callable");
    if (m.input_dim < 1 || m.output_dim < 1)
      throw invalid_argument_error("model: dimensions must be >= 1");
    ModelSpec spec;
    spec.impl_ = std::move(m);
    return spec;
  }

  /// Convenience wrapper for scalar-output in-process models.
  static ModelSpec scalar(std::function<double(const Eigen::VectorXd&)> f,
                          int input_dim, bool serial_only = false) {
    InProcessModel m;
    m.fn = [f = std::move(f)](const Eigen::VectorXd& x) {
      Eigen::VectorXd y(1);
      y(0) = f(x);
      return y;
    };
    m.input_dim = input_dim;
    m.output_dim = 1;
    m.serial_only = serial_only;
    return in_process(std::move(m));
  }

  static ModelSpec external(ExternalModel m) {
    validate_external(m);
    ModelSpec spec;
    spec.impl_ = std::move(m);
    return spec;
  }

  bool is_external() const {
    return std::holds_alternative<ExternalModel>(impl_);
  }
  const ExternalModel& external_model() const {
    return std::get<ExternalModel>(impl_);
  }
  const InProcessModel& in_process_model() const {
    return std::get<InProcessModel>(impl_);
  }

  int input_dim() const {
    return is_external()
               ? static_cast<int>(external_model().var_names.size())
               : in_process_model().input_dim;
  }
  int output_dim() const {
    return is_external() ? external_model().output_dim
                         : in_process_model().output_dim;
  }
  bool serial_only() const {
    return is_external() ? false : in_process_model().serial_only;
  }

 private:
  static void validate_external(const ExternalModel& m) {
    if (m.command.empty())
      throw invalid_argument_error("external model: empty command");
    if (m.var_names.empty())
      throw invalid_argument_error("external model: needs var_names");
    if (!(m.timeout_seconds > 0.0))
      throw invalid_argument_error("external model: timeout must be > 0");
    if (m.output_dim < 1)
      throw invalid_argument_error("external model: output_dim must be >= 1");
    if (m.parser.kind == OutputParserSpec::Kind::single_float_file &&
        m.output_dim != 1)
      throw invalid_argument_error(
          "external model: single-float parser implies output_dim 1");
    std::set<std::string> declared(m.var_names.begin(), m.var_names.end());
    if (declared.size() != m.var_names.size())
      throw invalid_argument_error("external model: var_names must be distinct");
    std::set<std::string> used;
    for (const auto& p : detail::scan_placeholders(m.template_text)) {
      if (!declared.count(p.name))
        throw template_error("template: unknown placeholder '" + p.name +
                             "' at offset " + std::to_string(p.offset));
      used.insert(p.name);
    }
    for (const auto& name : declared)
      if (!used.count(name))
        throw template_error("template: declared variable '" + name +
                             "' never appears in the template");
  }

  std::variant<InProcessModel, ExternalModel> impl_;
};

/// Creates `<root>/run_<index:06d>` holding the rendered input file and
/// returns its path. An existing non-empty directory is an error; run
/// directories are retained for post-mortem inspection.
inline std::filesystem::path prepare_workdir(const ExternalModel& model,
                                             const Eigen::VectorXd& sample_row,
                                             long index) {
  namespace fs = std::filesystem;
  char name[32];
  std::snprintf(name, sizeof(name), "run_%06ld", index);
  const fs::path dir = model.workdir_root / name;
  if (fs::exists(dir) && !fs::is_empty(dir))
    throw invalid_argument_error("prepare_workdir: " + dir.string() +
                                 " already exists and is not empty");
  fs::create_directories(dir);
  std::ofstream input(dir / model.input_filename, std::ios::binary);
  if (!input)
    throw numerical_error("prepare_workdir: cannot write input file in " +
                          dir.string());
  input << render_template(model.template_text, model.var_names, sample_row);
  return dir;
}

}  // namespace uq
