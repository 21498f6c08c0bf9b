#pragma once

// File I/O helpers: RFC-4180 CSV with 17-significant-digit floats, config
// hashing, and small filesystem utilities.

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "uq/errors.hpp"
#include "uq/model.hpp"
#include "uq/sample_set.hpp"

namespace uq::io {

/// Writes samples (plus the optional weight column) as RFC-4180 CSV with
/// header x1,...,xd[,weight], CRLF line endings, '.' decimal separator.
inline void write_samples_csv(const std::filesystem::path& path,
                              const SampleSet& set) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw numerical_error("cannot write " + path.string());
  const auto d = set.dim();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (j) out << ",";
    out << "x" << (j + 1);
  }
  if (set.weights) out << ",weight";
  out << "\r\n";
  for (Eigen::Index i = 0; i < set.size(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (j) out << ",";
      out << format_full_precision(set.samples(i, j));
    }
    if (set.weights) out << "," << format_full_precision((*set.weights)(i));
    out << "\r\n";
  }
}

/// Matrix CSV with explicit column names (same dialect as above).
inline void write_matrix_csv(const std::filesystem::path& path,
                             const Eigen::MatrixXd& m,
                             const std::vector<std::string>& columns) {
  if (static_cast<Eigen::Index>(columns.size()) != m.cols())
    throw invalid_argument_error("write_matrix_csv: header length mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw numerical_error("cannot write " + path.string());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (j) out << ",";
    out << columns[j];
  }
  out << "\r\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ",";
      out << format_full_precision(m(i, j));
    }
    out << "\r\n";
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw numerical_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw numerical_error("cannot write " + path.string());
  out << content;
}

/// FNV-1a 64-bit digest, hex-encoded; used to fingerprint canonical configs.
inline std::string fnv1a64_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace uq::io
