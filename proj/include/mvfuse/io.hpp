#pragma once

#include <Eigen/Dense>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "mvfuse/errors.hpp"
#include "mvfuse/kernel.hpp"
#include "mvfuse/partition.hpp"

namespace mvfuse {

namespace detail {

// shortest round-trip decimal form; locale-free and byte-stable, which the
// deterministic-output contract relies on
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

inline double parse_double(const std::string& field, const std::string& path, std::size_t line) {
  const char* begin = field.c_str();
  const char* end = begin + field.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t' || *(end - 1) == '\r')) --end;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw Error(ErrorCode::InvalidInput,
                path + ":" + std::to_string(line) + ": cannot parse '" + field + "' as a number");
  return value;
}

}  // namespace detail

// numeric CSV, one row per sample, no header
inline Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) row.push_back(detail::parse_double(field, path, line_no));
    if (!rows.empty() && row.size() != rows[0].size())
      throw Error(ErrorCode::InvalidInput, path + ":" + std::to_string(line_no) +
                                               ": expected " + std::to_string(rows[0].size()) +
                                               " fields, got " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::InvalidInput, path + ": empty file");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

inline void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << detail::format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

// binary kernel: 8-byte little-endian unsigned sample count, then n*n
// row-major little-endian 64-bit floats
inline Matrix read_kernel_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (!in || in.gcount() != sizeof(n))
    throw Error(ErrorCode::TruncatedFile, path + ": missing size header");
  const std::uintmax_t expected = 8 + n * n * sizeof(double);
  std::error_code ec;
  const std::uintmax_t actual = std::filesystem::file_size(path, ec);
  if (ec || actual != expected)
    throw Error(ErrorCode::TruncatedFile,
                path + ": expected " + std::to_string(expected) + " bytes for n=" +
                    std::to_string(n) + ", found " + std::to_string(actual));
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<double> row(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw Error(ErrorCode::TruncatedFile, path + ": short read");
    for (std::uint64_t j = 0; j < n; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  return m;
}

inline void write_kernel_binary(const std::string& path, const Matrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::InvalidShape, "kernel must be square");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  const std::uint64_t n = static_cast<std::uint64_t>(m.rows());
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  std::vector<double> row(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::uint64_t j = 0; j < n; ++j)
      row[j] = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(n * sizeof(double)));
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

// .bin extension selects the binary layout, anything else parses as CSV
inline Matrix read_kernel_file(const std::string& path) {
  if (std::filesystem::path(path).extension() == ".bin") return read_kernel_binary(path);
  return read_matrix_csv(path);
}

// one integer label per line
inline ClusterLabels read_labels_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  ClusterLabels labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const double v = detail::parse_double(line, path, line_no);
    const int label = static_cast<int>(v);
    if (static_cast<double>(label) != v || label < 0)
      throw Error(ErrorCode::InvalidInput,
                  path + ":" + std::to_string(line_no) + ": labels must be nonnegative integers");
    labels.push_back(label);
  }
  if (labels.empty()) throw Error(ErrorCode::InvalidInput, path + ": empty label file");
  return labels;
}

inline void write_labels_csv(const std::string& path, const ClusterLabels& labels) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  for (const int label : labels) out << label << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace mvfuse
