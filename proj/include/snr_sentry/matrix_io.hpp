#pragma once

// Plain-text matrix and vector files.
//
// Matrix: first line "n p", then n lines of p whitespace-separated reals.
// Vector: one real per line.
// Values are written with 17 significant digits so a write/read cycle is exact.

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "snr_sentry/linalg.hpp"

namespace snr_sentry {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_real(const std::string& token, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw FormatError(where + ": malformed number '" + token + "'");
  }
  if (used != token.size()) throw FormatError(where + ": malformed number '" + token + "'");
  return v;
}

}  // namespace detail

inline Matrix read_matrix(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw FormatError("matrix file: missing header line");
  std::istringstream hs(header);
  long long n = 0, p = 0;
  std::string extra;
  if (!(hs >> n >> p) || (hs >> extra) || n < 1 || p < 1) {
    throw FormatError("matrix file: header must be 'n p' with positive integers");
  }
  Matrix m(n, p);
  std::string line;
  for (long long i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw FormatError("matrix file: expected " + std::to_string(n) + " rows");
    std::istringstream ls(line);
    std::string token;
    long long j = 0;
    while (ls >> token) {
      if (j >= p) throw FormatError("matrix file: row " + std::to_string(i) + " has too many entries");
      m(i, j++) = detail::parse_real(token, "matrix file row " + std::to_string(i));
    }
    if (j != p) throw FormatError("matrix file: row " + std::to_string(i) + " has " + std::to_string(j) + " entries");
  }
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      throw FormatError("matrix file: trailing data after " + std::to_string(n) + " rows");
    }
  }
  return m;
}

inline void write_matrix(std::ostream& out, const Matrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << detail::format_real(m(i, j));
    }
    out << '\n';
  }
}

inline Vector read_vector(std::istream& in) {
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string token, extra;
    if (!(ls >> token)) continue;
    if (ls >> extra) throw FormatError("vector file line " + std::to_string(lineno) + ": one value per line");
    values.push_back(detail::parse_real(token, "vector file line " + std::to_string(lineno)));
  }
  if (values.empty()) throw FormatError("vector file: no values");
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

inline void write_vector(std::ostream& out, const Vector& v) {
  for (Index i = 0; i < v.size(); ++i) out << detail::format_real(v(i)) << '\n';
}

inline Matrix load_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open matrix file '" + path + "'");
  return read_matrix(in);
}

inline Vector load_vector_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vector file '" + path + "'");
  return read_vector(in);
}

}  // namespace snr_sentry
