#pragma once

// Plain-text matrix and phase-vector files.
//
//   HERM <n>                 PHASES <n>
//   i j re im   (i <= j)     re im        (n lines)
//
// Indices are 1-based, entries not listed are zero, and reals are written
// with 17 significant digits so that 64-bit values round-trip exactly.

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "phasesync/linalg.hpp"
#include "phasesync/model.hpp"

namespace phasesync {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

inline bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

inline double parse_real(const std::string& tok, std::size_t line) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') throw ParseError(line, "not a number: '" + tok + "'");
  if (!std::isfinite(v)) throw ParseError(line, "non-finite value: '" + tok + "'");
  return v;
}

inline std::size_t parse_index(const std::string& tok, std::size_t line) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(begin, &end, 10);
  if (end == begin || *end != '\0' || errno == ERANGE || v < 1) {
    throw ParseError(line, "expected a positive integer, got '" + tok + "'");
  }
  return static_cast<std::size_t>(v);
}

inline std::size_t parse_header(std::istream& in, const std::string& tag, std::size_t& line_no) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto tok = split_tokens(line);
    if (tok.size() != 2 || tok[0] != tag) {
      throw ParseError(line_no, "expected header '" + tag + " <n>'");
    }
    return parse_index(tok[1], line_no);
  }
  throw ParseError(line_no + 1, "missing header '" + tag + " <n>'");
}

}  // namespace detail

inline void write_matrix(std::ostream& out, const HermitianMatrix& m) {
  const std::size_t n = m.order();
  out << "HERM " << n << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const Complex v = m(i, j);
      out << (i + 1) << ' ' << (j + 1) << ' ' << format_real(v.real()) << ' '
          << format_real(v.imag()) << '\n';
    }
  }
}

inline HermitianMatrix read_matrix(std::istream& in) {
  std::size_t line_no = 0;
  const std::size_t n = detail::parse_header(in, "HERM", line_no);
  HermitianMatrix m(n);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::blank(line)) continue;
    const auto tok = detail::split_tokens(line);
    if (tok.size() != 4) throw ParseError(line_no, "expected 'i j re im'");
    const std::size_t i = detail::parse_index(tok[0], line_no);
    const std::size_t j = detail::parse_index(tok[1], line_no);
    if (i > j || j > n) throw ParseError(line_no, "index outside the upper triangle of order " + std::to_string(n));
    const double re = detail::parse_real(tok[2], line_no);
    const double im = detail::parse_real(tok[3], line_no);
    if (i == j && im != 0.0) throw ParseError(line_no, "diagonal entry with nonzero imaginary part");
    if (!seen.emplace(i, j).second) throw ParseError(line_no, "duplicate entry");
    m.set(i - 1, j - 1, Complex{re, im});
  }
  return m;
}

inline void write_phases(std::ostream& out, const PhaseVector& x) {
  out << "PHASES " << x.size() << '\n';
  for (std::size_t i = 0; i < x.size(); ++i) {
    out << format_real(x[i].real()) << ' ' << format_real(x[i].imag()) << '\n';
  }
}

struct PhaseReadResult {
  PhaseVector phases;
  std::vector<std::string> warnings;
};

/// Entries are renormalized to unit modulus; a deviation above 1e-6 adds a
/// warning, a zero entry is an error.
inline PhaseReadResult read_phases(std::istream& in) {
  std::size_t line_no = 0;
  const std::size_t n = detail::parse_header(in, "PHASES", line_no);
  std::vector<Complex> v;
  v.reserve(n);
  std::vector<std::string> warnings;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::blank(line)) continue;
    const auto tok = detail::split_tokens(line);
    if (tok.size() != 2) throw ParseError(line_no, "expected 're im'");
    if (v.size() == n) throw ParseError(line_no, "more than " + std::to_string(n) + " entries");
    const Complex z{detail::parse_real(tok[0], line_no), detail::parse_real(tok[1], line_no)};
    const double a = std::abs(z);
    if (a == 0.0) throw ParseError(line_no, "zero entry has no phase");
    if (std::abs(a - 1.0) > 1e-6) {
      warnings.push_back("line " + std::to_string(line_no) + ": modulus " + format_real(a) +
                         " renormalized");
    }
    v.push_back(z);
  }
  if (v.size() != n) {
    throw ParseError(line_no, "expected " + std::to_string(n) + " entries, found " + std::to_string(v.size()));
  }
  return {PhaseVector(std::move(v)), std::move(warnings)};
}

}  // namespace phasesync
