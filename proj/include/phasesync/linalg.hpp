#pragma once

// Dense complex Hermitian linear algebra: products, norms and extreme
// eigenpairs, by shifted power iteration or by a dense eigensolve.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "phasesync/rng.hpp"

namespace phasesync {

using Complex = std::complex<double>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense vector of finite complex entries, length >= 1.
class ComplexVector {
 public:
  explicit ComplexVector(std::size_t n, Complex fill = {}) : data_(n, fill) {
    if (n == 0) throw DimensionError("ComplexVector: length must be >= 1");
    check_finite();
  }
  explicit ComplexVector(std::vector<Complex> values) : data_(std::move(values)) {
    if (data_.empty()) throw DimensionError("ComplexVector: length must be >= 1");
    check_finite();
  }
  ComplexVector(std::initializer_list<Complex> values)
      : ComplexVector(std::vector<Complex>(values)) {}

  std::size_t size() const noexcept { return data_.size(); }
  const Complex& operator[](std::size_t i) const { return data_[i]; }
  Complex& operator[](std::size_t i) { return data_[i]; }
  std::span<const Complex> span() const noexcept { return data_; }
  std::span<Complex> span() noexcept { return data_; }
  const std::vector<Complex>& values() const noexcept { return data_; }

  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  friend bool operator==(const ComplexVector&, const ComplexVector&) = default;

 private:
  void check_finite() const {
    for (const auto& v : data_) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw std::invalid_argument("ComplexVector: non-finite entry");
      }
    }
  }

  std::vector<Complex> data_;
};

/// Hermitian inner product u^* v.
inline Complex dot(std::span<const Complex> u, std::span<const Complex> v) {
  if (u.size() != v.size()) throw DimensionError("dot: length mismatch");
  Complex acc{};
  for (std::size_t i = 0; i < u.size(); ++i) acc += std::conj(u[i]) * v[i];
  return acc;
}

/// Real inner product Re{u^* v}.
inline double real_inner(std::span<const Complex> u, std::span<const Complex> v) {
  return dot(u, v).real();
}

struct Norms {
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
};

inline Norms norms(std::span<const Complex> v) {
  Norms out;
  double sq = 0.0;
  for (const auto& x : v) {
    const double a = std::abs(x);
    out.l1 += a;
    sq += std::norm(x);
    out.linf = std::max(out.linf, a);
  }
  out.l2 = std::sqrt(sq);
  return out;
}

inline Norms norms(const ComplexVector& v) { return norms(v.span()); }

inline double norm2(std::span<const Complex> v) {
  double sq = 0.0;
  for (const auto& x : v) sq += std::norm(x);
  return std::sqrt(sq);
}

/// Dense n x n Hermitian matrix. Writes go through set(), which mirrors the
/// upper-triangle value into the lower triangle, so entry (j,i) is always the
/// exact conjugate of entry (i,j) and the diagonal is real.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(std::size_t n) : n_(n), data_(n * n) {
    if (n == 0) throw DimensionError("HermitianMatrix: order must be >= 1");
  }

  static HermitianMatrix identity(std::size_t n, double scale = 1.0) {
    HermitianMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, scale);
    return m;
  }

  static HermitianMatrix diagonal(std::span<const double> d) {
    HermitianMatrix m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m.set(i, i, d[i]);
    return m;
  }

  /// x x^*.
  static HermitianMatrix outer(std::span<const Complex> x) {
    HermitianMatrix m(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      m.set(i, i, std::norm(x[i]));
      for (std::size_t j = i + 1; j < x.size(); ++j) m.set(i, j, x[i] * std::conj(x[j]));
    }
    return m;
  }

  std::size_t order() const noexcept { return n_; }

  Complex operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  /// Sets entry (i,j) and its mirror. Diagonal entries must be real.
  void set(std::size_t i, std::size_t j, Complex value) {
    if (i >= n_ || j >= n_) throw DimensionError("HermitianMatrix::set: index out of range");
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
      throw std::invalid_argument("HermitianMatrix::set: non-finite entry");
    }
    if (i == j) {
      if (value.imag() != 0.0) {
        throw std::invalid_argument("HermitianMatrix::set: diagonal must be real");
      }
      data_[i * n_ + i] = value;
      return;
    }
    if (i > j) {
      std::swap(i, j);
      value = std::conj(value);
    }
    data_[i * n_ + j] = value;
    data_[j * n_ + i] = std::conj(value);
  }

  /// Row i as a contiguous span.
  std::span<const Complex> row(std::size_t i) const {
    return std::span<const Complex>(data_).subspan(i * n_, n_);
  }

  /// Sum of |M_ij| over all entries.
  double entrywise_l1() const {
    double s = 0.0;
    for (const auto& v : data_) s += std::abs(v);
    return s;
  }

  /// max_i sum_j |M_ij|, an upper bound on the spectral radius.
  double max_row_l1() const {
    double best = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (const auto& v : row(i)) s += std::abs(v);
      best = std::max(best, s);
    }
    return best;
  }

  HermitianMatrix& operator+=(const HermitianMatrix& other) {
    require_same_order(other);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
  }
  HermitianMatrix& operator-=(const HermitianMatrix& other) {
    require_same_order(other);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    return *this;
  }
  HermitianMatrix& operator*=(double s) {
    for (auto& v : data_) v *= s;
    return *this;
  }
  /// M += shift * I.
  HermitianMatrix& add_identity(double shift) {
    for (std::size_t i = 0; i < n_; ++i) data_[i * n_ + i] += shift;
    return *this;
  }

  friend HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) { return a += b; }
  friend HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) { return a -= b; }
  friend HermitianMatrix operator*(double s, HermitianMatrix a) { return a *= s; }

  friend bool operator==(const HermitianMatrix&, const HermitianMatrix&) = default;

 private:
  void require_same_order(const HermitianMatrix& other) const {
    if (other.n_ != n_) throw DimensionError("HermitianMatrix: order mismatch");
  }

  std::size_t n_;
  std::vector<Complex> data_;
};

/// out = M v. `out` must not alias `v`.
inline void matvec_into(const HermitianMatrix& m, std::span<const Complex> v,
                        std::span<Complex> out) {
  const std::size_t n = m.order();
  if (v.size() != n || out.size() != n) throw DimensionError("matvec: dimension mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = m.row(i);
    double re = 0.0;
    double im = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double a = r[j].real();
      const double b = r[j].imag();
      const double c = v[j].real();
      const double d = v[j].imag();
      re += a * c - b * d;
      im += a * d + b * c;
    }
    out[i] = {re, im};
  }
}

inline ComplexVector matvec(const HermitianMatrix& m, const ComplexVector& v) {
  if (v.size() != m.order()) throw DimensionError("matvec: dimension mismatch");
  ComplexVector out(v.size());
  matvec_into(m, v.span(), out.span());
  return out;
}

/// Re{x^* M x}.
inline double quadratic_form(const HermitianMatrix& m, std::span<const Complex> x) {
  std::vector<Complex> mx(x.size());
  matvec_into(m, x, mx);
  return real_inner(x, mx);
}

struct EigResult {
  double value = 0.0;
  std::vector<Complex> vector;
  std::size_t iterations = 0;
  double residual = 0.0;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, EigResult last)
      : std::runtime_error(what), last_(std::move(last)) {}
  const EigResult& last() const noexcept { return last_; }

 private:
  EigResult last_;
};

inline constexpr double kDefaultEigTol = 1e-10;

inline std::size_t default_eig_max_iter(std::size_t n) { return 50 * n + 1000; }

namespace detail {

// Power iteration on sign*M + shift*I, where shift bounds the spectral radius
// so the shifted operator is positive semidefinite and its dominant eigenvalue
// is shift + the algebraically largest eigenvalue of sign*M. The residual and
// Rayleigh quotient are measured on sign*M.
inline EigResult power_iterate(const HermitianMatrix& m, double sign, double tol,
                               std::size_t max_iter, std::uint64_t seed) {
  if (!(tol > 0.0)) throw std::invalid_argument("power iteration: tol must be > 0");
  const std::size_t n = m.order();
  const double shift = 1.0 + m.max_row_l1();

  RandomStream rng(seed, "power-iteration-start");
  std::vector<Complex> v(n);
  for (auto& x : v) x = rng.complex_gaussian();
  double nv = norm2(v);
  for (auto& x : v) x /= nv;

  std::vector<Complex> w(n);
  EigResult res;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    matvec_into(m, v, w);
    if (sign < 0) {
      for (auto& x : w) x = -x;
    }
    const double lambda = real_inner(v, w);
    double r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) r2 += std::norm(w[i] - lambda * v[i]);
    res.value = lambda;
    res.iterations = it;
    res.residual = std::sqrt(r2);
    if (res.residual <= tol * (1.0 + std::abs(lambda))) {
      res.vector = std::move(v);
      return res;
    }
    for (std::size_t i = 0; i < n; ++i) w[i] += shift * v[i];
    nv = norm2(w);
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nv;
  }
  res.vector = std::move(v);
  throw ConvergenceError("power iteration did not converge after " +
                             std::to_string(max_iter) + " iterations (residual " +
                             std::to_string(res.residual) + ")",
                         std::move(res));
}

}  // namespace detail

/// Algebraically largest eigenpair of M. Converged when
/// ||Mv - lambda v||_2 <= tol * (1 + |lambda|); throws ConvergenceError otherwise.
inline EigResult dominant_eigpair(const HermitianMatrix& m, double tol = kDefaultEigTol,
                                  std::size_t max_iter = 0, std::uint64_t seed = 0) {
  if (max_iter == 0) max_iter = default_eig_max_iter(m.order());
  return detail::power_iterate(m, 1.0, tol, max_iter, seed);
}

/// Smallest eigenpair of M (value and eigenvector), by power iteration on -M.
inline EigResult min_eigpair(const HermitianMatrix& m, double tol = kDefaultEigTol,
                             std::size_t max_iter = 0, std::uint64_t seed = 0) {
  if (max_iter == 0) max_iter = default_eig_max_iter(m.order());
  EigResult r = detail::power_iterate(m, -1.0, tol, max_iter, seed);
  r.value = -r.value;
  return r;
}

inline double lambda_max(const HermitianMatrix& m, double tol = kDefaultEigTol,
                         std::size_t max_iter = 0, std::uint64_t seed = 0) {
  return dominant_eigpair(m, tol, max_iter, seed).value;
}

inline double lambda_min(const HermitianMatrix& m, double tol = kDefaultEigTol,
                         std::size_t max_iter = 0, std::uint64_t seed = 0) {
  return min_eigpair(m, tol, max_iter, seed).value;
}

/// Largest singular value of a Hermitian matrix.
inline double operator_norm(const HermitianMatrix& m, double tol = kDefaultEigTol,
                            std::uint64_t seed = 0) {
  const double hi = lambda_max(m, tol, 0, derive_seed(seed, "operator-norm-max"));
  const double lo = lambda_min(m, tol, 0, derive_seed(seed, "operator-norm-min"));
  return std::max(hi, -lo);
}

/// Which eigen route the higher-level operations use. kPower is the shifted
/// power iteration above; kDense runs a full dense Hermitian eigensolve
/// (Householder tridiagonalization + QR). The power iteration converges at
/// rate gap / shift, which near the edge of a Wigner spectrum needs far more
/// than the default 50 n + 1000 sweeps, so kDense is the default.
enum class EigenMethod { kPower, kDense };

struct EigenOptions {
  EigenMethod method = EigenMethod::kDense;
  double tol = kDefaultEigTol;
  std::size_t max_iter = 0;
  std::uint64_t seed = 0;

  EigenOptions with_seed(std::uint64_t s) const {
    EigenOptions o = *this;
    o.seed = s;
    return o;
  }
};

namespace detail {

inline Eigen::MatrixXcd to_eigen(const HermitianMatrix& m) {
  const auto n = static_cast<Eigen::Index>(m.order());
  Eigen::MatrixXcd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out(i, j) = m(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
  }
  return out;
}

inline EigResult dense_eigpair(const HermitianMatrix& m, bool largest) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(to_eigen(m), Eigen::ComputeEigenvectors);
  const Eigen::Index k = largest ? es.eigenvalues().size() - 1 : 0;
  EigResult r;
  r.value = es.eigenvalues()(k);
  r.vector.resize(m.order());
  for (std::size_t i = 0; i < m.order(); ++i) r.vector[i] = es.eigenvectors()(static_cast<Eigen::Index>(i), k);
  std::vector<Complex> mv(m.order());
  matvec_into(m, r.vector, mv);
  double r2 = 0.0;
  for (std::size_t i = 0; i < mv.size(); ++i) r2 += std::norm(mv[i] - r.value * r.vector[i]);
  r.residual = std::sqrt(r2);
  r.iterations = 1;
  return r;
}

}  // namespace detail

struct SpectrumBounds {
  double min = 0.0;
  double max = 0.0;
};

inline EigResult top_eigpair(const HermitianMatrix& m, const EigenOptions& opts) {
  if (opts.method == EigenMethod::kDense) return detail::dense_eigpair(m, true);
  return dominant_eigpair(m, opts.tol, opts.max_iter, opts.seed);
}

inline EigResult bottom_eigpair(const HermitianMatrix& m, const EigenOptions& opts) {
  if (opts.method == EigenMethod::kDense) return detail::dense_eigpair(m, false);
  return min_eigpair(m, opts.tol, opts.max_iter, opts.seed);
}

/// Smallest and largest eigenvalues of M.
inline SpectrumBounds extreme_eigenvalues(const HermitianMatrix& m, const EigenOptions& opts) {
  if (opts.method == EigenMethod::kDense) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(detail::to_eigen(m), Eigen::EigenvaluesOnly);
    return {es.eigenvalues()(0), es.eigenvalues()(es.eigenvalues().size() - 1)};
  }
  return {lambda_min(m, opts.tol, opts.max_iter, derive_seed(opts.seed, "extreme-min")),
          lambda_max(m, opts.tol, opts.max_iter, derive_seed(opts.seed, "extreme-max"))};
}

inline double operator_norm(const HermitianMatrix& m, const EigenOptions& opts) {
  const SpectrumBounds b = extreme_eigenvalues(m, opts);
  return std::max(b.max, -b.min);
}

}  // namespace phasesync
