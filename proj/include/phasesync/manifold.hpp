#pragma once

// Riemannian geometry of the torus {x : |x_i| = 1}. Tangent vectors at x are
// xdot = i (t .* x) for real t. Every second-order quantity is expressed on
// the certificate matrix S(x), so the normalization of the Riemannian
// Hessian never enters.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "phasesync/estimators.hpp"
#include "phasesync/linalg.hpp"
#include "phasesync/model.hpp"

namespace phasesync {

/// w_i = u_i - Re{u_i conj(x_i)} x_i.
inline ComplexVector tangent_project(const PhaseVector& x, std::span<const Complex> u) {
  if (u.size() != x.size()) throw DimensionError("tangent_project: length mismatch");
  std::vector<Complex> w(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    w[i] = u[i] - (u[i] * std::conj(x[i])).real() * x[i];
  }
  return ComplexVector(std::move(w));
}

inline ComplexVector tangent_project(const PhaseVector& x, const ComplexVector& u) {
  return tangent_project(x, u.span());
}

/// xdot = i (t .* x).
inline ComplexVector tangent_from_coords(const PhaseVector& x, std::span<const double> t) {
  if (t.size() != x.size()) throw DimensionError("tangent_from_coords: length mismatch");
  std::vector<Complex> v(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) v[i] = Complex{0.0, t[i]} * x[i];
  return ComplexVector(std::move(v));
}

/// grad f(x) = -2 S(x) x, evaluated from C x without forming S:
/// (S x)_i = Re{(Cx)_i conj(x_i)} x_i - (Cx)_i.
inline ComplexVector riemannian_gradient(const HermitianMatrix& c, const PhaseVector& x) {
  const std::size_t n = x.size();
  if (c.order() != n) throw DimensionError("riemannian_gradient: length mismatch");
  std::vector<Complex> cx(n);
  matvec_into(c, x.span(), cx);
  std::vector<Complex> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Complex sx = (cx[i] * std::conj(x[i])).real() * x[i] - cx[i];
    g[i] = -2.0 * sx;
  }
  return ComplexVector(std::move(g));
}

/// Entrywise normalization of x + v, keeping x_i where x_i + v_i = 0.
inline PhaseVector retract(const PhaseVector& x, std::span<const Complex> v) {
  if (v.size() != x.size()) throw DimensionError("retract: length mismatch");
  std::vector<Complex> y(v.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] + v[i];
  return project_to_torus(y, x);
}

inline PhaseVector retract(const PhaseVector& x, const ComplexVector& v) { return retract(x, v.span()); }

/// Second-order form on tangent coordinates: H_kl = Re{conj(x_k) S_kl x_l}.
/// For xdot = i (t .* x), t^T H t = <xdot, S xdot>; x is second-order
/// critical iff additionally H is positive semidefinite.
struct HessianForm {
  HermitianMatrix h;  // real symmetric, stored with zero imaginary parts

  double operator()(std::span<const double> t) const {
    const std::size_t n = h.order();
    if (t.size() != n) throw DimensionError("HessianForm: length mismatch");
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const auto row = h.row(k);
      double s = 0.0;
      for (std::size_t l = 0; l < n; ++l) s += row[l].real() * t[l];
      acc += t[k] * s;
    }
    return acc;
  }
};

inline HessianForm hessian_form(const HermitianMatrix& c, const PhaseVector& x) {
  const HermitianMatrix s = certificate_matrix(c, x);
  const std::size_t n = x.size();
  HermitianMatrix h(n);
  for (std::size_t k = 0; k < n; ++k) {
    h.set(k, k, s(k, k).real());
    for (std::size_t l = k + 1; l < n; ++l) {
      h.set(k, l, (std::conj(x[k]) * s(k, l) * x[l]).real());
    }
  }
  return HessianForm{std::move(h)};
}

struct SecondOrderReport {
  bool is_first_order = false;
  bool is_second_order = false;
  double min_h_eig = 0.0;
  double stationarity = 0.0;     // ||S(x) x||_2
  double imag_diag_l2 = 0.0;     // ||Im diag(C x x^*)||_2
  bool characterization_consistent = false;  // the two quantities above agree
};

/// First-order: ||S(x)x||_2 <= tol n. Second-order: additionally
/// lambda_min(H) >= -tol n. Since |x_i| = 1, (S x)_i = -i Im{(Cx)_i conj(x_i)} x_i,
/// so ||S(x)x||_2 equals the 2-norm of Im diag(C x x^*); the report checks
/// that identity numerically.
inline SecondOrderReport second_order_check(const HermitianMatrix& c, const PhaseVector& x, double tol,
                                            const EigenOptions& eig = {}) {
  const std::size_t n = x.size();
  const double nn = static_cast<double>(n);
  const HermitianMatrix s = certificate_matrix(c, x);
  std::vector<Complex> sx(n);
  matvec_into(s, x.span(), sx);
  std::vector<Complex> cx(n);
  matvec_into(c, x.span(), cx);
  double imag_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) imag_sq += std::pow((cx[i] * std::conj(x[i])).imag(), 2);

  SecondOrderReport rep;
  rep.stationarity = norm2(sx);
  rep.imag_diag_l2 = std::sqrt(imag_sq);
  rep.characterization_consistent =
      std::abs(rep.stationarity - rep.imag_diag_l2) <= 1e-9 * (1.0 + c.max_row_l1()) * std::sqrt(nn);
  rep.is_first_order = rep.stationarity <= tol * nn;
  rep.min_h_eig = bottom_eigpair(hessian_form(c, x).h, eig).value;
  rep.is_second_order = rep.is_first_order && rep.min_h_eig >= -tol * nn;
  return rep;
}

struct AscentResult {
  PhaseVector estimate;
  std::size_t iterations = 0;
  std::vector<double> cost_trace{};
  double grad_stat = 0.0;  // 2 ||S(x) x||_2 / n^2 at the returned point
  bool converged = false;
  bool line_search_failed = false;
};

struct AscentConfig {
  double grad_tol = 1e-6;
  std::size_t max_iter = 0;  // 0 means 100 n + 10000
  double armijo = 1e-4;
  std::size_t max_halvings = 60;
  bool record_trace = true;
  EigenOptions eig;  // for ||C|| in the initial step size

  std::size_t iteration_limit(std::size_t n) const { return max_iter ? max_iter : 100 * n + 10000; }
};

/// Riemannian gradient ascent on f(x) = x^* C x with Armijo backtracking.
/// Each iteration starts from eta0 = n / (2 (||C|| + 1)) and halves until
/// f(retract(x, eta g)) >= f(x) + armijo * eta * ||g||^2. Stops when
/// 2 ||S(x)x||_2 / n^2 <= grad_tol.
inline AscentResult riemannian_ascent(const HermitianMatrix& c, const PhaseVector& x0,
                                      const AscentConfig& config = {}) {
  const std::size_t n = c.order();
  if (x0.size() != n) throw DimensionError("riemannian_ascent: start vector length mismatch");
  const double nn = static_cast<double>(n);
  const double eta0 = nn / (2.0 * (operator_norm(c, config.eig) + 1.0));
  const std::size_t limit = config.iteration_limit(n);

  AscentResult res{.estimate = x0};
  double f = cost(c, res.estimate);
  if (config.record_trace) res.cost_trace.push_back(f);
  for (std::size_t k = 0;; ++k) {
    res.iterations = k;
    const ComplexVector g = riemannian_gradient(c, res.estimate);
    const double gnorm = norm2(g.span());
    // ||grad|| = 2 ||S x||.
    res.grad_stat = gnorm / (nn * nn);
    if (res.grad_stat <= config.grad_tol) {
      res.converged = true;
      return res;
    }
    if (k == limit) return res;

    const double g2 = gnorm * gnorm;
    double eta = eta0;
    bool accepted = false;
    std::vector<Complex> step(n);
    for (std::size_t h = 0; h <= config.max_halvings; ++h, eta *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) step[i] = eta * g[i];
      PhaseVector candidate = retract(res.estimate, step);
      const double fc = cost(c, candidate);
      if (fc >= f + config.armijo * eta * g2) {
        res.estimate = std::move(candidate);
        f = fc;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.line_search_failed = true;
      return res;
    }
    if (config.record_trace) res.cost_trace.push_back(f);
  }
}

inline constexpr std::size_t kMaxSignFlipOrder = 20;

/// min over s in {+1,-1}^n of f(x) - f(s .* x). Enumerates the 2^(n-1)
/// patterns with s_0 = +1 in Gray-code order.
inline double sign_flip_audit(const HermitianMatrix& c, const PhaseVector& x) {
  const std::size_t n = x.size();
  if (c.order() != n) throw DimensionError("sign_flip_audit: length mismatch");
  if (n > kMaxSignFlipOrder) throw std::invalid_argument("sign_flip_audit: n too large for exhaustive search");
  // f(s .* x) = s^T A s with A_kl = Re{conj(x_k) C_kl x_l}.
  std::vector<double> a(n * n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l) a[k * n + l] = (std::conj(x[k]) * c(k, l) * x[l]).real();
  }
  std::vector<double> s(n, 1.0);
  std::vector<double> as(n, 0.0);  // A s
  double f_s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l) as[k] += a[k * n + l];
    f_s += as[k];
  }
  const double f_x = f_s;
  double best = f_s;
  const std::uint64_t patterns = std::uint64_t{1} << (n - 1);
  for (std::uint64_t m = 1; m < patterns; ++m) {
    // Gray code: flip bit = index of lowest set bit of m, offset past s_0.
    std::size_t bit = 0;
    while (((m >> bit) & 1U) == 0U) ++bit;
    const std::size_t k = bit + 1;
    const double old = s[k];
    // s^T A s changes by -4 s_k (A s)_k + 4 A_kk when s_k flips.
    f_s += -4.0 * old * as[k] + 4.0 * a[k * n + k];
    s[k] = -old;
    for (std::size_t j = 0; j < n; ++j) as[j] += -2.0 * old * a[j * n + k];
    best = std::max(best, f_s);
  }
  return f_x - best;
}

}  // namespace phasesync
