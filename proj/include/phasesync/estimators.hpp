#pragma once

// Eigenvector estimator, generalized power method, and the dual certificate
// S(x) = Re{ddiag(C x x^*)} - C.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "phasesync/linalg.hpp"
#include "phasesync/model.hpp"

namespace phasesync {

/// f(x) = Re{x^* C x}.
inline double cost(const HermitianMatrix& c, const PhaseVector& x) {
  return quadratic_form(c, x.span());
}

/// Entrywise v_i / |v_i|; entries with v_i == 0 take fallback_i.
inline PhaseVector project_to_torus(std::span<const Complex> v, const PhaseVector& fallback) {
  if (v.size() != fallback.size()) throw DimensionError("project_to_torus: length mismatch");
  std::vector<Complex> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    out[i] = a > 0.0 ? v[i] / a : fallback[i];
  }
  return PhaseVector(std::move(out));
}

inline PhaseVector project_to_torus(const ComplexVector& v, const PhaseVector& fallback) {
  return project_to_torus(v.span(), fallback);
}

/// The constant vector with entry (1^* v)/|1^* v|, or all ones if 1^* v = 0.
inline PhaseVector mean_phase_fallback(std::span<const Complex> v) {
  Complex s{};
  for (const auto& x : v) s += x;
  const Complex phase = std::abs(s) > 0.0 ? s / std::abs(s) : Complex{1.0, 0.0};
  return PhaseVector(std::vector<Complex>(v.size(), phase));
}

/// Phase projection of the dominant eigenvector of C.
inline PhaseVector eigenvector_estimator(const HermitianMatrix& c, const EigenOptions& eig) {
  const EigResult top = top_eigpair(c, eig);
  return project_to_torus(top.vector, mean_phase_fallback(top.vector));
}

/// Power-iteration variant, seeded start vector.
inline PhaseVector eigenvector_estimator(const HermitianMatrix& c, std::uint64_t seed = 0) {
  return eigenvector_estimator(c, EigenOptions{EigenMethod::kPower, kDefaultEigTol, 0, seed});
}

struct AlphaAuto {};
struct AlphaFixed {
  double value = 0.0;
};

struct GpmConfig {
  std::variant<AlphaAuto, AlphaFixed> alpha_mode = AlphaAuto{};
  double alpha_margin = 0.0;
  double stop_ratio_gap = 1e-7;
  std::size_t max_iter = 0;  // 0 means 10 n + 5000
  bool record_trace = false;
  EigenOptions eig;  // route for lambda_min(C) and the eigenvector start

  void validate() const {
    if (!(stop_ratio_gap > 0.0 && stop_ratio_gap < 1.0)) {
      throw std::invalid_argument("GpmConfig: stop_ratio_gap must lie in (0, 1)");
    }
    if (!(alpha_margin >= 0.0)) throw std::invalid_argument("GpmConfig: alpha_margin must be >= 0");
  }
  std::size_t iteration_limit(std::size_t n) const { return max_iter ? max_iter : 10 * n + 5000; }
};

/// Tolerance below which C + alpha I counts as positive semidefinite.
inline constexpr double kPsdSlack = 1e-9;

/// Smallest admissible inertia term. Auto mode uses max(0, -lambda_min(C))
/// inflated by 1e-9 (1 + |lambda_min|) to absorb eigen-solve error.
inline double choose_alpha(const HermitianMatrix& c, const GpmConfig& config = {}) {
  config.validate();
  if (const auto* fixed = std::get_if<AlphaFixed>(&config.alpha_mode)) {
    const double alpha = fixed->value;
    HermitianMatrix shifted = c;
    shifted.add_identity(alpha);
    const double lmin = bottom_eigpair(shifted, config.eig).value;
    if (lmin < -kPsdSlack) {
      throw std::domain_error("choose_alpha: C + alpha I is not positive semidefinite "
                                  "(lambda_min = " + std::to_string(lmin) + ")");
    }
    return alpha;
  }
  const double lmin = bottom_eigpair(c, config.eig).value;
  const double alpha = std::max(0.0, -lmin + kPsdSlack * (1.0 + std::abs(lmin)));
  return alpha + config.alpha_margin;
}

/// T(x)_i = (Ct x)_i / |(Ct x)_i|, or x_i where (Ct x)_i = 0.
inline PhaseVector gpm_step(const HermitianMatrix& ct, const PhaseVector& x) {
  std::vector<Complex> y(x.size());
  matvec_into(ct, x.span(), y);
  return project_to_torus(y, x);
}

/// ||Ct x||_1 - x^* Ct x; zero exactly at fixed points of T.
inline double fixed_point_residual(const HermitianMatrix& ct, const PhaseVector& x) {
  std::vector<Complex> y(x.size());
  matvec_into(ct, x.span(), y);
  return norms(y).l1 - real_inner(x.span(), y);
}

struct GpmResult {
  PhaseVector estimate;
  std::size_t iterations = 0;
  std::vector<double> cost_trace{};  // x_k^* Ct x_k, k = 0..iterations
  std::vector<double> l1_trace{};    // ||Ct x_k||_1
  double final_ratio = 0.0;
  double alpha_used = 0.0;
  bool converged = false;
  bool zero_image = false;  // stopped because Ct x_k = 0
};

/// Algorithm: x_{k+1} = T(x_k) with Ct = C + alpha I, stopping once
/// x^* Ct x / ||Ct x||_1 >= 1 - stop_ratio_gap. Exhausting the iteration
/// budget returns the last iterate with converged = false.
inline GpmResult gpm_run(const HermitianMatrix& c, const PhaseVector& x0, const GpmConfig& config = {}) {
  config.validate();
  const std::size_t n = c.order();
  if (x0.size() != n) throw DimensionError("gpm_run: start vector length mismatch");
  const double alpha = choose_alpha(c, config);
  HermitianMatrix ct = c;
  ct.add_identity(alpha);

  GpmResult res{.estimate = x0};
  res.alpha_used = alpha;
  const std::size_t limit = config.iteration_limit(n);
  std::vector<Complex> y(n);
  for (std::size_t k = 0;; ++k) {
    matvec_into(ct, res.estimate.span(), y);
    const double f = real_inner(res.estimate.span(), y);
    const double g = norms(y).l1;
    if (config.record_trace) {
      res.cost_trace.push_back(f);
      res.l1_trace.push_back(g);
    }
    res.iterations = k;
    if (g == 0.0) {
      res.zero_image = true;
      res.final_ratio = 0.0;
      return res;
    }
    res.final_ratio = f / g;
    if (res.final_ratio >= 1.0 - config.stop_ratio_gap) {
      res.converged = true;
      return res;
    }
    if (k == limit) return res;
    res.estimate = project_to_torus(y, res.estimate);
  }
}

/// gpm_run started from the eigenvector estimator.
inline GpmResult gpm_run(const HermitianMatrix& c, const GpmConfig& config = {}) {
  return gpm_run(c, eigenvector_estimator(c, config.eig.with_seed(derive_seed(config.eig.seed, "gpm-start"))),
                 config);
}

/// S(x) = D - C with D_ii = Re{(C x)_i conj(x_i)}.
inline HermitianMatrix certificate_matrix(const HermitianMatrix& c, const PhaseVector& x) {
  const std::size_t n = c.order();
  if (x.size() != n) throw DimensionError("certificate_matrix: length mismatch");
  std::vector<Complex> cx(n);
  matvec_into(c, x.span(), cx);
  HermitianMatrix s = -1.0 * c;
  for (std::size_t i = 0; i < n; ++i) {
    s.set(i, i, (cx[i] * std::conj(x[i])).real() - c(i, i).real());
  }
  return s;
}

/// lambda_max(S) at or below this is treated as zero when forming the ratio.
inline constexpr double kRatioDenominatorFloor = 1e-14;

struct Certificate {
  double lambda_min_S = 0.0;
  double lambda_max_S = 0.0;
  double ratio = 0.0;      // lambda_min / |lambda_max|
  double gap_bound = 0.0;  // max(0, -n lambda_min) >= f(x_opt) - f(x)
  bool pass = false;
  double tolerance_used = 0.0;
};

/// Declares x globally optimal when lambda_min(S)/|lambda_max(S)| >= -tolerance.
/// If lambda_max(S) <= 1e-14 the test becomes lambda_min >= -tolerance n, and
/// the ratio is reported as 0 (pass) or -infinity (fail).
inline Certificate certify(const HermitianMatrix& c, const PhaseVector& x, double tolerance,
                           const EigenOptions& eig = {}) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("certify: tolerance must be > 0");
  const HermitianMatrix s = certificate_matrix(c, x);
  const double n = static_cast<double>(c.order());
  Certificate cert;
  cert.tolerance_used = tolerance;
  const SpectrumBounds bounds = extreme_eigenvalues(s, eig.with_seed(derive_seed(eig.seed, "certificate")));
  cert.lambda_min_S = bounds.min;
  cert.lambda_max_S = bounds.max;
  cert.gap_bound = std::max(0.0, -n * cert.lambda_min_S);
  if (cert.lambda_max_S <= kRatioDenominatorFloor) {
    cert.pass = cert.lambda_min_S >= -tolerance * n;
    cert.ratio = cert.pass ? 0.0 : -std::numeric_limits<double>::infinity();
  } else {
    cert.ratio = cert.lambda_min_S / std::abs(cert.lambda_max_S);
    cert.pass = cert.ratio >= -tolerance;
  }
  return cert;
}

enum class SeparationBranch { kNearSignal, kFarFromSignal, kViolated, kNotApplicable };

/// Classifies a fixed point x by |z^* x|: with r = ||Delta|| + alpha < n/8,
/// either |z^* x| >= n - 4r or |z^* x| <= 4r.
inline SeparationBranch separation_branch(const PhaseVector& z, const PhaseVector& x,
                                          double delta_norm, double alpha) {
  const double n = static_cast<double>(z.size());
  const double r = delta_norm + alpha;
  if (!(r < n / 8.0)) return SeparationBranch::kNotApplicable;
  const double overlap = std::abs(dot(z.span(), x.span()));
  if (overlap >= n - 4.0 * r) return SeparationBranch::kNearSignal;
  if (overlap <= 4.0 * r) return SeparationBranch::kFarFromSignal;
  return SeparationBranch::kViolated;
}

}  // namespace phasesync
