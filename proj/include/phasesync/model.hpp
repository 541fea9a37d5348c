#pragma once

// Planted phase-synchronization instances C = z z^* + sigma W and the
// quotient distance on the torus.

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "phasesync/linalg.hpp"
#include "phasesync/rng.hpp"

namespace phasesync {

/// A point of the torus: n entries of unit modulus.
class PhaseVector {
 public:
  /// Entrywise normalization of `values`; entries that are exactly zero
  /// become 1. Entries already within a few ulps of unit modulus are kept
  /// bit-for-bit, so serialized phases round-trip exactly.
  explicit PhaseVector(std::vector<Complex> values) : v_(std::move(values)) {
    for (std::size_t i = 0; i < v_.size(); ++i) {
      const double a = std::abs(v_[i]);
      if (a == 0.0) {
        v_[i] = Complex{1.0, 0.0};
      } else if (std::abs(a - 1.0) > kUnitSlack) {
        v_[i] /= a;
      }
    }
  }

  static constexpr double kUnitSlack = 1e-15;
  explicit PhaseVector(const ComplexVector& values) : PhaseVector(values.values()) {}
  PhaseVector(std::initializer_list<Complex> values)
      : PhaseVector(std::vector<Complex>(values)) {}

  static PhaseVector ones(std::size_t n) {
    return PhaseVector(std::vector<Complex>(n, Complex{1.0, 0.0}));
  }
  static PhaseVector from_angles(std::span<const double> theta) {
    std::vector<Complex> v(theta.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::polar(1.0, theta[i]);
    return PhaseVector(std::move(v));
  }

  std::size_t size() const noexcept { return v_.size(); }
  const Complex& operator[](std::size_t i) const { return v_.values()[i]; }
  std::span<const Complex> span() const noexcept { return v_.span(); }
  const ComplexVector& vector() const noexcept { return v_; }

  /// x e^{i theta}.
  PhaseVector rotated(double theta) const {
    const Complex r = std::polar(1.0, theta);
    std::vector<Complex> out(v_.begin(), v_.end());
    for (auto& x : out) x *= r;
    return PhaseVector(std::move(out));
  }

  friend bool operator==(const PhaseVector&, const PhaseVector&) = default;

 private:
  ComplexVector v_;
};

/// Signal entries e^{i theta_j}, theta_j uniform on [0, 2 pi).
inline PhaseVector generate_signal(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DimensionError("generate_signal: n must be >= 1");
  RandomStream rng(seed, "signal");
  std::vector<double> theta(n);
  for (auto& t : theta) t = rng.angle();
  return PhaseVector::from_angles(theta);
}

/// Unit-variance complex Wigner matrix: zero diagonal, off-diagonal entries
/// i.i.d. circular complex Gaussians with E|W_ij|^2 = 1, filled row-major
/// over the strict upper triangle.
inline HermitianMatrix generate_wigner(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DimensionError("generate_wigner: n must be >= 1");
  RandomStream rng(seed, "wigner");
  HermitianMatrix w(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) w.set(i, j, rng.complex_gaussian());
  }
  return w;
}

struct ProblemInstance {
  std::size_t n = 0;
  double sigma = 0.0;
  PhaseVector signal;
  HermitianMatrix noise;  // W, unit variance; Delta = sigma * W
  HermitianMatrix data;   // C = z z^* + sigma W
  std::uint64_t seed = 0;

  HermitianMatrix delta() const { return sigma * noise; }
};

inline std::uint64_t signal_seed(std::uint64_t seed) { return derive_seed(seed, "instance/signal"); }
inline std::uint64_t noise_seed(std::uint64_t seed) { return derive_seed(seed, "instance/noise"); }

inline ProblemInstance assemble_instance(std::size_t n, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("assemble_instance: sigma must be finite and >= 0");
  }
  PhaseVector z = generate_signal(n, signal_seed(seed));
  HermitianMatrix w = generate_wigner(n, noise_seed(seed));
  HermitianMatrix c = HermitianMatrix::outer(z.span());
  if (sigma != 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) c.set(i, j, c(i, j) + sigma * w(i, j));
    }
  }
  return ProblemInstance{n, sigma, std::move(z), std::move(w), std::move(c), seed};
}

/// min over theta of ||x e^{i theta} - z||_2 = sqrt(||x||^2 + n - 2|z^* x|),
/// which is sqrt(2 (n - |z^* x|)) on the torus. Evaluated as the norm of the
/// residual at the optimal phase, avoiding cancellation near zero.
inline double distance(const PhaseVector& z, std::span<const Complex> x) {
  if (x.size() != z.size()) throw DimensionError("distance: length mismatch");
  const Complex zx = dot(z.span(), x);
  const Complex r = zx == Complex{} ? Complex{1.0, 0.0} : std::conj(zx) / std::abs(zx);
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += std::norm(x[i] * r - z[i]);
  return std::sqrt(d2);
}

inline double distance(const PhaseVector& z, const ComplexVector& x) { return distance(z, x.span()); }
inline double distance(const PhaseVector& z, const PhaseVector& x) { return distance(z, x.span()); }

struct Alignment {
  ComplexVector aligned;
  bool degenerate = false;  // z^* x == 0; x returned unchanged
};

/// x e^{-i arg(z^* x)}, so that z^* (aligned) is real and nonnegative.
inline Alignment align_phase(const ComplexVector& x, const PhaseVector& z) {
  if (x.size() != z.size()) throw DimensionError("align_phase: length mismatch");
  const Complex zx = dot(z.span(), x.span());
  if (zx == Complex{}) return {x, true};
  const Complex r = std::conj(zx) / std::abs(zx);
  std::vector<Complex> out(x.begin(), x.end());
  for (auto& v : out) v *= r;
  return {ComplexVector(std::move(out)), false};
}

}  // namespace phasesync
