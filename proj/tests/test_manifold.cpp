#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "phasesync/estimators.hpp"
#include "phasesync/manifold.hpp"
#include "phasesync/model.hpp"
#include "support/oracles.hpp"

namespace ps = phasesync;
using ps::Complex;
using ps::testing::TestRng;

namespace {

ps::PhaseVector rotate_coords(const ps::PhaseVector& x, const std::vector<double>& t, double s) {
  std::vector<double> ang(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) ang[i] = std::arg(x[i]) + s * t[i];
  return ps::PhaseVector::from_angles(ang);
}

std::vector<double> random_coords(TestRng& rng, std::size_t n) {
  std::vector<double> t(n);
  for (auto& v : t) v = rng.normal();
  return t;
}

}  // namespace

TEST(TangentProject, ExamplesAndIdempotence) {
  const ps::PhaseVector x{Complex{1, 0}, Complex{0, 1}};
  const std::vector<Complex> u{Complex{2, 3}, Complex{4, 5}};
  const auto w = ps::tangent_project(x, u);
  EXPECT_EQ(w[0], Complex(0, 3));
  EXPECT_EQ(w[1], Complex(4, 0));

  TestRng rng(1);
  for (int t = 0; t < 50; ++t) {
    const auto y = rng.phases(7);
    const ps::ComplexVector v(rng.vector(7));
    const auto p = ps::tangent_project(y, v);
    const auto pp = ps::tangent_project(y, p);
    for (std::size_t i = 0; i < 7; ++i) {
      EXPECT_LE(std::abs(p[i] - pp[i]), 1e-13);
      EXPECT_LE(std::abs((p[i] * std::conj(y[i])).real()), 1e-13);
    }
  }
  EXPECT_THROW(ps::tangent_project(x, std::vector<Complex>(3)), ps::DimensionError);
}

TEST(RiemannianGradient, AgreesWithProjectionAndCertificate) {
  TestRng rng(2);
  for (int t = 0; t < 20; ++t) {
    const auto c = rng.hermitian(8);
    const auto x = rng.phases(8);
    const auto g = ps::riemannian_gradient(c, x);
    auto cx = ps::matvec(c, x.vector());
    std::vector<Complex> two_cx(8);
    for (std::size_t i = 0; i < 8; ++i) two_cx[i] = 2.0 * cx[i];
    const auto proj = ps::tangent_project(x, two_cx);
    const auto sx = ps::matvec(ps::certificate_matrix(c, x), x.vector());
    for (std::size_t i = 0; i < 8; ++i) {
      EXPECT_LE(std::abs(g[i] - proj[i]), 1e-12);
      EXPECT_LE(std::abs(g[i] + 2.0 * sx[i]), 1e-12);
    }
  }
}

TEST(RiemannianGradient, MatchesDirectionalFiniteDifference) {
  TestRng rng(3);
  const double h = 1e-6;
  for (int t = 0; t < 20; ++t) {
    const auto c = rng.hermitian(6);
    const auto x = rng.phases(6);
    const auto dir = random_coords(rng, 6);
    const auto xdot = ps::tangent_from_coords(x, dir);
    const auto g = ps::riemannian_gradient(c, x);
    const double analytic = ps::real_inner(g.span(), xdot.span());
    const double fd = (ps::cost(c, rotate_coords(x, dir, h)) - ps::cost(c, rotate_coords(x, dir, -h))) / (2 * h);
    EXPECT_NEAR(fd, analytic, 1e-5 * (1 + std::abs(analytic)));
  }
}

TEST(Retract, ExamplesAndFirstOrderAgreement) {
  const ps::PhaseVector x{Complex{1, 0}, Complex{0, 1}};
  const std::vector<Complex> v{Complex{-1, 0}, Complex{0, 1}};
  const auto r = ps::retract(x, v);
  EXPECT_EQ(r[0], Complex(1, 0));  // x_0 + v_0 = 0 keeps x_0
  EXPECT_EQ(r[1], Complex(0, 1));

  TestRng rng(4);
  const auto c = rng.hermitian(10);
  const auto y = rng.phases(10);
  const auto g = ps::riemannian_gradient(c, y);
  const double g2 = std::pow(ps::norm2(g.span()), 2);
  const double eta = 1e-7;
  std::vector<Complex> step(10);
  for (std::size_t i = 0; i < 10; ++i) step[i] = eta * g[i];
  const double slope = (ps::cost(c, ps::retract(y, step)) - ps::cost(c, y)) / (eta * g2);
  EXPECT_NEAR(slope, 1.0, 1e-4);
}

TEST(HessianForm, NoiselessAtSignal) {
  const auto inst = ps::assemble_instance(6, 0.0, 5);
  const auto hf = ps::hessian_form(inst.data, inst.signal);
  for (std::size_t k = 0; k < 6; ++k) {
    for (std::size_t l = 0; l < 6; ++l) EXPECT_NEAR(hf.h(k, l).real(), (k == l ? 6.0 : 0.0) - 1.0, 1e-12);
  }
  const std::vector<double> ones(6, 1.0);
  EXPECT_NEAR(hf(ones), 0.0, 1e-11);
}

TEST(HessianForm, DiagonalDataGivesZeroForm) {
  const std::vector<double> d{3.0, -1.0, 2.0};
  TestRng rng(6);
  const auto hf = ps::hessian_form(ps::HermitianMatrix::diagonal(d), rng.phases(3));
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t l = 0; l < 3; ++l) EXPECT_LE(std::abs(hf.h(k, l)), 1e-15);
  }
}

TEST(HessianForm, MatchesSecondDifferenceAtCriticalPoints) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto inst = ps::assemble_instance(12, 1.0, seed);
    const auto res = ps::gpm_run(inst.data);
    const auto hf = ps::hessian_form(inst.data, res.estimate);
    TestRng rng(seed);
    const auto t = random_coords(rng, 12);
    const double h = 1e-4;
    const double f0 = ps::cost(inst.data, res.estimate);
    const double second = (ps::cost(inst.data, rotate_coords(res.estimate, t, h)) - 2 * f0 +
                           ps::cost(inst.data, rotate_coords(res.estimate, t, -h))) / (h * h);
    EXPECT_NEAR(second, -2.0 * hf(t), 1e-3 * (1 + std::abs(second)));
  }
}

TEST(HessianForm, MinEigenvalueMatchesOracle) {
  TestRng rng(7);
  for (int t = 0; t < 10; ++t) {
    const auto c = rng.hermitian(6);
    const auto x = rng.phases(6);
    const auto hf = ps::hessian_form(c, x);
    const double want = ps::testing::oracle_real_eigenvalues(hf.h).front();
    const auto rep = ps::second_order_check(c, x, 1e-9);
    EXPECT_NEAR(rep.min_h_eig, want, 1e-10);
  }
}

TEST(SecondOrderCheck, SignalIsSecondOrderWhenNoiseless) {
  const auto inst = ps::assemble_instance(10, 0.0, 8);
  const auto rep = ps::second_order_check(inst.data, inst.signal, 1e-9);
  EXPECT_TRUE(rep.is_first_order);
  EXPECT_TRUE(rep.is_second_order);
  EXPECT_TRUE(rep.characterization_consistent);
}

TEST(SecondOrderCheck, OrthogonalPointIsSaddle) {
  const auto z = ps::PhaseVector::ones(4);
  const ps::PhaseVector x{Complex{1, 0}, Complex{-1, 0}, Complex{1, 0}, Complex{-1, 0}};
  const auto rep = ps::second_order_check(ps::HermitianMatrix::outer(z.span()), x, 1e-9);
  EXPECT_TRUE(rep.is_first_order);
  EXPECT_FALSE(rep.is_second_order);
  EXPECT_NEAR(rep.min_h_eig, -4.0, 1e-12);
  EXPECT_TRUE(rep.characterization_consistent);
}

TEST(SecondOrderCheck, RandomPointIsNotCritical) {
  TestRng rng(9);
  const auto c = rng.hermitian(10);
  const auto rep = ps::second_order_check(c, rng.phases(10), 1e-9);
  EXPECT_FALSE(rep.is_first_order);
  EXPECT_FALSE(rep.is_second_order);
  EXPECT_TRUE(rep.characterization_consistent);
  EXPECT_NEAR(rep.stationarity, rep.imag_diag_l2, 1e-10);
}

TEST(RiemannianAscent, NoiselessRecoversSignal) {
  const auto inst = ps::assemble_instance(30, 0.0, 10);
  TestRng rng(10);
  const auto res = ps::riemannian_ascent(inst.data, rng.phases(30));
  EXPECT_TRUE(res.converged);
  EXPECT_LE(ps::distance(inst.signal, res.estimate), 1e-4);
}

TEST(RiemannianAscent, TwoByTwoOptimum) {
  TestRng rng(11);
  for (int t = 0; t < 10; ++t) {
    ps::HermitianMatrix c(2);
    const Complex off = rng.complex_normal();
    c.set(0, 1, off);
    const auto res = ps::riemannian_ascent(c, rng.phases(2), {.grad_tol = 1e-9, .eig = {}});
    ASSERT_TRUE(res.converged);
    EXPECT_NEAR(ps::cost(c, res.estimate), 2 * std::abs(off), 1e-8);
  }
}

TEST(RiemannianAscent, TraceIsMonotoneAndEndsNearStationary) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto inst = ps::assemble_instance(50, 1.0, seed);
    TestRng rng(seed);
    const auto res = ps::riemannian_ascent(inst.data, rng.phases(50));
    ASSERT_TRUE(res.converged);
    ASSERT_EQ(res.cost_trace.size(), res.iterations + 1);
    for (std::size_t k = 1; k < res.cost_trace.size(); ++k) EXPECT_GE(res.cost_trace[k], res.cost_trace[k - 1]);
    EXPECT_LE(res.grad_stat, 1e-6);
    // The stopping rule bounds ||S x|| by grad_tol n^2 / 2.
    EXPECT_LE(ps::second_order_check(inst.data, res.estimate, 1e-5).stationarity, 0.5e-6 * 2500 * (1 + 1e-12));
  }
}

TEST(RiemannianAscent, IterationBudgetIsReported) {
  const auto inst = ps::assemble_instance(40, 3.0, 12);
  TestRng rng(12);
  const auto res = ps::riemannian_ascent(inst.data, rng.phases(40), {.grad_tol = 1e-14, .max_iter = 3, .eig = {}});
  EXPECT_FALSE(res.converged);
  EXPECT_FALSE(res.line_search_failed);
  EXPECT_EQ(res.iterations, 3u);
}

TEST(SignFlipAudit, Examples) {
  const auto z = ps::PhaseVector::ones(5);
  const auto c = ps::HermitianMatrix::outer(z.span());
  EXPECT_NEAR(ps::sign_flip_audit(c, z), 0.0, 1e-12);

  const ps::PhaseVector x{Complex{1, 0}, Complex{-1, 0}, Complex{1, 0}, Complex{1, 0}, Complex{1, 0}};
  // f(x) = 9, best flip gives 25.
  EXPECT_NEAR(ps::sign_flip_audit(c, x), -16.0, 1e-12);

  EXPECT_THROW(ps::sign_flip_audit(ps::HermitianMatrix(21), ps::PhaseVector::ones(21)), std::invalid_argument);
}

TEST(SignFlipAudit, MatchesBruteForce) {
  TestRng rng(13);
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = 2 + t % 6;
    const auto c = rng.hermitian(n);
    const auto x = rng.phases(n);
    const double f = ps::cost(c, x);
    double best = 0.0;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
      std::vector<Complex> y(n);
      for (std::size_t i = 0; i < n; ++i) y[i] = ((m >> i) & 1U) ? -x[i] : x[i];
      best = std::min(best, f - ps::testing::naive_cost(c, y));
    }
    EXPECT_NEAR(ps::sign_flip_audit(c, x), best, 1e-10);
  }
}

TEST(ManifoldProperties, CertifiedPointsPassSignFlipAudit) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = ps::assemble_instance(12, 0.5, seed);
    const auto res = ps::gpm_run(inst.data);
    if (!ps::certify(inst.data, res.estimate, 1e-9).pass) continue;
    EXPECT_GE(ps::sign_flip_audit(inst.data, res.estimate), -1e-9 * 144);
  }
}
