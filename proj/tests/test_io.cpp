#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "phasesync/io.hpp"
#include "phasesync/model.hpp"
#include "support/oracles.hpp"

namespace ps = phasesync;
using ps::Complex;
using ps::testing::TestRng;

namespace {

std::size_t matrix_error_line(const std::string& text) {
  std::istringstream in(text);
  try {
    ps::read_matrix(in);
  } catch (const ps::ParseError& e) {
    return e.line();
  }
  return 0;
}

std::size_t phases_error_line(const std::string& text) {
  std::istringstream in(text);
  try {
    ps::read_phases(in);
  } catch (const ps::ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST(MatrixIo, RoundTripIsExact) {
  const auto inst = ps::assemble_instance(17, 1.3, 42);
  std::stringstream buf;
  ps::write_matrix(buf, inst.data);
  EXPECT_EQ(ps::read_matrix(buf), inst.data);

  TestRng rng(1);
  const auto m = rng.hermitian(5, 1e-300);
  std::stringstream tiny;
  ps::write_matrix(tiny, m);
  EXPECT_EQ(ps::read_matrix(tiny), m);
}

TEST(MatrixIo, SparseInputLeavesZeros) {
  std::istringstream in("HERM 3\n\n1 2 0.5 -0.25\n3 3 2 0\n");
  const auto m = ps::read_matrix(in);
  EXPECT_EQ(m(1, 0), Complex(0.5, 0.25));
  EXPECT_EQ(m(2, 2), Complex(2, 0));
  EXPECT_EQ(m(0, 0), Complex{});
}

TEST(MatrixIo, ErrorsNameTheLine) {
  EXPECT_EQ(matrix_error_line("HERMX 2\n"), 1u);
  EXPECT_EQ(matrix_error_line(""), 1u);
  EXPECT_EQ(matrix_error_line("HERM 0\n"), 1u);
  EXPECT_EQ(matrix_error_line("HERM 2\n1 1 1 0\n1 2 1\n"), 3u);
  EXPECT_EQ(matrix_error_line("HERM 2\n2 1 1 0\n"), 2u);
  EXPECT_EQ(matrix_error_line("HERM 2\n1 3 1 0\n"), 2u);
  EXPECT_EQ(matrix_error_line("HERM 2\n1 1 1 0.5\n"), 2u);
  EXPECT_EQ(matrix_error_line("HERM 2\n1 2 1 0\n\n1 2 1 0\n"), 4u);
  EXPECT_EQ(matrix_error_line("HERM 2\n1 2 nan 0\n"), 2u);
  EXPECT_EQ(matrix_error_line("HERM 2\n1 2 1 inf\n"), 2u);
  EXPECT_EQ(matrix_error_line("HERM 2\n1 2 1x 0\n"), 2u);
  EXPECT_EQ(matrix_error_line("HERM 2\n0 2 1 0\n"), 2u);
}

TEST(PhaseIo, RoundTripIsExact) {
  TestRng rng(2);
  const auto x = rng.phases(33);
  std::stringstream buf;
  ps::write_phases(buf, x);
  const auto back = ps::read_phases(buf);
  EXPECT_EQ(back.phases, x);
  EXPECT_TRUE(back.warnings.empty());
}

TEST(PhaseIo, RenormalizesWithWarning) {
  std::istringstream in("PHASES 2\n2 0\n0 1\n");
  const auto r = ps::read_phases(in);
  EXPECT_EQ(r.phases[0], Complex(1, 0));
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("line 2"), std::string::npos);
}

TEST(PhaseIo, ErrorsNameTheLine) {
  EXPECT_EQ(phases_error_line("PHASE 2\n"), 1u);
  EXPECT_EQ(phases_error_line("PHASES 2\n1 0\n0 0\n"), 3u);
  EXPECT_EQ(phases_error_line("PHASES 2\n1 0\n"), 2u);
  EXPECT_EQ(phases_error_line("PHASES 1\n1 0\n0 1\n"), 3u);
  EXPECT_EQ(phases_error_line("PHASES 1\n1 0 0\n"), 2u);
  EXPECT_EQ(phases_error_line("PHASES 1\nnan 0\n"), 2u);
}

TEST(FormatReal, RoundTripsDoubles) {
  TestRng rng(3);
  for (int t = 0; t < 1000; ++t) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-300, 300));
    EXPECT_EQ(std::stod(ps::format_real(v)), v);
  }
}
