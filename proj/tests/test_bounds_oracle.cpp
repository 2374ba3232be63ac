#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dmusic/bounds_oracle.hpp"
#include "dmusic/error.hpp"
#include "dmusic/rng.hpp"

using namespace dmusic;

TEST(Polynomial, EvaluationAndCalculus) {
  const RealPolynomial p({1.0, -2.0, 3.0, 0.0, 0.0});
  EXPECT_EQ(p.degree(), 2);
  EXPECT_DOUBLE_EQ(p(2.0), 9.0);
  EXPECT_EQ(p.derivative().coefficients(), (std::vector<double>{-2.0, 6.0}));
  EXPECT_DOUBLE_EQ(p.antiderivative()(1.0), 1.0 - 1.0 + 1.0);
  EXPECT_EQ((RealPolynomial({1, 1}) * RealPolynomial({-1, 1})).coefficients(), (std::vector<double>{-1, 0, 1}));
}

TEST(Polynomial, SupNormFindsInteriorExtremum) {
  // T_7 reaches 1 at interior points that a coarse grid misses.
  const RealPolynomial t7({0, -7, 0, 56, 0, -112, 0, 64});
  EXPECT_NEAR(sup_norm(t7, 50), 1.0, 1e-12);
  const auto roots = roots_in_unit_interval(t7);
  ASSERT_EQ(roots.size(), 7u);
  for (int k = 0; k < 7; ++k)
    EXPECT_NEAR(roots[static_cast<std::size_t>(k)], -std::cos((2 * k + 1) * std::numbers::pi / 14.0), 1e-10);
}

TEST(Markov, ChebyshevEquality) {
  const auto c = markov_ratio(RealPolynomial({-1.0, 0.0, 2.0}), 1);
  EXPECT_NEAR(c.measured, 4.0, 1e-12);
  EXPECT_NEAR(c.bound, 4.0, 1e-12);
  EXPECT_TRUE(c.holds());
}

TEST(Markov, Linear) {
  const auto c = markov_ratio(RealPolynomial({0.0, 1.0}), 1);
  EXPECT_NEAR(c.measured, 1.0, 1e-14);
  EXPECT_NEAR(c.bound, 1.0, 1e-14);
}

TEST(Markov, SecondDerivativeOfChebyshevIsTight) {
  // T_n''(1) = n^2 (n^2 - 1) / 3.
  const RealPolynomial t4({1, 0, -8, 0, 8});
  const auto c = markov_ratio(t4, 2);
  EXPECT_NEAR(c.measured, 16.0 * 15.0 / 3.0, 1e-9);
  EXPECT_NEAR(c.bound, 80.0, 1e-9);
}

TEST(Markov, DerivativeBeyondDegree) {
  const auto c = markov_ratio(RealPolynomial({1.0, 2.0}), 3);
  EXPECT_EQ(c.measured, 0.0);
}

TEST(LinfL1, ClosedForms) {
  auto c = linf_l1_ratio(RealPolynomial({1.0}));
  EXPECT_NEAR(c.measured, 1.0, 1e-14);
  EXPECT_NEAR(c.bound, 2.0, 1e-10);
  c = linf_l1_ratio(RealPolynomial({0.0, 1.0}));
  EXPECT_NEAR(c.measured, 1.0, 1e-14);
  EXPECT_NEAR(c.bound, 4.0, 1e-10);
}

TEST(Oscillatory, ConstantPsi) {
  const auto c = oscillatory_bound(RealPolynomial({1.0}), 8.0, false);
  EXPECT_NEAR(c.measured, std::abs(2.0 * std::sin(8.0) / 8.0), 1e-12);
  EXPECT_NEAR(c.bound, 0.4, 1e-12);
}

TEST(Oscillatory, QuadraticWindowFirstBranch) {
  const auto c = oscillatory_bound(RealPolynomial({1.0, 0.0, -1.0}), 8.0, false);
  const double lam = 8.0;
  EXPECT_NEAR(c.measured, std::abs(4.0 * (std::sin(lam) - lam * std::cos(lam)) / (lam * lam * lam)), 1e-12);
  EXPECT_NEAR(c.bound, 3.2 / 8.0, 1e-12);
  EXPECT_TRUE(c.holds());
}

TEST(Oscillatory, SquaredWindowSecondBranch) {
  const RealPolynomial psi({1.0, 0.0, -2.0, 0.0, 1.0});
  const auto c = oscillatory_bound(psi, 32.0, true);
  const double lam = 32.0;
  const double exact =
      16.0 * (-lam * lam * std::sin(lam) - 3.0 * lam * std::cos(lam) + 3.0 * std::sin(lam)) / std::pow(lam, 5);
  EXPECT_NEAR(c.measured, std::abs(exact), 1e-12);
  EXPECT_NEAR(exact, -0.00030665020187205841, 1e-15);
  EXPECT_NEAR(c.bound, 0.00625, 1e-15);
  EXPECT_TRUE(c.holds());
}

TEST(Oscillatory, SecondBranchNeedsBoundaryZeros) {
  try {
    (void)oscillatory_bound(RealPolynomial({1.0, 0.0, -1.0}), 32.0, true);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::precondition);
  }
}

TEST(Oscillatory, QuadratureSelfConsistent) {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> c(6);
    for (auto& v : c) v = uniform(rng, -1, 1);
    const RealPolynomial psi(c);
    const double lam = uniform(rng, 50, 400);
    // Two integration paths: direct, and by splitting [-1, 1] through the shift x -> -x.
    const auto a = oscillatory_integral(psi, lam);
    std::vector<double> mirrored = c;
    for (std::size_t i = 1; i < mirrored.size(); i += 2) mirrored[i] = -mirrored[i];
    const auto b = std::conj(oscillatory_integral(RealPolynomial(mirrored), lam));
    EXPECT_LT(std::abs(a - b), 1e-10);
  }
}

TEST(Correlation, ConstantColumnsFarApart) {
  const auto grid = dense_grid();
  const auto bj = build_basis(0.0, 1, grid, 1.0, false);
  const auto bp = build_basis(40.0 * std::numbers::pi, 1, grid, 1.0, false);
  const Eigen::VectorXcd a = Eigen::VectorXcd::Ones(1);
  const auto c = correlation_ratio(bj, bp, a, a);
  EXPECT_LT(c.measured, 1e-4);
  EXPECT_NEAR(c.bound, 3.2 / (40.0 * std::numbers::pi), 1e-12);
  EXPECT_TRUE(c.precondition_met);
}

TEST(Correlation, SelfCorrelationIsOne) {
  const auto grid = dense_grid(10001);
  const auto b = build_basis(1.0, 3, grid, 1.0, true);
  Eigen::VectorXcd a(3);
  a << 1.0, cplx(0.5, 0.2), -0.3;
  const auto c = correlation_ratio(b, b, a, a);
  EXPECT_NEAR(c.measured, 1.0, 1e-12);
  EXPECT_FALSE(c.precondition_met);
}

TEST(Correlation, ModulatedThreeTerms) {
  const auto grid = dense_grid();
  Rng rng(1);
  Eigen::VectorXcd aj(3), ap(3);
  for (int i = 0; i < 3; ++i) {
    aj(i) = cplx(uniform(rng, -1, 1), uniform(rng, -1, 1));
    ap(i) = cplx(uniform(rng, -1, 1), uniform(rng, -1, 1));
  }
  const auto c = correlation_ratio(build_basis(0.0, 3, grid, 1.0, true),
                                   build_basis(50.0 * std::numbers::pi, 3, grid, 1.0, true), aj, ap);
  EXPECT_NEAR(c.bound, 0.8 * std::pow(8.0, 4) * 81.0 / std::pow(50.0 * std::numbers::pi, 3), 1e-12);
  EXPECT_TRUE(c.holds());
}

TEST(Correlation, MismatchedFlagsRejected) {
  const auto grid = dense_grid(1001);
  const Eigen::VectorXcd a = Eigen::VectorXcd::Ones(2);
  try {
    (void)correlation_ratio(build_basis(0.0, 2, grid, 1.0, true), build_basis(50.0, 2, grid, 1.0, false), a, a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_input);
  }
}

TEST(ResidualBound, SourcesAtCentersGiveZero) {
  ClusterRegion region;
  region.centers = {-20.0, 20.0};
  region.half_widths = {1.0, 1.0};
  region.L = 40.0;
  region.D = 1.0;
  const SourceMeasure mu({{-20.0, 1.0, 0}, {20.0, cplx(0, 2), 1}});
  const auto c = residual_bound_check(mu, region, 1e-3, 1000);
  EXPECT_LT(c.measured, 1e-12);
  EXPECT_DOUBLE_EQ(c.bound, 1e-3);
}

TEST(ResidualBound, SmallSingleCluster) {
  Rng rng(5);
  ClusterRegion region;
  region.centers = {0.0};
  region.half_widths = {0.5};
  region.D = 0.5;
  for (int trial = 0; trial < 20; ++trial) {
    const SourceMeasure mu({{uniform(rng, -0.5, 0.5), 1.0, 0}, {uniform(rng, -0.5, 0.5), cplx(0, 1), 0}});
    const auto c = residual_bound_check(mu, region, 1e-3, 1000);
    EXPECT_TRUE(c.holds(0.0)) << c.measured;
  }
}

TEST(ResidualBound, ThreeClusters) {
  ClusterRegion region;
  region.centers = {-40.0, 0.0, 40.0};
  region.half_widths.assign(3, std::numbers::pi);
  region.L = 40.0;
  region.D = std::numbers::pi;
  const SourceMeasure mu({{-42.5, 1.0, 0}, {-38.0, 0.7, 0}, {3.0, 1.0, 1}, {41.0, cplx(0, 1), 2}});
  EXPECT_TRUE(residual_bound_check(mu, region, 1e-3, 1000).holds(0.0));
}

TEST(Sweeps, SmallSweepsHaveNoViolations) {
  EXPECT_TRUE(sweep_markov(100, 1).passed());
  EXPECT_TRUE(sweep_linf_l1(100, 2).passed());
  EXPECT_TRUE(sweep_oscillatory(100, false, 3).passed());
  EXPECT_TRUE(sweep_oscillatory(100, true, 4).passed());
  EXPECT_TRUE(sweep_correlation(20, true, 5, 1e-8, 20001).passed());
  EXPECT_TRUE(sweep_residual(20, 6).passed());
}
