#include "pfgamma/bulk_density.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace pfgamma;

TEST(Hooke, EigenvaluesOnIsotropicSplit) {
  const HookeTensor h(2.0, 1.0, 3);
  // trace-free direction and identity direction
  Eigen::VectorXd dev = to_sym(Eigen::Vector3d(1, -1, 0).asDiagonal().toDenseMatrix());
  Eigen::VectorXd iso = to_sym(Eigen::Matrix3d::Identity());
  EXPECT_NEAR(h.quad(dev) / dev.squaredNorm(), 2.0, 1e-14);
  EXPECT_NEAR(h.quad(iso) / iso.squaredNorm(), 2.0 + 1.5, 1e-14);
  EXPECT_DOUBLE_EQ(h.eig_min(), 2.0);
  EXPECT_DOUBLE_EQ(h.eig_max(), 3.5);
}

TEST(Hooke, RejectsIndefinite) {
  EXPECT_THROW(HookeTensor(0, 1, 2), std::invalid_argument);
  EXPECT_THROW(HookeTensor(1, -1, 2), std::invalid_argument);  // 1 + 2(-1)/2 = 0
  EXPECT_NO_THROW(HookeTensor(1, -0.5, 2));
}

TEST(Density, ClosedFormsAtSimplePoints) {
  const HookeTensor h(1, 0, 1);
  Eigen::VectorXd x(1);
  x << 3;
  EXPECT_DOUBLE_EQ(BulkDensity(2, 0, h).eval(x), 4.5);
  EXPECT_NEAR(BulkDensity(3, 0, h).eval(x), 9.0, 1e-13);
  // mu shifts: ((9 + 1)^{3/2} - 1)/3
  EXPECT_NEAR(BulkDensity(3, 1, h).eval(x), (std::pow(10.0, 1.5) - 1) / 3, 1e-12);
  EXPECT_EQ(BulkDensity(3, 1, h).eval(Eigen::VectorXd::Zero(1)), 0.0);
}

TEST(Density, SmallStrainsKeepPrecisionWithMu) {
  const BulkDensity f(3, 1, HookeTensor(1, 0, 1));
  Eigen::VectorXd x(1);
  x << 1e-9;
  // leading term: (3/2) mu^{1/2} qf / 3 = qf / 2
  EXPECT_NEAR(f.eval(x) / 5e-19, 1.0, 1e-8);
}

TEST(Density, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (double p : {1.5, 2.0, 3.0})
    for (double mu : {0.0, 0.3}) {
      const BulkDensity f(p, mu, HookeTensor(1.3, 0.4, 3));
      Eigen::VectorXd x(6);
      for (int i = 0; i < 6; ++i) x(i) = g(rng);
      const Eigen::VectorXd an = f.grad(x);
      for (int i = 0; i < 6; ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(6);
        e(i) = 1e-6;
        const double fd = (f.eval(x + e) - f.eval(x - e)) / 2e-6;
        EXPECT_NEAR(fd, an(i), 1e-6 * (1 + std::abs(an(i)))) << p << " " << mu;
      }
    }
}

TEST(Density, RecessionLimit) {
  const BulkDensity f(3, 0.5, HookeTensor(1, 0.2, 2));
  const double gap_small = recession_gap(f, 10, 50);
  const double gap_large = recession_gap(f, 1e4, 50);
  EXPECT_LT(gap_large, gap_small);
  EXPECT_LT(gap_large, 1e-6);
  // mu = 0: f is positively p-homogeneous, the gap vanishes at any scale
  EXPECT_LT(recession_gap(BulkDensity(3, 0, HookeTensor(1, 0.2, 2)), 2, 50), 1e-13);
}

TEST(Density, GrowthConstantsBracketSamples) {
  const BulkDensity f(2, 0, HookeTensor(1, 1, 2));
  const auto gc = growth_check(f, 500);
  // pure quadratic: c_lower = eig_min/2, c_upper = eig_max/2
  EXPECT_NEAR(gc.c_lower, 0.5, 1e-6);
  EXPECT_NEAR(gc.c_upper, 1.0, 1e-6);
}

TEST(Density, SurfaceNormForNormalOpening) {
  const BulkDensity f(2, 0, HookeTensor(1, 0, 2));
  // jump (0, 2) across the x2 plane: strain diag(0, 2), recession value 2, norm 2^{1/2}
  const double s = surface_norm(f, FirstOrderOperator::full_strain(2), Eigen::Vector2d(0, 2),
                                Eigen::Vector2d(0, 1));
  EXPECT_NEAR(s, std::sqrt(2.0), 1e-14);
}
