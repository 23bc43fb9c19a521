#include "pfgamma/operator_algebra.hpp"

#include <gtest/gtest.h>

#include <complex>
#include <random>

using namespace pfgamma;

namespace {

Eigen::MatrixXd random_sym(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = g(rng);
  return (m + m.transpose()) / 2;
}

}  // namespace

TEST(SymCoordinates, RoundTripAndIsometry) {
  std::mt19937_64 rng(3);
  for (int n = 1; n <= 3; ++n) {
    const Eigen::MatrixXd m = random_sym(n, rng);
    const Eigen::VectorXd x = to_sym(m);
    ASSERT_EQ(x.size(), sym_size(n));
    EXPECT_LT((from_sym(x, n) - m).norm(), 1e-14);
    // Frobenius norm is the Euclidean norm of the coordinates
    EXPECT_NEAR(x.norm(), m.norm(), 1e-14);
    EXPECT_NEAR(sym_trace(x, n), m.trace(), 1e-14);
  }
}

TEST(SymCoordinates, ProductIsBilinearNotConjugating) {
  using C = std::complex<double>;
  Eigen::Vector2cd v(1, C(0, 1)), z(1, C(0, -1));
  const Eigen::Matrix2cd expect = (v * z.transpose() + z * v.transpose()) / 2.0;
  EXPECT_LT((sym_product(v, z) - expect).norm(), 1e-15);
  EXPECT_LT((sym_product(v, z) - sym_product(z, v)).norm(), 1e-15);
}

TEST(Operators, DeviatoricRemovesTraceAndIsProjection) {
  std::mt19937_64 rng(5);
  for (int n = 2; n <= 3; ++n) {
    const auto op = FirstOrderOperator::deviatoric(n);
    const Eigen::MatrixXd m = random_sym(n, rng);
    const Eigen::MatrixXd d = op.apply(m);
    EXPECT_NEAR(d.trace(), 0, 1e-14);
    EXPECT_LT((d - (m - m.trace() / n * Eigen::MatrixXd::Identity(n, n))).norm(), 1e-14);
    EXPECT_LT((op.a_matrix * op.a_matrix - op.a_matrix).norm(), 1e-14);
  }
}

TEST(Operators, ByNameAndCustomValidation) {
  EXPECT_EQ(FirstOrderOperator::by_name("full-strain", 2).name, "full-strain");
  EXPECT_THROW(FirstOrderOperator::by_name("curl", 2), std::invalid_argument);
  EXPECT_THROW(FirstOrderOperator::custom(2, Eigen::MatrixXd::Identity(2, 2)), std::invalid_argument);
  EXPECT_THROW(FirstOrderOperator::full_strain(4), std::invalid_argument);
}

TEST(Symbol, RealSymbolMatchesTensor) {
  const auto op = FirstOrderOperator::deviatoric(3);
  Eigen::Vector3d w(1, 2, -1), z(0.5, -1, 2);
  const Eigen::MatrixXcd s = symbol(op, z.cast<std::complex<double>>(), w.cast<std::complex<double>>());
  EXPECT_LT((s.real() - tensor_A(op, w, z)).norm(), 1e-14);
  EXPECT_LT(s.imag().norm(), 1e-15);
}

TEST(Ellipticity, DeviatoricPlaneHasComplexWitness) {
  const auto r = classify_ellipticity(FirstOrderOperator::deviatoric(2), 2000);
  EXPECT_TRUE(r.r_elliptic);
  EXPECT_FALSE(r.c_elliptic);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_LT(r.witness->residual, 1e-12);
  EXPECT_LT(witness_residual(FirstOrderOperator::deviatoric(2), r.witness->v, r.witness->z), 1e-12);
}

TEST(Ellipticity, FullStrainIsComplexElliptic) {
  for (int n = 1; n <= 3; ++n) {
    const auto r = classify_ellipticity(FirstOrderOperator::full_strain(n), 2000);
    EXPECT_TRUE(r.c_elliptic) << n;
    EXPECT_FALSE(r.witness.has_value());
    EXPECT_GT(r.min_sigma_complex, 0.5);
  }
}

TEST(Ellipticity, ZeroOperatorIsNotEvenRealElliptic) {
  const auto r = classify_ellipticity(FirstOrderOperator::custom(2, Eigen::MatrixXd::Zero(3, 3)), 200);
  EXPECT_FALSE(r.r_elliptic);
  EXPECT_FALSE(r.c_elliptic);
}

TEST(Ellipticity, MinimaShrinkWithMoreSamples) {
  const auto op = FirstOrderOperator::deviatoric(3);
  const auto few = classify_ellipticity(op, 500, 1e-8, 9);
  const auto many = classify_ellipticity(op, 5000, 1e-8, 9);
  EXPECT_LE(many.min_sigma_complex, few.min_sigma_complex);
  EXPECT_LE(many.min_sigma_real, few.min_sigma_real);
}

TEST(Kappa, FullStrainBounds) {
  const auto kb = kappa_bounds(FirstOrderOperator::full_strain(2), 500);
  EXPECT_NEAR(kb.kappa1, 1 / std::sqrt(2.0), 1e-3);
  EXPECT_NEAR(kb.kappa2, 1.0, 1e-3);
}

TEST(Kernel, RigidMotionsVanishUnderStrain) {
  Eigen::Matrix3d m;
  m << 0, 1, -2, -1, 0, 3, 2, -3, 0;
  const auto kf = KernelField::rigid(m, Eigen::Vector3d(1, 2, 3));
  EXPECT_LT(kernel_residual(FirstOrderOperator::full_strain(3), kf, 200, Eigen::Vector3d::Zero(),
                            Eigen::Vector3d::Ones()),
            1e-12);
}

TEST(Kernel, ConformalFieldsVanishUnderDeviatoricOnly) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  m(0, 1) = 1;
  m(1, 0) = -1;
  const auto kf = KernelField::conformal(m, Eigen::Vector3d(0, 1, 0), Eigen::Vector3d(1, -1, 0.5));
  const Eigen::Vector3d lo = -Eigen::Vector3d::Ones(), hi = Eigen::Vector3d::Ones();
  EXPECT_LT(kernel_residual(FirstOrderOperator::deviatoric(3), kf, 200, lo, hi), 1e-12);
  // not a rigid motion, so the full strain sees it
  EXPECT_GT(kernel_residual(FirstOrderOperator::full_strain(3), kf, 200, lo, hi), 1e-3);
}

TEST(Kernel, RejectsBadInput) {
  EXPECT_THROW(KernelField::rigid(Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero()).field(),
               std::invalid_argument);
  const auto kf = KernelField::conformal(Eigen::Matrix2d::Zero(), Eigen::Vector2d::Zero(),
                                         Eigen::Vector2d::Ones());
  EXPECT_THROW(kernel_residual(FirstOrderOperator::deviatoric(2), kf, 10, Eigen::Vector2d::Zero(),
                               Eigen::Vector2d::Ones()),
               std::invalid_argument);
}

TEST(Kernel, PolynomialGradientMatchesFiniteDifferences) {
  PolyField p(2);
  p.quad(0, 0, 1) = 1.5;
  p.quad(1, 0, 0) = -0.5;
  p.linear()(0, 1) = 2;
  const Eigen::Vector2d x(0.3, -0.7);
  const double h = 1e-6;
  for (int j = 0; j < 2; ++j) {
    Eigen::Vector2d e = Eigen::Vector2d::Zero();
    e(j) = h;
    const Eigen::VectorXd fd = (p.value(x + e) - p.value(x - e)) / (2 * h);
    EXPECT_LT((fd - p.gradient(x).col(j)).norm(), 1e-8);
  }
}
