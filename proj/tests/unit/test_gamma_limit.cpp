#include "pfgamma/gamma_limit.hpp"

#include <gtest/gtest.h>

using namespace pfgamma;

namespace {

// composite Simpson on [0, 1]; only ~1e-9 for the (1-v)^{4/3} endpoint
double simpson(const std::function<double(double)>& g, int n = 2000) {
  const double h = 1.0 / n;
  double s = g(0) + g(1);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * g(i * h);
  return s * h / 3;
}

const StaticParams kAT{2, 2, 1, {1, 2}};

}  // namespace

TEST(Constants, GeneralExponentsAgainstSimpson) {
  for (double q : {2.0, 3.0})
    for (double m : {2.0, 3.0})
      for (double p : {2.0, 3.0}) {
        const StaticParams sp{p, q, 0.7, {1.3, m}};
        const double qc = q / (q - 1), pc = p / (p - 1);
        const double integral =
            simpson([&](double v) { return std::pow(1.3 * std::pow(1 - v, m), 1 / qc); });
        const double a = 2 * std::pow(qc, 1 / qc) * std::pow(0.7 * q, 1 / q) * integral;
        const double b = std::pow(p, 1 / p) * std::pow(pc, 1 / pc) * std::pow(1.3, 1 / p);
        const auto c = limit_constants(sp);
        EXPECT_NEAR(c.a, a, 1e-8) << p << q << m;
        EXPECT_NEAR(c.b, b, 1e-14);
        EXPECT_NEAR(c.psi_integral, c.psi_integral_quad, 1e-12);
      }
}

TEST(Constants, RejectsBadParameters) {
  EXPECT_THROW(limit_constants(StaticParams{2, 1, 1, {1, 2}}), ConfigError);
  EXPECT_THROW(limit_constants(StaticParams{2, 2, 0, {1, 2}}), ConfigError);
}

TEST(Rho, InvertsTheScaleFunction) {
  for (int k = 2; k <= 14; ++k) {
    const double eps = std::ldexp(1.0, -k);
    const double rho = rho_of_eps(kAT, eps);
    EXPECT_GT(rho, 0);
    EXPECT_LT(rho, 1);
    EXPECT_NEAR(h_of_rho(kAT, rho) / eps, 1, 1e-10);
    EXPECT_NEAR(h_of_rho(kAT, rho), std::sqrt(h1(kAT, rho) * h2(kAT, rho)), 1e-12 * eps);  // direct product loses digits
  }
  EXPECT_THROW(rho_of_eps(kAT, -1), ConfigError);
}

TEST(Profile, ExponentialForQuadraticCase) {
  const double eps = 0.05;
  const auto ps = optimal_profile(kAT, eps);
  EXPECT_TRUE(std::isinf(ps.T));
  for (double t = 0; t <= std::min(ps.t_end(), 10 * eps); t += eps / 37) {
    EXPECT_NEAR(ps(t), 1 - std::exp(-t / eps), 1e-9);
    EXPECT_NEAR(ps.derivative(t), std::exp(-t / eps) / eps, 1e-6 / eps);
  }
  EXPECT_NEAR(ps(ps.tau), 1 - ps.rho, 1e-12);
}

TEST(Profile, FiniteTimeForHigherGradientExponent) {
  // q = 3, m = 2: psi^{-1/q} = (1-w)^{-2/3} is integrable, so w hits 1 at finite T
  const StaticParams sp{2, 3, 1, {1, 2}};
  const auto ps = optimal_profile(sp, 0.05);
  EXPECT_TRUE(std::isfinite(ps.T));
  EXPECT_EQ(ps(ps.T + 1), 1.0);
  for (std::size_t i = 1; i < ps.w.size(); ++i) EXPECT_GE(ps.w[i], ps.w[i - 1]);
  const auto res = profile_residuals(ps, sp, ps.tau);
  EXPECT_LT(res.calibration, 1e-8);
  EXPECT_LT(res.young_sum, 1e-8);
  EXPECT_LT(res.ode, 1e-5);
  EXPECT_LT(ps.cross_check_error, 1e-9);
}

TEST(BarOracle, TwoBranches) {
  const BulkDensity f(2, 0, HookeTensor(1, 0, 1));
  for (double delta : {0.5, 1.0, 3.0, 4.0, 6.0, 10.0}) {
    const auto m = bar_limit_minimum(kAT, f, delta);
    const double elastic = delta * delta / 2;
    const double cracked = 1 + std::sqrt(2.0) * delta;  // J = delta - sqrt2
    EXPECT_NEAR(m.value, std::min(elastic, delta > std::sqrt(2.0) ? cracked : elastic), 1e-8) << delta;
    if (cracked < elastic) {
      EXPECT_NEAR(m.jump, delta - std::sqrt(2.0), 1e-5);
    } else {
      EXPECT_EQ(m.jump, 0.0);
    }
  }
  EXPECT_THROW(bar_limit_minimum(kAT, BulkDensity(2, 0, HookeTensor(1, 0, 2)), 1.0), ConfigError);
}

namespace {

JumpTemplate opening(double delta) {
  JumpTemplate t;
  t.dim = 2;
  t.plane = 0.5;
  t.support_lo = {0, 0, 0};
  t.support_hi = {1, 1, 1};
  t.lower = PolyField(2);
  t.upper = PolyField(2);
  t.upper.constant() << 0, delta;
  return t;
}

}  // namespace

TEST(Template, LimitEnergyOfOpening) {
  const auto op = FirstOrderOperator::full_strain(2);
  const BulkDensity f(2, 0, HookeTensor(1, 0, 2));
  const auto e = limit_energy(opening(2), op, f, kAT);
  EXPECT_NEAR(e.bulk, 0, 1e-15);
  EXPECT_NEAR(e.jump, 2 + 2 * 2 * std::sqrt(2.0) / 2, 1e-12);
  EXPECT_NEAR(e.total, e.bulk + e.jump + e.boundary, 1e-15);
}

TEST(Template, BulkOfAffineSmoothPart) {
  JumpTemplate t = opening(1);
  Eigen::Matrix2d l;
  l << 0.2, 0, 0, -0.1;
  t.lower.linear() = l;
  t.upper.linear() = l;
  const BulkDensity f(2, 0, HookeTensor(1, 0, 2));
  const auto e = limit_energy(t, FirstOrderOperator::full_strain(2), f, kAT);
  EXPECT_NEAR(e.bulk, 0.5 * (0.04 + 0.01), 1e-13);
}

TEST(Recovery, LayerIsCrackedAndGridRuleIsEnforced) {
  const auto tpl = opening(2);
  const auto op = FirstOrderOperator::full_strain(2);
  const BulkDensity f(2, 0, HookeTensor(1, 0, 2));
  const double eps = 0.0625;
  const Grid g = recovery_grid(tpl, kAT, f, op, eps, GridRule{});
  const double s = sigma_min(tpl, kAT, f, op, eps);
  EXPECT_LE(g.h(1), s / 4 * (1 + 1e-12));
  EXPECT_EQ(g.cells[1] % 2, 0);
  const double off = s / g.h(1) - std::round(s / g.h(1));
  EXPECT_LE(std::abs(off), 0.02);
  const GridField fld = build_recovery(tpl, kAT, f, op, eps, g);
  for (std::size_t i = 0; i < fld.nodes(); ++i) {
    const Eigen::VectorXd x = g.node_coord(i);
    if (std::abs(x(1) - 0.5) < s - 1e-12) {
      EXPECT_EQ(fld.v[i], 0.0);
    } else if (x(1) < 0.5) {
      EXPECT_NEAR(fld.u[2 * i + 1], 0, 1e-15);
    } else {
      EXPECT_NEAR(fld.u[2 * i + 1], 2, 1e-15);
    }
  }
  const Grid coarse(2, {1, 1, 1}, {4, 4, 1});
  EXPECT_THROW(build_recovery(tpl, kAT, f, op, eps, coarse), ConfigError);
}

TEST(Limsup, RatioNearOneAndDecreasingEpsRequired) {
  const auto tpl = opening(2);
  const auto op = FirstOrderOperator::full_strain(2);
  const BulkDensity f(2, 0, HookeTensor(1, 0, 2));
  const auto eta = [](double e) { return e * e; };
  const auto rows = limsup_check(tpl, kAT, f, op, eta, {0.0625, 0.03125});
  for (const auto& r : rows) EXPECT_NEAR(r.ratio, 1, 0.03);
  EXPECT_THROW(limsup_check(tpl, kAT, f, op, eta, {0.1, 0.1}), ConfigError);
}
