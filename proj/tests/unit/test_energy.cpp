#include "pfgamma/diagnostics.hpp"
#include "pfgamma/energy.hpp"
#include "pfgamma/grid.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

using namespace pfgamma;

namespace {

GridField affine_field(const Grid& g, const Eigen::MatrixXd& l, double v) {
  GridField fld(g);
  const int n = g.dim;
  for (std::size_t i = 0; i < fld.nodes(); ++i) {
    const Eigen::VectorXd x = l * g.node_coord(i);
    for (int c = 0; c < n; ++c) fld.u[i * n + c] = x(c);
    fld.v[i] = v;
  }
  return fld;
}

}  // namespace

TEST(Grid, IndexingRoundTrip) {
  const Grid g(3, {1, 2, 3}, {2, 3, 4});
  EXPECT_EQ(g.node_count(), 3u * 4 * 5);
  EXPECT_EQ(g.cell_count(), 24u);
  EXPECT_DOUBLE_EQ(g.cell_volume(), 0.5 * (2.0 / 3) * 0.75);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const auto ijk = g.node_ijk(i);
    EXPECT_EQ(g.node_index(ijk[0], ijk[1], ijk[2]), i);
  }
  EXPECT_EQ(g.node_index(1, 0, 0), 1u);  // axis 0 fastest
}

TEST(Grid, FaceParsing) {
  const Face f = Face::parse("x1+");
  EXPECT_EQ(f.axis, 1);
  EXPECT_TRUE(f.upper);
  EXPECT_EQ(f.name(), "x1+");
  EXPECT_THROW(Face::parse("y0-"), ConfigError);
  EXPECT_THROW(Face::parse("x3+"), ConfigError);
}

TEST(Energy, HomogeneousStateByHand) {
  const Grid g(2, {1, 2, 1}, {4, 6, 1});
  Eigen::Matrix2d l;
  l << 0.3, 0.1, -0.2, 0.5;
  const double v = 0.7, eps = 0.1, eta = 1e-3;
  const EpsParams prm{eps, eta, 1, 2, {1.5, 2}};
  const auto op = FirstOrderOperator::deviatoric(2);
  const BulkDensity f(3, 0.2, HookeTensor(1, 0.5, 2));
  const auto e = assemble_energy(affine_field(g, l, v), prm, op, f);
  // strain, deviatoric and spherical parts by hand
  const Eigen::Matrix2d strain = (l + l.transpose()) / 2;
  const Eigen::Matrix2d dev = strain - strain.trace() / 2 * Eigen::Matrix2d::Identity();
  const Eigen::Matrix2d sph = strain - dev;
  auto dens = [&](const Eigen::Matrix2d& m) {
    const double q = m.squaredNorm() + 0.25 * m.trace() * m.trace();
    return (std::pow(q + 0.2, 1.5) - std::pow(0.2, 1.5)) / 3;
  };
  const double vol = 2.0;
  EXPECT_NEAR(e.term_A, vol * (v + eps * eps) * dens(dev), 1e-13);
  EXPECT_NEAR(e.term_rest, vol * (v + eta) * dens(sph), 1e-13);
  EXPECT_NEAR(e.term_psi, vol * 1.5 * 0.09 / eps, 1e-12);
  EXPECT_NEAR(e.term_gradv, 0, 1e-15);
  EXPECT_NEAR(e.total, e.term_A + e.term_rest + e.term_psi + e.term_gradv, 1e-13);
}

TEST(Energy, GradientTermOfLinearPhaseField) {
  const Grid g(1, {2, 1, 1}, {10, 1, 1});
  GridField fld(g);
  for (std::size_t i = 0; i < fld.nodes(); ++i) fld.v[i] = 0.25 * g.node_coord(i)(0);
  for (double q : {2.0, 3.0}) {
    const EpsParams prm{0.2, 0.01, 1.5, q, {1, 2}};
    const auto e = assemble_energy(fld, prm, FirstOrderOperator::full_strain(1),
                                   BulkDensity(2, 0, HookeTensor(1, 0, 1)));
    EXPECT_NEAR(e.term_gradv, 2 * 1.5 * std::pow(0.2, q - 1) * std::pow(0.25, q), 1e-14) << q;
  }
}

TEST(Energy, RigidMotionCostsNothingInTheBulk) {
  const Grid g(3, {1, 1, 1}, {3, 3, 3});
  Eigen::Matrix3d w;
  w << 0, 0.4, -0.1, -0.4, 0, 0.3, 0.1, -0.3, 0;
  const auto e = assemble_energy(affine_field(g, w, 1), EpsParams{0.1, 0.01, 1, 2, {1, 2}},
                                 FirstOrderOperator::full_strain(3), BulkDensity(2, 0, HookeTensor(1, 1, 3)));
  EXPECT_LT(e.term_A + e.term_rest, 1e-28);
  EXPECT_EQ(e.term_psi, 0);
}

TEST(Energy, GradientsMatchFiniteDifferences) {
  for (int n = 1; n <= 3; ++n) {
    const Grid g(n, {1, 1, 1}, {6, 5, 3});
    GridField fld(g);
    fld.pin_u_faces({Face::parse("x0-")}, PolyField(n));
    fld.pin_v_faces({Face::parse("x0+")});
    randomize(fld, 40 + n);
    const auto op = n == 1 ? FirstOrderOperator::full_strain(1) : FirstOrderOperator::deviatoric(n);
    const auto c = gradient_check(fld, EpsParams{0.3, 0.03, 1, 3, {1, 2}}, op,
                                  BulkDensity(2.5, 0.1, HookeTensor(1, 0.3, n)), 30, 5);
    EXPECT_TRUE(c.pass(1e-6)) << n << " " << c.max_rel_u << " " << c.max_rel_v;
    EXPECT_TRUE(c.pinned_zero);
  }
}

TEST(Energy, FiniteDifferenceCheckCatchesCorruptedGradient) {
  const Grid g(2, {1, 1, 1}, {4, 4, 1});
  GridField fld(g);
  randomize(fld, 1);
  const auto c = gradient_check(fld, EpsParams{0.3, 0.03, 1, 2, {1, 2}}, FirstOrderOperator::full_strain(2),
                                BulkDensity(2, 0, HookeTensor(1, 0, 2)), 10, 2, 1e-4);
  EXPECT_FALSE(c.pass(1e-6));
}

TEST(Energy, ThreadCountDoesNotChangeResults) {
  const Grid g(2, {1, 1, 1}, {64, 64, 1});
  GridField fld(g);
  randomize(fld, 9);
  const EpsParams prm{0.05, 0.0025, 1, 2, {1, 2}};
  const auto op = FirstOrderOperator::deviatoric(2);
  const BulkDensity f(3, 0.1, HookeTensor(1, 0.5, 2));
  setenv("PFGAMMA_THREADS", "1", 1);
  const auto e1 = assemble_energy(fld, prm, op, f);
  const auto g1 = gradient_u(fld, prm, op, f);
  setenv("PFGAMMA_THREADS", "4", 1);
  const auto e4 = assemble_energy(fld, prm, op, f);
  const auto g4 = gradient_u(fld, prm, op, f);
  unsetenv("PFGAMMA_THREADS");
  EXPECT_EQ(e1.total, e4.total);
  EXPECT_EQ(g1, g4);
}

TEST(Energy, SublevelDiagnosticsMatchBreakdown) {
  const Grid g(1, {1, 1, 1}, {8, 1, 1});
  Eigen::MatrixXd l(1, 1);
  l << 2;
  const EpsParams prm{0.1, 0.01, 1, 2, {1, 2}};
  const auto d = sublevel_diagnostics(affine_field(g, l, 0.5), prm, FirstOrderOperator::full_strain(1),
                                      BulkDensity(2, 0, HookeTensor(1, 0, 1)));
  EXPECT_NEAR(d.a_variation, 2, 1e-14);
  EXPECT_NEAR(d.psi_mass, 0.25, 1e-14);
}

TEST(Snapshot, RoundTripIsExact) {
  const Grid g(2, {1, 0.5, 1}, {3, 2, 1});
  GridField fld(g);
  randomize(fld, 4);
  fld.u[3] = 1.0 / 3;
  std::stringstream ss;
  write_snapshot(ss, fld);
  const GridField back = read_snapshot(ss);
  EXPECT_TRUE(back.grid == g);
  EXPECT_EQ(back.u, fld.u);
  EXPECT_EQ(back.v, fld.v);
}

TEST(Snapshot, RejectsGarbage) {
  std::stringstream ss("# pfgamma snapshot\ndim 7\n");
  EXPECT_THROW(read_snapshot(ss), ConfigError);
}

TEST(Resample, AffineFieldsAreReproduced) {
  const Grid coarse(2, {1, 1, 1}, {4, 4, 1}), fine(2, {1, 1, 1}, {12, 8, 1});
  Eigen::Matrix2d l;
  l << 1, 2, -3, 0.5;
  const GridField src = affine_field(coarse, l, 0.4);
  GridField dst(fine);
  resample_into(src, dst);
  const GridField expect = affine_field(fine, l, 0.4);
  for (std::size_t i = 0; i < dst.u.size(); ++i) EXPECT_NEAR(dst.u[i], expect.u[i], 1e-14);
  for (std::size_t i = 0; i < dst.v.size(); ++i) EXPECT_NEAR(dst.v[i], 0.4, 1e-15);
}
