#include "pfgamma/diagnostics.hpp"
#include "pfgamma/solver.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

using namespace pfgamma;

namespace {

struct Bar {
  Grid grid{1, {1, 1, 1}, {24, 1, 1}};
  FirstOrderOperator op = FirstOrderOperator::full_strain(1);
  BulkDensity f{2, 0, HookeTensor(1, 0, 1)};

  GridField field(double delta) const {
    GridField fld(grid);
    PolyField u0(1);
    u0.linear()(0, 0) = delta;
    fld.pin_u_faces({Face::parse("x0-"), Face::parse("x0+")}, u0);
    fld.pin_v_faces({Face::parse("x0-"), Face::parse("x0+")});
    return fld;
  }
};

}  // namespace

TEST(MinimizeU, QuadraticBarIsLinear) {
  Bar b;
  GridField fld = b.field(1.5);
  for (std::size_t i = 0; i < fld.nodes(); ++i) fld.v[i] = 0.6;
  const EpsParams prm{0.1, 0.01, 1, 2, {1, 2}};
  minimize_u(fld, prm, b.op, b.f, SolverConfig{});
  for (std::size_t i = 0; i < fld.nodes(); ++i)
    EXPECT_NEAR(fld.u[i], 1.5 * b.grid.node_coord(i)(0), 1e-10);
  // v constant: elastic energy (v + eps) delta^2 / 2
  EXPECT_NEAR(assemble_energy(fld, prm, b.op, b.f).term_A, 0.7 * 1.125, 1e-12);
}

TEST(MinimizeU, NonquadraticBarMatchesStressBalance) {
  Bar b;
  b.f = BulkDensity(3, 0, HookeTensor(1, 0, 1));
  GridField fld = b.field(1.0);
  // two materials: v = 1 on the left half, 0.2 on the right half
  for (std::size_t i = 0; i < fld.nodes(); ++i) fld.v[i] = b.grid.node_coord(i)(0) < 0.5 ? 1 : 0.2;
  const EpsParams prm{0.1, 0.001, 1, 2, {1, 2}};
  minimize_u(fld, prm, b.op, b.f, SolverConfig{});
  // 1D: c_i s_i^2 constant, so s_i proportional to c_i^{-1/2}
  const int n = b.grid.cells[0];
  std::vector<double> c(n), s(n);
  double denom = 0;
  for (int i = 0; i < n; ++i) {
    c[i] = (fld.v[i] + fld.v[i + 1]) / 2 + 0.01;
    denom += b.grid.h(0) / std::sqrt(c[i]);
  }
  for (int i = 0; i < n; ++i) {
    const double strain = (fld.u[i + 1] - fld.u[i]) / b.grid.h(0);
    EXPECT_NEAR(strain, 1.0 / denom / std::sqrt(c[i]), 1e-7);
  }
}

TEST(MinimizeV, NeverIncreasesEnergyAndStaysFeasible) {
  for (int n = 1; n <= 2; ++n) {
    const Grid g(n, {1, 1, 1}, {10, 6, 1});
    GridField fld(g);
    fld.pin_u_faces({Face::parse("x0-")}, PolyField(n));
    fld.pin_v_faces({Face::parse("x0-")});
    randomize(fld, 3, 2.0);
    const auto op = FirstOrderOperator::full_strain(n);
    const BulkDensity f(2, 0, HookeTensor(1, 0, n));
    for (bool exact : {true, false}) {
      GridField w = fld;
      SolverConfig cfg;
      cfg.exact_v = exact;
      const EpsParams prm{0.2, 0.04, 1, 2, {1, 2}};
      const double before = assemble_energy(w, prm, op, f).total;
      minimize_v(w, prm, op, f, cfg);
      EXPECT_LE(assemble_energy(w, prm, op, f).total, before);
      EXPECT_TRUE(w.feasible());
    }
  }
}

TEST(MinimizeV, ActiveSetAgreesWithProjectedGradient) {
  const Grid g(2, {1, 1, 1}, {8, 8, 1});
  GridField fld(g);
  fld.pin_u_faces({Face::parse("x1-")}, PolyField(2));
  randomize(fld, 8, 3.0);
  const auto op = FirstOrderOperator::deviatoric(2);
  const BulkDensity f(2, 0, HookeTensor(1, 0.5, 2));
  const EpsParams prm{0.15, 0.0225, 1, 2, {1, 2}};
  SolverConfig exact, spg;
  spg.exact_v = false;
  spg.inner_tol = 1e-12;
  GridField a = fld, b = fld;
  minimize_v(a, prm, op, f, exact);
  minimize_v(b, prm, op, f, spg);
  const double ea = assemble_energy(a, prm, op, f).total, eb = assemble_energy(b, prm, op, f).total;
  EXPECT_NEAR(ea, eb, 1e-9 * std::max(1.0, ea));
  // the large strains force some nodes onto the bound v = 0
  int at_zero = 0;
  for (double v : a.v) at_zero += v == 0.0;
  EXPECT_GT(at_zero, 0);
}

TEST(MinimizeV, NonquadraticPsiUsesGradientPath) {
  Bar b;
  GridField fld = b.field(3);
  randomize(fld, 5);
  const EpsParams prm{0.1, 0.01, 1, 3, {1, 3}};
  const double before = assemble_energy(fld, prm, b.op, b.f).total;
  minimize_v(fld, prm, b.op, b.f, SolverConfig{});
  EXPECT_LT(assemble_energy(fld, prm, b.op, b.f).total, before);
  EXPECT_TRUE(fld.feasible());
}

TEST(Alternate, EnergyIsMonotoneAndConverges) {
  Bar b;
  GridField fld = b.field(3);
  fld.v[12] = 0;
  const EpsParams prm{0.125, 0.015625, 1, 2, {1, 2}};
  const auto h = alternate_minimize(fld, prm, b.op, b.f, SolverConfig{});
  ASSERT_TRUE(h.converged);
  double prev = h.initial.total;
  for (const auto& r : h.records) {
    EXPECT_LE(r.energy.total, prev * (1 + 1e-14));
    prev = r.energy.total;
  }
  EXPECT_TRUE(fld.feasible());
}

TEST(Alternate, RejectsInfeasibleStartAndWritesLog) {
  Bar b;
  GridField fld = b.field(1);
  fld.v[3] = 1.5;
  const EpsParams prm{0.125, 0.015625, 1, 2, {1, 2}};
  EXPECT_THROW(alternate_minimize(fld, prm, b.op, b.f, SolverConfig{}), ConfigError);
  fld.v[3] = 1;
  SolverConfig cfg;
  cfg.log_path = ::testing::TempDir() + "pfgamma_log.csv";
  cfg.log_header = "unit";
  alternate_minimize(fld, prm, b.op, b.f, cfg);
  std::ifstream is(cfg.log_path);
  std::string first, second;
  std::getline(is, first);
  std::getline(is, second);
  EXPECT_EQ(first, "# unit");
  EXPECT_EQ(second, "iter,E_total,E_A,E_rest,E_psi,E_gradv,grad_u,grad_v");
}

TEST(Alternate, NonFiniteStateAborts) {
  Bar b;
  GridField fld = b.field(1);
  fld.u[5] = std::numeric_limits<double>::quiet_NaN();
  SolverConfig cfg;
  cfg.abort_snapshot = ::testing::TempDir() + "pfgamma_abort.snap";
  EXPECT_THROW(alternate_minimize(fld, EpsParams{0.1, 0.01, 1, 2, {1, 2}}, b.op, b.f, cfg),
               NumericalAbort);
  std::ifstream is(cfg.abort_snapshot);
  EXPECT_TRUE(is.good());
}

TEST(Notch, BandAndSingleNode) {
  const Grid g(1, {1, 1, 1}, {20, 1, 1});
  GridField fld(g);
  apply_notch(fld, NotchSpec{}, 0.1);
  int cut = 0;
  for (double v : fld.v) cut += v == 0.5;
  EXPECT_EQ(cut, 1);
  EXPECT_EQ(fld.v[10], 0.5);
  GridField band(g);
  apply_notch(band, NotchSpec{true, -1, 0.5, 3, 0}, 0.1);  // |x - 0.5| <= 0.15
  cut = 0;
  for (double v : band.v) cut += v == 0.0;
  EXPECT_EQ(cut, 7);
}

TEST(Sweep, WarmStartKeepsLowerBranchAndValidates) {
  SweepSpec sp;
  sp.grid = Grid(1, {1, 1, 1}, {8, 1, 1});
  sp.cells_per_eps = 4;
  sp.op = FirstOrderOperator::full_strain(1);
  sp.density = BulkDensity(2, 0, HookeTensor(1, 0, 1));
  sp.psi = {1, 2};
  sp.u_faces = {Face::parse("x0-"), Face::parse("x0+")};
  sp.u0 = PolyField(1);
  sp.u0.linear()(0, 0) = 6;
  sp.v_faces = sp.u_faces;
  sp.notch = NotchSpec{true, -1, std::numeric_limits<double>::quiet_NaN(), 3, 0};
  sp.timing = false;
  int seen = 0;
  const auto rows = eps_sweep(sp, {0.25, 0.125}, SolverConfig{}, [&](const SweepRow&) { ++seen; });
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(seen, 2);
  for (const auto& r : rows) {
    EXPECT_DOUBLE_EQ(r.energy.total, std::min(r.energy_warm, r.energy_notch));
    EXPECT_EQ(r.runtime_s, 0.0);
    EXPECT_EQ(r.field.grid.cells[0], static_cast<int>(std::lround(4 / r.eps)));
  }
  EXPECT_THROW(eps_sweep(sp, {0.1, 0.2}, SolverConfig{}), ConfigError);
  sp.u_faces.clear();
  EXPECT_THROW(eps_sweep(sp, {0.1}, SolverConfig{}), ConfigError);
}

TEST(Sweep, CsvIsDeterministic) {
  SweepSpec sp;
  sp.grid = Grid(1, {1, 1, 1}, {16, 1, 1});
  sp.op = FirstOrderOperator::full_strain(1);
  sp.density = BulkDensity(2, 0, HookeTensor(1, 0, 1));
  sp.psi = {1, 2};
  sp.u_faces = {Face::parse("x0-"), Face::parse("x0+")};
  sp.u0 = PolyField(1);
  sp.u0.linear()(0, 0) = 2;
  sp.timing = false;
  const auto a = sweep_csv(eps_sweep(sp, {0.2, 0.1}, SolverConfig{}), "h");
  const auto b = sweep_csv(eps_sweep(sp, {0.2, 0.1}, SolverConfig{}), "h");
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("eps,eta,E_total,E_A,E_rest,E_psi,E_gradv,a_variation,psi_mass,D_limit_prediction,runtime_s"),
            std::string::npos);
}
