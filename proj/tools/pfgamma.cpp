// Command-line driver for the phase-field toolkit.
//
// Exit codes: 0 success, 1 assertion failure, 2 usage or configuration error,
// 3 numerical abort.

#include "pfgamma/pfgamma.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifndef PFGAMMA_VERSION
#define PFGAMMA_VERSION "dev"
#endif

namespace {

using json = nlohmann::json;
using namespace pfgamma;

constexpr int kOk = 0, kAssert = 1, kUsage = 2, kAbort = 3;

struct AssertionFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string provenance(std::uint64_t seed, const std::string& hash) {
  return std::string("pfgamma ") + PFGAMMA_VERSION + " seed=" + std::to_string(seed) +
         " scenario=" + hash;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_atomic(path, text);
}

json complex_vec(const Eigen::VectorXcd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back({v(i).real(), v(i).imag()});
  return a;
}

Eigen::MatrixXd parse_matrix(const std::vector<double>& vals, int dim) {
  const int d = sym_size(dim);
  if (vals.size() != static_cast<std::size_t>(d * d))
    throw ConfigError("--matrix needs " + std::to_string(d * d) + " values for dim " +
                      std::to_string(dim));
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d * d; ++i) a(i / d, i % d) = vals[i];
  return a;
}

FirstOrderOperator make_op(const std::string& name, int dim, const std::vector<double>& matrix) {
  try {
    if (name == "custom") return FirstOrderOperator::custom(dim, parse_matrix(matrix, dim));
    return FirstOrderOperator::by_name(name, dim);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("--op: ") + e.what());
  }
}

// classify

struct ClassifyOpts {
  std::string op = "full-strain";
  int dim = 0;
  int samples = 10000;
  double tol = 1e-8;
  std::uint64_t seed = 1;
  std::vector<double> matrix;
};

int run_classify(const ClassifyOpts& o) {
  const FirstOrderOperator op = make_op(o.op, o.dim, o.matrix);
  const EllipticityReport r = classify_ellipticity(op, o.samples, o.tol, o.seed);
  json j{{"operator", op.name},
         {"dim", op.dim},
         {"r_elliptic", r.r_elliptic},
         {"c_elliptic", r.c_elliptic},
         {"min_sigma_real", r.min_sigma_real},
         {"min_sigma_complex", r.min_sigma_complex},
         {"samples", r.samples},
         {"tol", r.tol},
         {"seed", o.seed}};
  if (r.witness)
    j["witness"] = {{"v", complex_vec(r.witness->v)},
                    {"z", complex_vec(r.witness->z)},
                    {"residual", r.witness->residual}};
  else
    j["witness"] = nullptr;
  std::cout << j.dump(2) << "\n";
  return kOk;
}

// limit-constants

struct StaticOpts {
  double p = 2, q = 2, gamma = 1, psi0 = 1, m = 2;
  StaticParams params() const { return {p, q, gamma, {psi0, m}}; }
};

void add_static(CLI::App* c, StaticOpts& s) {
  c->add_option("--p", s.p, "bulk growth exponent")->capture_default_str();
  c->add_option("--q", s.q, "phase-field gradient exponent")->capture_default_str();
  c->add_option("--gamma", s.gamma, "gradient weight")->capture_default_str();
  c->add_option("--psi0", s.psi0, "psi amplitude")->capture_default_str();
  c->add_option("--m", s.m, "psi exponent")->capture_default_str();
}

int run_limit_constants(const StaticOpts& o) {
  const LimitConstants c = limit_constants(o.params());
  json j{{"a", c.a},
         {"b", c.b},
         {"psi_integral", c.psi_integral},
         {"psi_integral_quadrature", c.psi_integral_quad}};
  std::cout << j.dump(2) << "\n";
  return kOk;
}

// profile

struct ProfileOpts {
  StaticOpts s;
  double eps = 0;
  std::string out;
};

int run_profile(const ProfileOpts& o) {
  const StaticParams sp = o.s.params();
  const ProfileSolution ps = optimal_profile(sp, o.eps);
  const ProfileResiduals res = profile_residuals(ps, sp, ps.tau);
  json j{{"eps", o.eps},
         {"rho", ps.rho},
         {"tau", ps.tau},
         {"T", std::isfinite(ps.T) ? json(ps.T) : json("inf")},
         {"h1_over_eps", h1(sp, ps.rho) / o.eps},
         {"eps_over_h2", o.eps / h2(sp, ps.rho)},
         {"ode_residual", res.ode},
         {"calibration_residual", res.calibration},
         {"young_sum_residual", res.young_sum},
         {"quadrature_cross_check", ps.cross_check_error},
         {"table_points", ps.w.size()}};
  std::cout << j.dump(2) << "\n";
  if (!o.out.empty()) {
    std::ostringstream os;
    os << "# " << provenance(0, "-") << "\n" << "t,w,dw\n";
    for (std::size_t i = 0; i < ps.w.size(); ++i)
      os << detail::fmt_double(ps.dt * static_cast<double>(i)) << ','
         << detail::fmt_double(ps.w[i]) << ',' << detail::fmt_double(ps.dw[i]) << '\n';
    write_atomic(o.out, os.str());
  }
  return kOk;
}

// scenario-driven commands

struct ScenarioOpts {
  std::string path;
  std::optional<std::uint64_t> seed;
  std::string out;
};

Scenario load(const ScenarioOpts& o) {
  Scenario s = load_scenario_file(o.path);
  if (o.seed) s.seed = *o.seed;
  if (s.allow_non_c_elliptic && !classify_ellipticity(s.op(), 1000).c_elliptic)
    std::cerr << "warning: operator '" << s.op_name << "' is not C-elliptic in dim " << s.dim
              << "; the limit theory does not cover this run\n";
  return s;
}

json breakdown_json(const EnergyBreakdown& e) {
  return {{"E_total", e.total},
          {"E_A", e.term_A},
          {"E_rest", e.term_rest},
          {"E_psi", e.term_psi},
          {"E_gradv", e.term_gradv}};
}

struct MinimizeOpts {
  ScenarioOpts sc;
  std::optional<double> eps;
  bool notch = false;
  std::string snapshot;
  std::string log;
};

int run_minimize(const MinimizeOpts& o) {
  const Scenario s = load(o.sc);
  const auto eps_list = s.eps_values();
  if (!o.eps && eps_list.empty()) throw ConfigError("no eps given (use --eps or eps.list)");
  const double eps = o.eps ? *o.eps : eps_list.front();
  const SweepSpec sp = s.sweep_spec();
  const EpsParams prm = sp.params(eps);
  SolverConfig cfg = s.solver();
  cfg.log_path = !o.log.empty() ? o.log : s.out_log;
  cfg.log_header = provenance(s.seed, scenario_hash(s));
  const Grid g = sp.grid_for(eps);
  GridField fld = elastic_start(sp, g, prm, cfg, o.notch);
  const SolveHistory h = alternate_minimize(fld, prm, sp.op, sp.density, cfg);
  const SublevelDiagnostics d = sublevel_diagnostics(fld, prm, sp.op, sp.density);
  json j = breakdown_json(assemble_energy(fld, prm, sp.op, sp.density));
  j["eps"] = eps;
  j["eta"] = prm.eta;
  j["outer_iterations"] = h.records.size();
  j["converged"] = h.converged;
  j["a_variation"] = d.a_variation;
  j["psi_mass"] = d.psi_mass;
  std::cout << j.dump(2) << "\n";
  if (!o.snapshot.empty()) {
    std::ostringstream os;
    write_snapshot(os, fld);
    write_atomic(o.snapshot, os.str());
  }
  return kOk;
}

struct SweepOpts {
  ScenarioOpts sc;
  bool no_timing = false;
  std::string snapshot_dir;
};

int run_sweep(const SweepOpts& o) {
  const Scenario s = load(o.sc);
  SweepSpec sp = s.sweep_spec();
  sp.timing = !o.no_timing;
  SolverConfig cfg = s.solver();
  const std::string header = provenance(s.seed, scenario_hash(s));
  const std::string out = !o.sc.out.empty() ? o.sc.out : s.out_csv;
  const std::string snapdir = !o.snapshot_dir.empty() ? o.snapshot_dir : s.out_snapshot_dir;
  const auto eps = s.eps_values();
  if (eps.empty()) throw ConfigError("eps.list or eps.start/eps.count required for sweep");
  std::vector<SweepRow> done;
  int index = 0;
  auto on_row = [&](const SweepRow& r) {
    SweepRow copy = r;
    copy.field = GridField();
    done.push_back(copy);
    if (!snapdir.empty()) {
      std::filesystem::create_directories(snapdir);
      std::ostringstream os;
      write_snapshot(os, r.field);
      write_atomic(snapdir + "/eps_" + std::to_string(index) + ".snap", os.str());
    }
    ++index;
  };
  try {
    eps_sweep(sp, eps, cfg, on_row);
  } catch (const NumericalAbort&) {
    if (!out.empty() && out != "-") write_atomic(out, sweep_csv(done, header));
    throw;
  }
  emit(out, sweep_csv(done, header));
  return kOk;
}

struct LimsupOpts {
  ScenarioOpts sc;
  std::optional<double> assert_tol;
};

int run_limsup(const LimsupOpts& o) {
  const Scenario s = load(o.sc);
  const JumpTemplate tpl = s.jump_template();
  const auto eps = s.eps_values();
  if (eps.empty()) throw ConfigError("eps.list or eps.start/eps.count required for limsup");
  const auto rows = limsup_check(tpl, s.static_params(), s.density(), s.op(),
                                 [&](double e) { return s.eta(e); }, eps, s.grid_rule());
  std::ostringstream os;
  using detail::fmt_double;
  os << "# " << provenance(s.seed, scenario_hash(s)) << "\n";
  os << "eps,E_eps_total,E_eps_A,E_eps_rest,E_eps_psi,E_eps_gradv,D_limit,ratio\n";
  for (const auto& r : rows)
    os << fmt_double(r.eps) << ',' << fmt_double(r.energy.total) << ','
       << fmt_double(r.energy.term_A) << ',' << fmt_double(r.energy.term_rest) << ','
       << fmt_double(r.energy.term_psi) << ',' << fmt_double(r.energy.term_gradv) << ','
       << fmt_double(r.d_limit) << ',' << fmt_double(r.ratio) << '\n';
  emit(!o.sc.out.empty() ? o.sc.out : s.out_csv, os.str());
  if (o.assert_tol && !rows.empty() && std::abs(rows.back().ratio - 1) > *o.assert_tol)
    throw AssertionFailure("final ratio " + fmt_double(rows.back().ratio) +
                           " deviates from 1 by more than " + fmt_double(*o.assert_tol));
  return kOk;
}

struct GradCheckOpts {
  ScenarioOpts sc;
  int states = 5;
  int components = 20;
  double tol = 1e-6;
  double corrupt = 0;
  std::optional<double> eps;
};

int run_gradient_check(const GradCheckOpts& o) {
  const Scenario s = load(o.sc);
  const auto eps_list = s.eps_values();
  const double eps = o.eps ? *o.eps : eps_list.empty() ? 0.1 : eps_list.front();
  const SweepSpec sp = s.sweep_spec();
  const EpsParams prm = sp.params(eps);
  const Grid g = sp.grid_for(eps);
  json checks = json::array();
  bool ok = true;
  for (int k = 0; k < o.states; ++k) {
    GridField fld = sp.blank(g);
    randomize(fld, s.seed + static_cast<std::uint64_t>(k));
    const GradientCheck c = gradient_check(fld, prm, sp.op, sp.density, o.components,
                                           s.seed * 7919 + static_cast<std::uint64_t>(k), o.corrupt);
    const bool pass = c.pass(o.tol);
    ok = ok && pass;
    checks.push_back({{"state", k},
                      {"max_rel_u", c.max_rel_u},
                      {"max_rel_v", c.max_rel_v},
                      {"pinned_zero", c.pinned_zero},
                      {"pass", pass}});
  }
  json j{{"tol", o.tol}, {"checks", checks}, {"pass", ok}};
  std::cout << j.dump(2) << "\n";
  if (!ok) throw AssertionFailure("finite-difference check failed");
  return kOk;
}

struct KernelOpts {
  std::string op = "full-strain";
  int dim = 0;
  std::string kind = "rigid";
  int points = 1000;
  std::uint64_t seed = 1;
  std::vector<double> matrix;
  int cells = 8;
};

int run_kernel_check(const KernelOpts& o) {
  const FirstOrderOperator op = make_op(o.op, o.dim, o.matrix);
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd w(o.dim, o.dim);
  for (int i = 0; i < o.dim; ++i)
    for (int j = 0; j < o.dim; ++j) w(i, j) = g(rng);
  const Eigen::MatrixXd m = (w - w.transpose()) / 2;
  Eigen::VectorXd b(o.dim), a(o.dim);
  for (int i = 0; i < o.dim; ++i) b(i) = g(rng);
  for (int i = 0; i < o.dim; ++i) a(i) = g(rng);
  KernelField kf;
  if (o.kind == "rigid")
    kf = KernelField::rigid(m, b);
  else if (o.kind == "conformal")
    kf = KernelField::conformal(m, b, a);
  else
    throw ConfigError("--kind must be rigid or conformal");
  double res = 0;
  try {
    res = kernel_residual(op, kf, o.points, Eigen::VectorXd::Zero(o.dim),
                          Eigen::VectorXd::Ones(o.dim), o.seed);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  // Cross-check on a grid: v = 1 and the nodal field give no A-term energy.
  const Grid grid(o.dim, {1, 1, 1}, {o.cells, o.cells, o.cells});
  GridField fld(grid);
  const PolyField pf = kf.field();
  for (std::size_t i = 0; i < fld.nodes(); ++i) {
    const Eigen::VectorXd val = pf.value(grid.node_coord(i));
    for (int c = 0; c < o.dim; ++c) fld.u[i * o.dim + c] = val(c);
  }
  const EnergyBreakdown e = assemble_energy(fld, EpsParams{0.1, 0.01, 1, 2, {}}, op,
                                            BulkDensity(2, 0, HookeTensor(1, 0, o.dim)));
  json j{{"operator", op.name}, {"dim", o.dim},        {"kind", o.kind},
         {"points", o.points},  {"residual", res},     {"grid_term_A", e.term_A},
         {"seed", o.seed}};
  std::cout << j.dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-field fracture functionals: minimization and limit checks"};
  app.set_version_flag("--version", PFGAMMA_VERSION);
  app.require_subcommand(1);

  ClassifyOpts co;
  auto* c_classify = app.add_subcommand("classify", "sampled R-/C-ellipticity report (JSON)");
  c_classify->add_option("--op", co.op, "full-strain | deviatoric | custom")->capture_default_str();
  c_classify->add_option("--dim", co.dim, "spatial dimension")->required()->check(CLI::Range(1, 3));
  c_classify->add_option("--samples", co.samples)->capture_default_str()->check(CLI::PositiveNumber);
  c_classify->add_option("--tol", co.tol)->capture_default_str()->check(CLI::PositiveNumber);
  c_classify->add_option("--seed", co.seed)->capture_default_str();
  c_classify->add_option("--matrix", co.matrix, "custom endomorphism, row-major in the Sym(n) basis");

  StaticOpts so;
  auto* c_const = app.add_subcommand("limit-constants", "surface constants a and b (JSON)");
  add_static(c_const, so);

  ProfileOpts po;
  auto* c_prof = app.add_subcommand("profile", "optimal transition profile");
  add_static(c_prof, po.s);
  c_prof->add_option("--eps", po.eps)->required()->check(CLI::PositiveNumber);
  c_prof->add_option("--out", po.out, "write the table as CSV");

  auto add_scenario = [](CLI::App* c, ScenarioOpts& s) {
    c->add_option("--scenario", s.path, "scenario file")->required()->check(CLI::ExistingFile);
    c->add_option("--seed", s.seed, "override solver.seed");
    c->add_option("--out", s.out, "output CSV path (default: output.csv or stdout)");
  };

  MinimizeOpts mo;
  auto* c_min = app.add_subcommand("minimize", "alternating minimization at one eps");
  add_scenario(c_min, mo.sc);
  c_min->add_option("--eps", mo.eps)->check(CLI::PositiveNumber);
  c_min->add_flag("--notch", mo.notch, "start from the notched initializer");
  c_min->add_option("--snapshot", mo.snapshot, "write the final field");
  c_min->add_option("--log", mo.log, "per-iteration CSV log");

  SweepOpts swo;
  auto* c_sweep = app.add_subcommand("sweep", "warm-started eps sweep (CSV)");
  add_scenario(c_sweep, swo.sc);
  c_sweep->add_flag("--no-timing", swo.no_timing, "write runtime_s = 0 for reproducible output");
  c_sweep->add_option("--snapshot-dir", swo.snapshot_dir, "write final fields per eps");

  LimsupOpts lo;
  auto* c_limsup = app.add_subcommand("limsup", "recovery-sequence energies vs the limit (CSV)");
  add_scenario(c_limsup, lo.sc);
  c_limsup->add_option("--assert", lo.assert_tol, "fail (exit 1) if |final ratio - 1| exceeds this");

  GradCheckOpts go;
  auto* c_grad = app.add_subcommand("gradient-check", "finite-difference gradient checks (JSON)");
  add_scenario(c_grad, go.sc);
  c_grad->add_option("--states", go.states)->capture_default_str()->check(CLI::PositiveNumber);
  c_grad->add_option("--components", go.components)->capture_default_str()->check(CLI::PositiveNumber);
  c_grad->add_option("--tol", go.tol)->capture_default_str();
  c_grad->add_option("--eps", go.eps);
  c_grad->add_option("--corrupt", go.corrupt, "scale the analytic u-gradient by 1+x (test hook)");

  KernelOpts ko;
  auto* c_kernel = app.add_subcommand("kernel-check", "kernel residual of a random rigid/conformal field");
  c_kernel->add_option("--op", ko.op)->capture_default_str();
  c_kernel->add_option("--dim", ko.dim)->required()->check(CLI::Range(1, 3));
  c_kernel->add_option("--kind", ko.kind, "rigid | conformal")->capture_default_str();
  c_kernel->add_option("--points", ko.points)->capture_default_str()->check(CLI::PositiveNumber);
  c_kernel->add_option("--seed", ko.seed)->capture_default_str();
  c_kernel->add_option("--matrix", ko.matrix);
  c_kernel->add_option("--cells", ko.cells)->capture_default_str()->check(CLI::Range(1, 64));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*c_classify) return run_classify(co);
    if (*c_const) return run_limit_constants(so);
    if (*c_prof) return run_profile(po);
    if (*c_min) return run_minimize(mo);
    if (*c_sweep) return run_sweep(swo);
    if (*c_limsup) return run_limsup(lo);
    if (*c_grad) return run_gradient_check(go);
    if (*c_kernel) return run_kernel_check(ko);
  } catch (const AssertionFailure& e) {
    std::cerr << "assertion failed: " << e.what() << "\n";
    return kAssert;
  } catch (const NumericalAbort& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kAbort;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kAbort;
  }
  return kUsage;
}
