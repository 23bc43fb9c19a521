#pragma once

// Scenario files: one "key = value" per line, dotted keys, '#' comments.
// Lists are whitespace- or comma-separated. Unknown keys are errors.

#include "pfgamma/bulk_density.hpp"
#include "pfgamma/energy.hpp"
#include "pfgamma/errors.hpp"
#include "pfgamma/gamma_limit.hpp"
#include "pfgamma/grid.hpp"
#include "pfgamma/operator_algebra.hpp"
#include "pfgamma/solver.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace pfgamma {

struct PolySpec {
  std::vector<double> constant, linear, quadratic;  // n, n*n, n*n*n entries (empty = 0)

  PolyField build(int n, const std::string& key) const {
    PolyField p(n);
    auto check = [&](const std::vector<double>& v, std::size_t want, const char* part) {
      if (!v.empty() && v.size() != want)
        throw ConfigError(key + "." + part + " needs " + std::to_string(want) + " values");
    };
    check(constant, n, "constant");
    check(linear, n * n, "linear");
    check(quadratic, n * n * n, "quadratic");
    for (std::size_t i = 0; i < constant.size(); ++i) p.constant()(i) = constant[i];
    for (std::size_t i = 0; i < linear.size(); ++i) p.linear()(i / n, i % n) = linear[i];
    if (!quadratic.empty()) p.set_quadratic(quadratic);
    return p;
  }
  bool operator==(const PolySpec&) const = default;
};

struct Scenario {
  int dim = 1;
  std::vector<double> extents{1.0};
  std::vector<int> cells{16};
  double cells_per_eps = 0;

  std::string op_name = "full-strain";
  std::vector<double> op_matrix;
  bool allow_non_c_elliptic = false;

  double p = 2, mu = 0, lambda1 = 1, lambda2 = 0;
  double psi0 = 1, m = 2;
  double gamma = 1, q = 2;

  std::vector<double> eps_list;
  double eps_start = 0, eps_ratio = 0.5;
  int eps_count = 0;
  double eta_factor = 1;
  std::optional<double> eta_exponent;

  std::vector<std::string> u_faces{"x0-", "x0+"};
  PolySpec u0;
  std::vector<std::string> v_faces{"x0-", "x0+"};

  bool notch = true;
  int notch_axis = -1;
  std::optional<double> notch_center;
  double notch_width = 0, notch_value = 0.5;

  double tol_rel = 1e-10, inner_tol = 1e-10;
  int max_outer = 5000, max_inner = 20000;
  std::uint64_t seed = 1;
  bool exact_v = true;

  std::string prediction = "none";  // none | bar | template

  bool has_template = false;
  double tpl_plane = 0.5;
  std::vector<double> tpl_support_lo, tpl_support_hi;
  PolySpec tpl_lower, tpl_upper;
  double tpl_lipschitz = 0;

  double limsup_divisor = 4, limsup_snap = 0.02;
  int limsup_tangential_cells = 0, limsup_max_cells = 8192, limsup_quad_res = 4;

  std::string out_csv, out_snapshot_dir, out_log;

  bool operator==(const Scenario&) const = default;

  // Builders.
  FirstOrderOperator op() const {
    try {
      if (op_name == "custom") {
        const int d = sym_size(dim);
        if (op_matrix.size() != static_cast<std::size_t>(d * d))
          throw ConfigError("op.matrix needs " + std::to_string(d * d) + " values");
        Eigen::MatrixXd a(d, d);
        for (int i = 0; i < d * d; ++i) a(i / d, i % d) = op_matrix[i];
        return FirstOrderOperator::custom(dim, a);
      }
      return FirstOrderOperator::by_name(op_name, dim);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("op.name: ") + e.what());
    }
  }
  BulkDensity density() const {
    try {
      return BulkDensity(p, mu, HookeTensor(lambda1, lambda2, dim));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("bulk: ") + e.what());
    }
  }
  PsiSpec psi() const { return {psi0, m}; }
  StaticParams static_params() const { return {p, q, gamma, psi()}; }
  Grid grid() const {
    std::array<double, 3> e{1, 1, 1};
    std::array<int, 3> c{1, 1, 1};
    for (int a = 0; a < dim; ++a) {
      e[a] = extents[a];
      c[a] = cells[a];
    }
    return Grid(dim, e, c);
  }
  std::vector<double> eps_values() const {
    if (!eps_list.empty()) return eps_list;
    std::vector<double> out;
    for (int k = 0; k < eps_count; ++k) out.push_back(eps_start * std::pow(eps_ratio, k));
    return out;
  }
  double eta(double eps) const {
    return eta_factor * std::pow(eps, eta_exponent ? *eta_exponent : p);
  }
  EpsParams params(double eps) const { return {eps, eta(eps), gamma, q, psi()}; }
  SolverConfig solver() const {
    SolverConfig c;
    c.tol_rel = tol_rel;
    c.inner_tol = inner_tol;
    c.max_outer = max_outer;
    c.max_inner = max_inner;
    c.seed = seed;
    c.exact_v = exact_v;
    return c;
  }
  std::vector<Face> faces(const std::vector<std::string>& names) const {
    std::vector<Face> out;
    for (const auto& s : names) {
      Face f = Face::parse(s);
      if (f.axis >= dim) throw ConfigError("face '" + s + "' does not exist in dimension " + std::to_string(dim));
      out.push_back(f);
    }
    return out;
  }
  JumpTemplate jump_template() const {
    if (!has_template) throw ConfigError("scenario has no template.* section");
    JumpTemplate t;
    t.dim = dim;
    for (int a = 0; a < dim; ++a) t.extents[a] = extents[a];
    t.plane = tpl_plane;
    for (int a = 0; a + 1 < dim; ++a) {
      t.support_lo[a] = a < static_cast<int>(tpl_support_lo.size()) ? tpl_support_lo[a] : 0.0;
      t.support_hi[a] = a < static_cast<int>(tpl_support_hi.size()) ? tpl_support_hi[a] : extents[a];
    }
    t.lower = tpl_lower.build(dim, "template.lower");
    t.upper = tpl_upper.build(dim, "template.upper");
    t.lipschitz_L = tpl_lipschitz;
    t.validate();
    return t;
  }
  GridRule grid_rule() const {
    return {limsup_divisor, limsup_snap, limsup_tangential_cells, limsup_max_cells};
  }
  std::optional<double> predicted_limit() const {
    if (prediction == "none") return std::nullopt;
    if (prediction == "template") {
      return limit_energy(jump_template(), op(), density(), static_params(), limsup_quad_res).total;
    }
    // bar: 1D, u pinned at both ends by the affine datum
    const PolyField d = u0.build(dim, "bc.u0");
    const double delta = d.value(Eigen::VectorXd::Constant(1, extents[0]))(0) -
                         d.value(Eigen::VectorXd::Zero(1))(0);
    return bar_limit_minimum(static_params(), density(), delta, extents[0]).value;
  }
  SweepSpec sweep_spec() const {
    SweepSpec s;
    s.grid = grid();
    s.cells_per_eps = cells_per_eps;
    s.op = op();
    s.density = density();
    s.gamma = gamma;
    s.q = q;
    s.psi = psi();
    s.eta_factor = eta_factor;
    s.eta_exponent = eta_exponent ? *eta_exponent : p;
    s.u_faces = faces(u_faces);
    s.u0 = u0.build(dim, "bc.u0");
    s.v_faces = faces(v_faces);
    s.notch.enabled = notch;
    s.notch.axis = notch_axis;
    if (notch_center) s.notch.center = *notch_center;
    s.notch.width = notch_width;
    s.notch.value = notch_value;
    s.prediction = predicted_limit();
    return s;
  }

  void validate() const {
    if (dim < 1 || dim > 3) throw ConfigError("dim must be 1, 2 or 3");
    if (static_cast<int>(extents.size()) != dim)
      throw ConfigError("grid.extents needs " + std::to_string(dim) + " values");
    if (static_cast<int>(cells.size()) != dim)
      throw ConfigError("grid.cells needs " + std::to_string(dim) + " values");
    for (int c : cells)
      if (c < 1) throw ConfigError("grid.cells must be >= 1 (empty grid)");
    grid();
    if (cells_per_eps < 0) throw ConfigError("grid.cells_per_eps must be >= 0");
    const FirstOrderOperator o = op();
    if (o.name == "deviatoric" && dim == 2 && !allow_non_c_elliptic)
      throw ConfigError(
          "op.name: deviatoric in dim 2 is not C-elliptic; set op.allow_non_c_elliptic = true to "
          "run anyway");
    density();
    static_params().validate();
    for (double e : eps_list)
      if (!(e > 0)) throw ConfigError("eps.list entries must be > 0");
    for (std::size_t i = 1; i < eps_list.size(); ++i)
      if (!(eps_list[i] < eps_list[i - 1])) throw ConfigError("eps.list must be strictly decreasing");
    if (eps_list.empty() && eps_count > 0 && !(eps_start > 0 && eps_ratio > 0 && eps_ratio < 1))
      throw ConfigError("eps.start must be > 0 and eps.ratio in (0, 1)");
    if (!(eta_factor > 0)) throw ConfigError("eta.factor must be > 0");
    faces(u_faces);
    faces(v_faces);
    u0.build(dim, "bc.u0");
    solver().validate();
    if (prediction != "none" && prediction != "bar" && prediction != "template")
      throw ConfigError("prediction must be none, bar or template");
    if (prediction == "bar" && (dim != 1 || op_name != "full-strain"))
      throw ConfigError("prediction = bar needs dim = 1 and op.name = full-strain");
    if (has_template) jump_template();
    if (!(limsup_divisor > 0)) throw ConfigError("limsup.divisor must be > 0");
    if (!(limsup_snap > 0 && limsup_snap <= 0.5)) throw ConfigError("limsup.snap must be in (0, 0.5]");
    if (limsup_quad_res < 1) throw ConfigError("limsup.quad_res must be >= 1");
  }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt_double(v[i]);
  return s;
}
inline std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}
inline std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + v[i];
  return s;
}

}  // namespace detail

inline std::map<std::string, std::string> parse_kv(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (kv.count(key)) throw ConfigError("duplicate key '" + key + "'");
    kv[key] = detail::trim(line.substr(eq + 1));
  }
  return kv;
}

inline Scenario scenario_from_kv(const std::map<std::string, std::string>& kv) {
  Scenario s;
  std::map<std::string, bool> used;
  auto get = [&](const std::string& k) -> const std::string* {
    auto it = kv.find(k);
    if (it == kv.end()) return nullptr;
    used[k] = true;
    return &it->second;
  };
  auto num = [&](const std::string& k, double& out) {
    if (auto v = get(k)) {
      try {
        out = detail::parse_double(*v);
      } catch (const ConfigError&) {
        throw ConfigError(k + ": not a number: '" + *v + "'");
      }
    }
  };
  auto integer = [&](const std::string& k, int& out) {
    if (auto v = get(k)) {
      try {
        std::size_t pos = 0;
        out = std::stoi(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("");
      } catch (...) {
        throw ConfigError(k + ": not an integer: '" + *v + "'");
      }
    }
  };
  auto boolean = [&](const std::string& k, bool& out) {
    if (auto v = get(k)) {
      if (*v == "true" || *v == "1") out = true;
      else if (*v == "false" || *v == "0") out = false;
      else throw ConfigError(k + ": expected true or false");
    }
  };
  auto nums = [&](const std::string& k, std::vector<double>& out) {
    if (auto v = get(k)) {
      out.clear();
      for (const auto& t : detail::split_list(*v)) {
        try {
          out.push_back(detail::parse_double(t));
        } catch (const ConfigError&) {
          throw ConfigError(k + ": not a number: '" + t + "'");
        }
      }
    }
  };
  auto ints = [&](const std::string& k, std::vector<int>& out) {
    if (auto v = get(k)) {
      out.clear();
      for (const auto& t : detail::split_list(*v)) {
        try {
          out.push_back(std::stoi(t));
        } catch (...) {
          throw ConfigError(k + ": not an integer: '" + t + "'");
        }
      }
    }
  };
  auto strs = [&](const std::string& k, std::vector<std::string>& out) {
    if (auto v = get(k)) out = detail::split_list(*v);
  };
  auto str = [&](const std::string& k, std::string& out) {
    if (auto v = get(k)) out = *v;
  };
  auto opt = [&](const std::string& k, std::optional<double>& out) {
    double x = 0;
    if (kv.count(k)) {
      num(k, x);
      out = x;
    }
  };
  auto poly = [&](const std::string& k, PolySpec& p) {
    nums(k + ".constant", p.constant);
    nums(k + ".linear", p.linear);
    nums(k + ".quadratic", p.quadratic);
  };

  integer("dim", s.dim);
  if (!kv.count("grid.extents")) s.extents.assign(std::max(s.dim, 0), 1.0);
  if (!kv.count("grid.cells")) s.cells.assign(std::max(s.dim, 0), 16);
  nums("grid.extents", s.extents);
  ints("grid.cells", s.cells);
  num("grid.cells_per_eps", s.cells_per_eps);
  str("op.name", s.op_name);
  nums("op.matrix", s.op_matrix);
  boolean("op.allow_non_c_elliptic", s.allow_non_c_elliptic);
  num("bulk.p", s.p);
  num("bulk.mu", s.mu);
  num("bulk.lambda1", s.lambda1);
  num("bulk.lambda2", s.lambda2);
  num("psi.psi0", s.psi0);
  num("psi.m", s.m);
  num("reg.gamma", s.gamma);
  num("reg.q", s.q);
  nums("eps.list", s.eps_list);
  num("eps.start", s.eps_start);
  num("eps.ratio", s.eps_ratio);
  integer("eps.count", s.eps_count);
  num("eta.factor", s.eta_factor);
  opt("eta.exponent", s.eta_exponent);
  strs("bc.u.faces", s.u_faces);
  poly("bc.u0", s.u0);
  strs("bc.v.faces", s.v_faces);
  boolean("init.notch", s.notch);
  integer("init.notch.axis", s.notch_axis);
  opt("init.notch.center", s.notch_center);
  num("init.notch.width", s.notch_width);
  num("init.notch.value", s.notch_value);
  num("solver.tol_rel", s.tol_rel);
  num("solver.inner_tol", s.inner_tol);
  integer("solver.max_outer", s.max_outer);
  integer("solver.max_inner", s.max_inner);
  if (auto v = get("solver.seed")) {
    try {
      s.seed = std::stoull(*v);
    } catch (...) {
      throw ConfigError("solver.seed: not an unsigned integer");
    }
  }
  boolean("solver.exact_v", s.exact_v);
  str("prediction", s.prediction);
  for (const auto& [k, v] : kv)
    if (k.rfind("template.", 0) == 0) s.has_template = true;
  num("template.plane", s.tpl_plane);
  nums("template.support.lo", s.tpl_support_lo);
  nums("template.support.hi", s.tpl_support_hi);
  poly("template.lower", s.tpl_lower);
  poly("template.upper", s.tpl_upper);
  num("template.lipschitz", s.tpl_lipschitz);
  num("limsup.divisor", s.limsup_divisor);
  num("limsup.snap", s.limsup_snap);
  integer("limsup.tangential_cells", s.limsup_tangential_cells);
  integer("limsup.max_cells", s.limsup_max_cells);
  integer("limsup.quad_res", s.limsup_quad_res);
  str("output.csv", s.out_csv);
  str("output.snapshot_dir", s.out_snapshot_dir);
  str("output.log", s.out_log);

  for (const auto& [k, v] : kv)
    if (!used.count(k)) throw ConfigError("unknown key '" + k + "'");
  s.validate();
  return s;
}

inline Scenario load_scenario(std::istream& is) { return scenario_from_kv(parse_kv(is)); }

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open scenario file '" + path + "'");
  return load_scenario(is);
}

/// Canonical text form; load(dump(s)) == s.
inline std::string dump_scenario(const Scenario& s) {
  using detail::fmt_double;
  using detail::join;
  std::ostringstream os;
  auto kv = [&](const std::string& k, const std::string& v) {
    if (!v.empty()) os << k << " = " << v << "\n";
  };
  auto poly = [&](const std::string& k, const PolySpec& p) {
    kv(k + ".constant", join(p.constant));
    kv(k + ".linear", join(p.linear));
    kv(k + ".quadratic", join(p.quadratic));
  };
  kv("dim", std::to_string(s.dim));
  kv("grid.extents", join(s.extents));
  kv("grid.cells", join(s.cells));
  kv("grid.cells_per_eps", fmt_double(s.cells_per_eps));
  kv("op.name", s.op_name);
  kv("op.matrix", join(s.op_matrix));
  kv("op.allow_non_c_elliptic", s.allow_non_c_elliptic ? "true" : "false");
  kv("bulk.p", fmt_double(s.p));
  kv("bulk.mu", fmt_double(s.mu));
  kv("bulk.lambda1", fmt_double(s.lambda1));
  kv("bulk.lambda2", fmt_double(s.lambda2));
  kv("psi.psi0", fmt_double(s.psi0));
  kv("psi.m", fmt_double(s.m));
  kv("reg.gamma", fmt_double(s.gamma));
  kv("reg.q", fmt_double(s.q));
  kv("eps.list", join(s.eps_list));
  kv("eps.start", fmt_double(s.eps_start));
  kv("eps.ratio", fmt_double(s.eps_ratio));
  kv("eps.count", std::to_string(s.eps_count));
  kv("eta.factor", fmt_double(s.eta_factor));
  if (s.eta_exponent) kv("eta.exponent", fmt_double(*s.eta_exponent));
  kv("bc.u.faces", join(s.u_faces));
  poly("bc.u0", s.u0);
  kv("bc.v.faces", join(s.v_faces));
  kv("init.notch", s.notch ? "true" : "false");
  kv("init.notch.axis", std::to_string(s.notch_axis));
  if (s.notch_center) kv("init.notch.center", fmt_double(*s.notch_center));
  kv("init.notch.width", fmt_double(s.notch_width));
  kv("init.notch.value", fmt_double(s.notch_value));
  kv("solver.tol_rel", fmt_double(s.tol_rel));
  kv("solver.inner_tol", fmt_double(s.inner_tol));
  kv("solver.max_outer", std::to_string(s.max_outer));
  kv("solver.max_inner", std::to_string(s.max_inner));
  kv("solver.seed", std::to_string(s.seed));
  kv("solver.exact_v", s.exact_v ? "true" : "false");
  kv("prediction", s.prediction);
  if (s.has_template) {
    kv("template.plane", fmt_double(s.tpl_plane));
    kv("template.support.lo", join(s.tpl_support_lo));
    kv("template.support.hi", join(s.tpl_support_hi));
    poly("template.lower", s.tpl_lower);
    poly("template.upper", s.tpl_upper);
    kv("template.lipschitz", fmt_double(s.tpl_lipschitz));
  }
  kv("limsup.divisor", fmt_double(s.limsup_divisor));
  kv("limsup.snap", fmt_double(s.limsup_snap));
  kv("limsup.tangential_cells", std::to_string(s.limsup_tangential_cells));
  kv("limsup.max_cells", std::to_string(s.limsup_max_cells));
  kv("limsup.quad_res", std::to_string(s.limsup_quad_res));
  kv("output.csv", s.out_csv);
  kv("output.snapshot_dir", s.out_snapshot_dir);
  kv("output.log", s.out_log);
  return os.str();
}

/// FNV-1a of the canonical dump, 16 hex digits.
inline std::string scenario_hash(const Scenario& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump_scenario(s)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pfgamma
