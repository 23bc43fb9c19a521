#pragma once

// Alternating minimization of the discrete energy. Both subproblems are
// convex; the u-step is (preconditioned) conjugate gradients, the v-step a
// box-constrained solve on [0, 1].

#include "pfgamma/energy.hpp"
#include "pfgamma/errors.hpp"
#include "pfgamma/grid.hpp"
#include "pfgamma/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace pfgamma {

struct SolverConfig {
  double tol_rel = 1e-10;
  int max_outer = 5000;
  int max_inner = 20000;
  double inner_tol = 1e-10;  // absolute, on the (projected) gradient norm
  std::uint64_t seed = 1;
  bool exact_v = true;  // active-set path for quadratic v-subproblems
  std::string log_path;  // per-iteration CSV, empty = off
  std::string log_header;  // comment line written first, without the leading '#'
  std::string abort_snapshot;  // written before a NumericalAbort, empty = off

  void validate() const {
    if (!(tol_rel > 0)) throw ConfigError("solver.tol_rel must be > 0");
    if (max_outer < 1) throw ConfigError("solver.max_outer must be >= 1");
    if (max_inner < 1) throw ConfigError("solver.max_inner must be >= 1");
    if (!(inner_tol > 0)) throw ConfigError("solver.inner_tol must be > 0");
  }
};

struct InnerStats {
  int iterations = 0;
  double grad_norm = 0;
};

struct OuterRecord {
  int iter = 0;
  EnergyBreakdown energy;
  double grad_u_norm = 0;
  double grad_v_norm = 0;  // projected
  int inner_u = 0;
  int inner_v = 0;
};

struct SolveHistory {
  EnergyBreakdown initial;
  std::vector<OuterRecord> records;
  bool converged = false;
};

namespace detail {

inline void check_finite(double e, const GridField& fld, const SolverConfig& cfg,
                         const char* where) {
  if (std::isfinite(e)) return;
  std::string msg = std::string("non-finite energy in ") + where;
  if (!cfg.abort_snapshot.empty()) {
    std::ofstream os(cfg.abort_snapshot);
    write_snapshot(os, fld);
    msg += "; snapshot written to " + cfg.abort_snapshot;
  }
  throw NumericalAbort(msg);
}

inline void mask(std::vector<double>& g, const std::vector<char>& pinned, int comps) {
  for (std::size_t i = 0; i < pinned.size(); ++i)
    if (pinned[i])
      for (int c = 0; c < comps; ++c) g[i * comps + c] = 0;
}

template <int D>
InnerStats minimize_u_impl(const EnergyModel<D>& m, GridField& fld, const SolverConfig& cfg) {
  const std::size_t n = fld.u.size();
  std::vector<double>& u = fld.u;
  auto grad = [&](std::span<const double> x, std::vector<double>& g) {
    m.gradient_u(x, fld.v, g);
    mask(g, fld.pin_u, D);
  };
  std::vector<double> g, diag;
  grad(u, g);
  InnerStats st;
  st.grad_norm = norm2(g);
  if (!std::isfinite(st.grad_norm)) check_finite(st.grad_norm, fld, cfg, "u-step gradient");
  if (st.grad_norm <= cfg.inner_tol) return st;
  const double floor = 1e-14 * st.grad_norm;

  auto precond = [&](const std::vector<double>& r, std::vector<double>& z) {
    z.resize(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = diag[i] > 0 ? r[i] / diag[i] : r[i];
  };
  m.diagonal_u(u, fld.v, diag);

  if (m.density().p == 2.0) {
    // Quadratic: the gradient is linear in u, so H d = gradient(d).
    std::vector<double> r(n), z, p(n), ap;
    for (std::size_t i = 0; i < n; ++i) r[i] = -g[i];
    precond(r, z);
    p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= cfg.max_inner; ++it) {
      grad(p, ap);
      const double pap = dot(p, ap);
      if (!(pap > 0)) break;
      const double alpha = rz / pap;
      for (std::size_t i = 0; i < n; ++i) {
        u[i] += alpha * p[i];
        r[i] -= alpha * ap[i];
      }
      st.iterations = it;
      if (it % 50 == 0) {
        grad(u, g);
        for (std::size_t i = 0; i < n; ++i) r[i] = -g[i];
      }
      const double rn = norm2(r);
      if (rn <= cfg.inner_tol || rn <= floor) break;
      precond(r, z);
      const double rz_new = dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    grad(u, g);
    st.grad_norm = norm2(g);
    return st;
  }

  // Nonlinear CG, Polak-Ribiere+, exact-ish line search on the directional derivative.
  std::vector<double> s, d(n), trial(n), gt;
  precond(g, s);
  for (std::size_t i = 0; i < n; ++i) d[i] = -s[i];
  double gs = dot(g, s);
  double alpha0 = 1.0;
  for (int it = 1; it <= cfg.max_inner; ++it) {
    const double d0 = dot(g, d);
    if (!(d0 < 0)) {
      for (std::size_t i = 0; i < n; ++i) d[i] = -s[i];
      continue;
    }
    auto dphi = [&](double a) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + a * d[i];
      grad(trial, gt);
      return dot(gt, d);
    };
    double lo = 0, flo = d0, hi = alpha0, fhi = dphi(hi);
    for (int k = 0; k < 60 && fhi < 0; ++k) {
      lo = hi;
      flo = fhi;
      hi *= 2;
      fhi = dphi(hi);
    }
    double a = hi, fa = fhi;
    int side = 0;
    for (int k = 0; k < 60 && std::abs(fa) > 1e-3 * std::abs(d0); ++k) {
      a = (lo * fhi - hi * flo) / (fhi - flo);
      if (!(a > lo && a < hi)) a = 0.5 * (lo + hi);
      fa = dphi(a);
      if (fa < 0) {
        lo = a;
        flo = fa;
        if (side == -1) fhi /= 2;
        side = -1;
      } else {
        hi = a;
        fhi = fa;
        if (side == 1) flo /= 2;
        side = 1;
      }
    }
    // trial and gt hold the last probe, which is at a
    u.swap(trial);
    g.swap(gt);
    alpha0 = a;
    st.iterations = it;
    st.grad_norm = norm2(g);
    if (!std::isfinite(st.grad_norm)) check_finite(st.grad_norm, fld, cfg, "u-step");
    if (st.grad_norm <= cfg.inner_tol || st.grad_norm <= floor) break;
    if (it % 20 == 0) m.diagonal_u(u, fld.v, diag);
    std::vector<double> s_new;
    precond(g, s_new);
    double num = 0;
    {
      std::vector<double> diff(n);
      for (std::size_t i = 0; i < n; ++i) diff[i] = s_new[i] - s[i];
      num = dot(g, diff);
    }
    const double beta = std::max(0.0, num / gs);
    s.swap(s_new);
    gs = dot(g, s);
    for (std::size_t i = 0; i < n; ++i) d[i] = -s[i] + beta * d[i];
  }
  return st;
}

/// Projected-gradient norm |P(v - g) - v| over free nodes.
inline double projected_norm(const std::vector<double>& v, const std::vector<double>& g,
                             const std::vector<char>& pin) {
  std::vector<double> pg(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!pin[i]) pg[i] = std::clamp(v[i] - g[i], 0.0, 1.0) - v[i];
  return norm2(pg);
}

template <int D>
struct VProblem {
  const EnergyModel<D>& m;
  const std::vector<char>& pin;
  std::vector<double> fa, fr;

  double energy(std::span<const double> v) const { return m.energy_with_bulk(fa, fr, v).total; }
  void grad(std::span<const double> v, std::vector<double>& g) const {
    m.gradient_v_with_bulk(fa, fr, v, g);
    mask(g, pin, 1);
  }
};

// Spectral projected gradient with monotone Armijo backtracking.
template <int D>
InnerStats spg(const VProblem<D>& P, std::vector<double>& v, const SolverConfig& cfg) {
  const std::size_t n = v.size();
  std::vector<double> g, gn, vn(n), d(n);
  P.grad(v, g);
  double e = P.energy(v);
  InnerStats st;
  st.grad_norm = projected_norm(v, g, P.pin);
  double gmax = 0;
  for (double x : g) gmax = std::max(gmax, std::abs(x));
  double alpha = gmax > 0 ? 1.0 / gmax : 1.0;
  for (int it = 1; it <= cfg.max_inner && st.grad_norm > cfg.inner_tol; ++it) {
    for (std::size_t i = 0; i < n; ++i)
      d[i] = P.pin[i] ? 0.0 : std::clamp(v[i] - alpha * g[i], 0.0, 1.0) - v[i];
    const double gd = dot(g, d);
    if (!(gd < 0)) break;
    double t = 1.0, en = 0;
    for (int k = 0; k < 60; ++k) {
      for (std::size_t i = 0; i < n; ++i) vn[i] = v[i] + t * d[i];
      en = P.energy(vn);
      if (en <= e + 1e-4 * t * gd) break;
      t /= 2;
    }
    if (!(en <= e)) break;
    P.grad(vn, gn);
    double ss = 0, sy = 0;
    {
      std::vector<double> s2(n), y2(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double si = vn[i] - v[i], yi = gn[i] - g[i];
        s2[i] = si * si;
        y2[i] = si * yi;
      }
      ss = pairwise_sum(s2);
      sy = pairwise_sum(y2);
    }
    alpha = sy > 0 ? std::clamp(ss / sy, 1e-14, 1e14) : std::min(alpha * 4, 1e14);
    v.swap(vn);
    g.swap(gn);
    const double de = e - en;
    e = en;
    st.iterations = it;
    st.grad_norm = projected_norm(v, g, P.pin);
    if (de <= 1e-16 * std::max(1.0, std::abs(e)) && t < 1e-12) break;
  }
  return st;
}

// Primal-dual active set for the quadratic case; free-set solves by Jacobi CG.
template <int D>
InnerStats active_set(const VProblem<D>& P, std::vector<double>& v, const SolverConfig& cfg) {
  const std::size_t n = v.size();
  std::vector<double> diag, g0, g, zero(n, 0.0);
  P.m.diagonal_v(diag);
  P.m.gradient_v_with_bulk(P.fa, P.fr, zero, g0);  // g(v) = H v + g0
  auto hess = [&](const std::vector<double>& x, std::vector<double>& out) {
    P.m.gradient_v_with_bulk(P.fa, P.fr, x, out);
    for (std::size_t i = 0; i < n; ++i) out[i] -= g0[i];
  };
  std::vector<signed char> state(n, 2), prev;  // -1 at 0, +1 at 1, 0 free
  InnerStats st;
  for (int outer = 0; outer < 60; ++outer) {
    P.m.gradient_v_with_bulk(P.fa, P.fr, v, g);
    prev = state;
    for (std::size_t i = 0; i < n; ++i) {
      if (P.pin[i]) {
        state[i] = 1;
        continue;
      }
      const double pred = v[i] - g[i] / diag[i];
      state[i] = pred < 0 ? -1 : pred > 1 ? 1 : 0;
    }
    if (state == prev) break;
    for (std::size_t i = 0; i < n; ++i)
      if (state[i] != 0) v[i] = state[i] > 0 ? 1.0 : 0.0;
    // CG on the free set.
    P.m.gradient_v_with_bulk(P.fa, P.fr, v, g);
    std::vector<double> r(n, 0.0), z(n, 0.0), p, hp;
    for (std::size_t i = 0; i < n; ++i)
      if (state[i] == 0) r[i] = -g[i];
    const double floor = 1e-14 * norm2(r);
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    p = z;
    double rz = dot(r, z);
    for (int it = 0; it < cfg.max_inner && norm2(r) > std::max(cfg.inner_tol * 1e-2, floor);
         ++it) {
      hess(p, hp);
      for (std::size_t i = 0; i < n; ++i)
        if (state[i] != 0) hp[i] = 0;
      const double php = dot(p, hp);
      if (!(php > 0)) break;
      const double a = rz / php;
      for (std::size_t i = 0; i < n; ++i) {
        v[i] += a * p[i];
        r[i] -= a * hp[i];
      }
      ++st.iterations;
      for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
      const double rz2 = dot(r, z);
      const double b = rz2 / rz;
      rz = rz2;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + b * p[i];
    }
  }
  for (std::size_t i = 0; i < n; ++i) v[i] = P.pin[i] ? 1.0 : std::clamp(v[i], 0.0, 1.0);
  return st;
}

template <int D>
InnerStats minimize_v_impl(const EnergyModel<D>& m, GridField& fld, const SolverConfig& cfg) {
  VProblem<D> P{m, fld.pin_v, {}, {}};
  m.bulk_values(fld.u, P.fa, P.fr);
  for (std::size_t i = 0; i < fld.nodes(); ++i)
    fld.v[i] = fld.pin_v[i] ? 1.0 : std::clamp(fld.v[i], 0.0, 1.0);
  const double e_in = P.energy(fld.v);
  check_finite(e_in, fld, cfg, "v-step");
  const auto& prm = m.params();
  const bool quadratic = prm.q == 2.0 && (prm.psi.m == 2.0 || prm.psi.m == 1.0);
  std::vector<double> v = fld.v;
  InnerStats st;
  if (quadratic && cfg.exact_v) {
    st = active_set(P, v, cfg);
    const InnerStats pol = spg(P, v, cfg);
    st.iterations += pol.iterations;
    st.grad_norm = pol.grad_norm;
  } else {
    st = spg(P, v, cfg);
  }
  const double e_out = P.energy(v);
  check_finite(e_out, fld, cfg, "v-step");
  if (e_out <= e_in) {
    fld.v.swap(v);
  } else {
    std::vector<double> g;
    P.grad(fld.v, g);
    st.grad_norm = projected_norm(fld.v, g, fld.pin_v);
  }
  return st;
}

}  // namespace detail

inline InnerStats minimize_u(GridField& fld, const EpsParams& prm, const FirstOrderOperator& op,
                             const BulkDensity& f, const SolverConfig& cfg) {
  cfg.validate();
  return dispatch_dim(fld.grid.dim, [&](auto dc) {
    const EnergyModel<decltype(dc)::value> m(fld.grid, prm, op, f);
    return detail::minimize_u_impl(m, fld, cfg);
  });
}

inline InnerStats minimize_v(GridField& fld, const EpsParams& prm, const FirstOrderOperator& op,
                             const BulkDensity& f, const SolverConfig& cfg) {
  cfg.validate();
  return dispatch_dim(fld.grid.dim, [&](auto dc) {
    const EnergyModel<decltype(dc)::value> m(fld.grid, prm, op, f);
    return detail::minimize_v_impl(m, fld, cfg);
  });
}

/// Writes text to path via a temporary file and rename.
inline void write_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot open output file '" + path + "'");
    os << text;
    if (!os) throw ConfigError("write failed for '" + path + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw ConfigError("cannot rename temporary file onto '" + path + "'");
}

inline std::string history_csv(const SolveHistory& h, const std::string& header) {
  std::ostringstream os;
  if (!header.empty()) os << "# " << header << "\n";
  os << "iter,E_total,E_A,E_rest,E_psi,E_gradv,grad_u,grad_v\n";
  for (const auto& r : h.records)
    os << r.iter << ',' << detail::fmt_double(r.energy.total) << ','
       << detail::fmt_double(r.energy.term_A) << ',' << detail::fmt_double(r.energy.term_rest)
       << ',' << detail::fmt_double(r.energy.term_psi) << ','
       << detail::fmt_double(r.energy.term_gradv) << ',' << detail::fmt_double(r.grad_u_norm)
       << ',' << detail::fmt_double(r.grad_v_norm) << '\n';
  return os.str();
}

/// Alternates u- and v-steps until |E_k - E_{k-1}| <= tol_rel max(E_k, 1).
inline SolveHistory alternate_minimize(GridField& fld, const EpsParams& prm,
                                       const FirstOrderOperator& op, const BulkDensity& f,
                                       const SolverConfig& cfg) {
  cfg.validate();
  if (!fld.feasible()) throw ConfigError("initial field violates 0 <= v <= 1 or v pins");
  SolveHistory hist;
  dispatch_dim(fld.grid.dim, [&](auto dc) {
    constexpr int D = decltype(dc)::value;
    const EnergyModel<D> m(fld.grid, prm, op, f);
    hist.initial = m.energy(fld.u, fld.v);
    detail::check_finite(hist.initial.total, fld, cfg, "initial state");
    double prev = hist.initial.total;
    for (int k = 1; k <= cfg.max_outer; ++k) {
      OuterRecord rec;
      rec.iter = k;
      try {
        rec.inner_u = detail::minimize_u_impl(m, fld, cfg).iterations;
        rec.inner_v = detail::minimize_v_impl(m, fld, cfg).iterations;
      } catch (const NumericalAbort&) {
        if (!cfg.log_path.empty()) write_atomic(cfg.log_path, history_csv(hist, cfg.log_header));
        throw;
      }
      rec.energy = m.energy(fld.u, fld.v);
      std::vector<double> g;
      m.gradient_u(fld.u, fld.v, g);
      detail::mask(g, fld.pin_u, D);
      rec.grad_u_norm = norm2(g);
      m.gradient_v(fld.u, fld.v, g);
      detail::mask(g, fld.pin_v, 1);
      rec.grad_v_norm = detail::projected_norm(fld.v, g, fld.pin_v);
      hist.records.push_back(rec);
      detail::check_finite(rec.energy.total, fld, cfg, "outer iteration");
      const double e = rec.energy.total;
      if (std::abs(e - prev) <= cfg.tol_rel * std::max(e, 1.0)) {
        hist.converged = true;
        break;
      }
      prev = e;
    }
  });
  if (!cfg.log_path.empty()) write_atomic(cfg.log_path, history_csv(hist, cfg.log_header));
  return hist;
}

// Continuation in eps.

struct NotchSpec {
  bool enabled = true;
  int axis = -1;  // -1: last axis
  double center = std::numeric_limits<double>::quiet_NaN();  // NaN: mid-box
  double width = 0;  // in units of eps; 0 = the single node plane nearest the center
  double value = 0.5;
};

/// Sets v = value on the notch band (unpinned nodes only).
inline void apply_notch(GridField& fld, const NotchSpec& ns, double eps) {
  const Grid& g = fld.grid;
  const int axis = ns.axis < 0 ? g.dim - 1 : ns.axis;
  if (axis >= g.dim) throw ConfigError("init.notch.axis out of range");
  const double c = std::isnan(ns.center) ? g.extents[axis] / 2 : ns.center;
  const int nearest = static_cast<int>(std::lround(c / g.h(axis)));
  for (std::size_t i = 0; i < fld.nodes(); ++i) {
    if (fld.pin_v[i]) continue;
    const int idx = g.node_ijk(i)[axis];
    const bool hit = ns.width > 0 ? std::abs(idx * g.h(axis) - c) <= ns.width * eps / 2 + 1e-12 * g.h(axis)
                                  : idx == nearest;
    if (hit) fld.v[i] = ns.value;
  }
}

struct SweepSpec {
  Grid grid;                 // extents and (when cells_per_eps == 0) the cell counts
  double cells_per_eps = 0;  // > 0: h = eps / cells_per_eps on every axis
  FirstOrderOperator op;
  BulkDensity density;
  double gamma = 1;
  double q = 2;
  PsiSpec psi;
  double eta_factor = 1;
  double eta_exponent = std::numeric_limits<double>::quiet_NaN();  // NaN: p
  std::vector<Face> u_faces;
  PolyField u0;
  std::vector<Face> v_faces;
  NotchSpec notch;
  std::optional<double> prediction;
  bool timing = true;

  double eta(double eps) const {
    const double ex = std::isnan(eta_exponent) ? density.p : eta_exponent;
    return eta_factor * std::pow(eps, ex);
  }
  EpsParams params(double eps) const { return {eps, eta(eps), gamma, q, psi}; }
  Grid grid_for(double eps) const {
    if (cells_per_eps <= 0) return grid;
    std::array<int, 3> c = grid.cells;
    for (int a = 0; a < grid.dim; ++a)
      c[a] = std::max(1, static_cast<int>(std::lround(grid.extents[a] * cells_per_eps / eps)));
    return Grid(grid.dim, grid.extents, c);
  }
  GridField blank(const Grid& g) const {
    GridField fld(g);
    fld.pin_u_faces(u_faces, u0);
    fld.pin_v_faces(v_faces);
    return fld;
  }
};

struct SweepRow {
  double eps = 0;
  double eta = 0;
  EnergyBreakdown energy;
  SublevelDiagnostics diag;
  std::optional<double> prediction;
  double runtime_s = 0;
  double energy_warm = 0;   // continuation branch
  double energy_notch = 0;  // notched restart, NaN when disabled
  int outer_warm = 0;
  int outer_notch = 0;
  GridField field;
};

/// Elastic start: v = 1 off the notch (if any), u minimizing the u-step.
inline GridField elastic_start(const SweepSpec& sp, const Grid& g, const EpsParams& prm,
                               const SolverConfig& cfg, bool notched) {
  GridField fld = sp.blank(g);
  if (notched) apply_notch(fld, sp.notch, prm.eps);
  minimize_u(fld, prm, sp.op, sp.density, cfg);
  return fld;
}

/// Warm-started continuation over a strictly decreasing eps list. Each eps is
/// solved from the previous minimizer and, if enabled, from a notched elastic
/// start; the lower-energy branch is kept. on_row sees each finished row.
inline std::vector<SweepRow> eps_sweep(
    const SweepSpec& sp, const std::vector<double>& eps_list, const SolverConfig& cfg,
    const std::function<void(const SweepRow&)>& on_row = {}) {
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw ConfigError("eps list must be strictly decreasing");
  if (sp.u_faces.empty()) throw ConfigError("at least one Dirichlet face for u is required");
  std::vector<SweepRow> rows;
  std::optional<GridField> prev;
  for (double eps : eps_list) {
    const auto t0 = std::chrono::steady_clock::now();
    const EpsParams prm = sp.params(eps);
    const Grid g = sp.grid_for(eps);
    SweepRow row;
    row.eps = eps;
    row.eta = prm.eta;
    GridField warm = sp.blank(g);
    if (prev) {
      resample_into(*prev, warm);
    } else {
      warm = elastic_start(sp, g, prm, cfg, false);
    }
    row.outer_warm =
        static_cast<int>(alternate_minimize(warm, prm, sp.op, sp.density, cfg).records.size());
    row.energy_warm = assemble_energy(warm, prm, sp.op, sp.density).total;
    row.energy_notch = std::numeric_limits<double>::quiet_NaN();
    GridField best = std::move(warm);
    if (sp.notch.enabled) {
      GridField notch = elastic_start(sp, g, prm, cfg, true);
      row.outer_notch =
          static_cast<int>(alternate_minimize(notch, prm, sp.op, sp.density, cfg).records.size());
      row.energy_notch = assemble_energy(notch, prm, sp.op, sp.density).total;
      if (row.energy_notch < row.energy_warm) best = std::move(notch);
    }
    row.energy = assemble_energy(best, prm, sp.op, sp.density);
    row.diag = sublevel_diagnostics(best, prm, sp.op, sp.density);
    row.prediction = sp.prediction;
    prev = best;
    row.field = std::move(best);
    row.runtime_s = sp.timing ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
                              : 0.0;
    if (on_row) on_row(row);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows, const std::string& header) {
  std::ostringstream os;
  using detail::fmt_double;
  if (!header.empty()) os << "# " << header << "\n";
  os << "eps,eta,E_total,E_A,E_rest,E_psi,E_gradv,a_variation,psi_mass,D_limit_prediction,runtime_s\n";
  for (const auto& r : rows) {
    os << fmt_double(r.eps) << ',' << fmt_double(r.eta) << ',' << fmt_double(r.energy.total)
       << ',' << fmt_double(r.energy.term_A) << ',' << fmt_double(r.energy.term_rest) << ','
       << fmt_double(r.energy.term_psi) << ',' << fmt_double(r.energy.term_gradv) << ','
       << fmt_double(r.diag.a_variation) << ',' << fmt_double(r.diag.psi_mass) << ','
       << (r.prediction ? fmt_double(*r.prediction) : std::string()) << ','
       << fmt_double(r.runtime_s) << '\n';
  }
  return os.str();
}

}  // namespace pfgamma
