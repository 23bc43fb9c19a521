#pragma once

// Limit side: surface constants, the optimal transition profile, the layer
// widths and the explicit recovery pair for planar jump templates.

#include "pfgamma/bulk_density.hpp"
#include "pfgamma/energy.hpp"
#include "pfgamma/errors.hpp"
#include "pfgamma/grid.hpp"
#include "pfgamma/operator_algebra.hpp"
#include "pfgamma/polynomial.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace pfgamma {

/// eps-independent parameters of the limit problem.
struct StaticParams {
  double p = 2;
  double q = 2;
  double gamma = 1;
  PsiSpec psi;

  double q_conj() const { return q / (q - 1); }
  double p_conj() const { return p / (p - 1); }
  void validate() const {
    if (!(p > 1)) throw ConfigError("bulk.p must be > 1");
    if (!(q > 1)) throw ConfigError("reg.q must be > 1");
    if (!(gamma > 0)) throw ConfigError("reg.gamma must be > 0");
    psi.validate();
  }
};

struct LimitConstants {
  double a = 0;
  double b = 0;
  double psi_integral = 0;       // closed form of int_0^1 psi^{1/q'}
  double psi_integral_quad = 0;  // same by adaptive quadrature
};

inline LimitConstants limit_constants(const StaticParams& sp) {
  sp.validate();
  const double qc = sp.q_conj(), pc = sp.p_conj();
  LimitConstants c;
  c.psi_integral = std::pow(sp.psi.psi0, 1 / qc) / (sp.psi.m / qc + 1);
  boost::math::quadrature::tanh_sinh<double> ts;
  c.psi_integral_quad =
      ts.integrate([&](double s) { return std::pow(sp.psi(s), 1 / qc); }, 0.0, 1.0);
  c.a = 2 * std::pow(qc, 1 / qc) * std::pow(sp.gamma * sp.q, 1 / sp.q) * c.psi_integral;
  c.b = std::pow(sp.p, 1 / sp.p) * std::pow(pc, 1 / pc) * std::pow(sp.psi.psi0, 1 / sp.p);
  return c;
}

namespace detail {

// int_0^z (1-s)^{-r} ds
inline double power_primitive(double r, double z) {
  if (z <= 0) return 0;
  if (z >= 1) return r < 1 ? 1 / (1 - r) : std::numeric_limits<double>::infinity();
  if (r == 1) return -std::log1p(-z);
  return -std::expm1((1 - r) * std::log1p(-z)) / (1 - r);
}

// inverse of power_primitive in z
inline double power_primitive_inv(double r, double j) {
  if (j <= 0) return 0;
  if (r == 1) return -std::expm1(-j);
  if (r < 1) {
    const double inner = 1 - (1 - r) * j;
    if (inner <= 0) return 1;
    return -std::expm1(std::log(inner) / (1 - r));
  }
  return -std::expm1(-std::log1p((r - 1) * j) / (r - 1));
}

// int_0^{1-rho} (1-s)^{-r} ds, stable for tiny rho
inline double power_primitive_rho(double r, double rho) {
  if (r == 1) return -std::log(rho);
  return -std::expm1((1 - r) * std::log(rho)) / (1 - r);
}

}  // namespace detail

/// int_0^z psi^{-1/q}
inline double inverse_psi_integral(const StaticParams& sp, double z) {
  return std::pow(sp.psi.psi0, -1 / sp.q) * detail::power_primitive(sp.psi.m / sp.q, z);
}

/// Same by tanh-sinh quadrature (handles the endpoint singularity at 1).
inline double inverse_psi_integral_quad(const StaticParams& sp, double z) {
  if (z <= 0) return 0;
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate([&](double s) { return std::pow(sp.psi(s), -1 / sp.q); }, 0.0, z);
}

inline double h1(const StaticParams& sp, double rho) { return sp.psi(1 - rho); }
inline double h2(const StaticParams& sp, double rho) {
  return std::pow(sp.psi.psi0, 1 / sp.q) / detail::power_primitive_rho(sp.psi.m / sp.q, rho);
}
/// Geometric mean of h1 and h2; increasing with h(0+) = 0 and h(1-) = inf.
inline double h_of_rho(const StaticParams& sp, double rho) {
  const double lg = 0.5 * (std::log(sp.psi.psi0) + sp.psi.m * std::log(rho) +
                           std::log(std::pow(sp.psi.psi0, 1 / sp.q)) -
                           std::log(detail::power_primitive_rho(sp.psi.m / sp.q, rho)));
  return std::exp(lg);
}

/// rho with h(rho) = eps, by bisection in log(rho).
inline double rho_of_eps(const StaticParams& sp, double eps) {
  sp.validate();
  if (!(eps > 0) || !std::isfinite(eps))
    throw ConfigError("rho_of_eps: eps must be positive and finite");
  double lo = std::log(1e-300), hi = std::log1p(-1e-16);
  if (h_of_rho(sp, std::exp(hi)) < eps) throw ConfigError("rho_of_eps: eps out of range");
  for (int it = 0; it < 400 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (h_of_rho(sp, std::exp(mid)) < eps ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

/// Optimal profile: w is the inverse of t(z) = c eps int_0^z psi^{-1/q},
/// c = (gamma q / q')^{1/q}, tabulated at spacing eps/100 with cubic Hermite
/// interpolation through exact slopes.
class ProfileSolution {
 public:
  double eps = 0;
  double T = std::numeric_limits<double>::infinity();  // time at which w reaches 1
  double rho = 0;
  double tau = 0;                 // w(tau) = 1 - rho
  double cross_check_error = 0;   // closed form vs quadrature + bisection
  double dt = 0;
  std::vector<double> w, dw;

  double t_end() const { return dt * static_cast<double>(w.size() - 1); }

  double operator()(double t) const {
    if (t <= 0) return 0;
    if (t >= T) return 1;
    if (t >= t_end()) return exact_(t);
    const double s = t / dt;
    const auto k = std::min(static_cast<std::size_t>(s), w.size() - 2);
    const double x = s - static_cast<double>(k);
    const double h00 = (1 + 2 * x) * (1 - x) * (1 - x), h10 = x * (1 - x) * (1 - x);
    const double h01 = x * x * (3 - 2 * x), h11 = x * x * (x - 1);
    return h00 * w[k] + h10 * dt * dw[k] + h01 * w[k + 1] + h11 * dt * dw[k + 1];
  }

  double derivative(double t) const {
    if (t < 0 || t >= T) return 0;
    if (t >= t_end()) return slope_(exact_(t));
    const double s = t / dt;
    const auto k = std::min(static_cast<std::size_t>(s), w.size() - 2);
    const double x = s - static_cast<double>(k);
    const double d00 = 6 * x * x - 6 * x, d10 = 3 * x * x - 4 * x + 1;
    const double d01 = -d00, d11 = 3 * x * x - 2 * x;
    return (d00 * w[k] + d01 * w[k + 1]) / dt + d10 * dw[k] + d11 * dw[k + 1];
  }

  /// Slope of the inverse function at value z: 1 / t'(z).
  std::function<double(double)> slope_;
  std::function<double(double)> exact_;
};

inline double profile_scale(const StaticParams& sp) {
  return std::pow(sp.gamma * sp.q / sp.q_conj(), 1 / sp.q);
}

/// t(z) for the profile.
inline double profile_time(const StaticParams& sp, double eps, double z) {
  return profile_scale(sp) * eps * inverse_psi_integral(sp, z);
}

inline ProfileSolution optimal_profile(const StaticParams& sp, double eps, double t_min = 0) {
  sp.validate();
  if (!(eps > 0)) throw ConfigError("profile: eps must be > 0");
  const double r = sp.psi.m / sp.q;
  const double unit = profile_scale(sp) * eps * std::pow(sp.psi.psi0, -1 / sp.q);
  ProfileSolution ps;
  ps.eps = eps;
  ps.exact_ = [r, unit](double t) { return detail::power_primitive_inv(r, t / unit); };
  ps.slope_ = [sp, eps](double z) {
    return std::pow(sp.psi(z), 1 / sp.q) / (profile_scale(sp) * eps);
  };
  if (r < 1) ps.T = unit / (1 - r);
  ps.rho = rho_of_eps(sp, eps);
  ps.tau = unit * detail::power_primitive_rho(r, ps.rho);
  ps.dt = eps / 100;
  double t_end = std::max({ps.tau, 10 * eps, t_min}) * 1.05;
  if (std::isfinite(ps.T)) t_end = std::min(t_end, ps.T);
  const auto n = static_cast<std::size_t>(std::ceil(t_end / ps.dt));
  ps.w.resize(n + 1);
  ps.dw.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    ps.w[i] = ps.exact_(ps.dt * static_cast<double>(i));
    ps.dw[i] = ps.slope_(ps.w[i]);
  }
  // Fritsch-Carlson limiter keeps the interpolant monotone.
  for (std::size_t k = 0; k + 1 <= n; ++k) {
    const double delta = (ps.w[k + 1] - ps.w[k]) / ps.dt;
    if (delta == 0) {
      ps.dw[k] = ps.dw[k + 1] = 0;
      continue;
    }
    const double al = ps.dw[k] / delta, be = ps.dw[k + 1] / delta;
    const double s2 = al * al + be * be;
    if (s2 > 9) {
      const double tau = 3 / std::sqrt(s2);
      ps.dw[k] = tau * al * delta;
      ps.dw[k + 1] = tau * be * delta;
    }
  }
  // Independent evaluation at a few points: quadrature for t(z), bisection in z.
  const double c = profile_scale(sp) * eps;
  for (int s = 1; s <= 16; ++s) {
    const double t = t_end * s / 17;
    double lo = 0, hi = 1;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (c * inverse_psi_integral_quad(sp, mid) < t ? lo : hi) = mid;
    }
    ps.cross_check_error = std::max(ps.cross_check_error, std::abs(0.5 * (lo + hi) - ps(t)));
  }
  return ps;
}

struct ProfileResiduals {
  double ode = 0;          // |w' - rhs| with w' by finite differences of the table
  double calibration = 0;  // relative |alpha^q - beta^{q'}|
  double young_sum = 0;    // relative mismatch of: both terms sum to alpha * beta
};

/// Residual checks along the table up to t_stop.
inline ProfileResiduals profile_residuals(const ProfileSolution& ps, const StaticParams& sp,
                                          double t_stop) {
  ProfileResiduals res;
  const double eps = ps.eps, q = sp.q, qc = sp.q_conj();
  const double c = profile_scale(sp);
  const double top = std::min({t_stop, ps.t_end(), ps.T});
  for (std::size_t k = 2; k + 2 < ps.w.size() && ps.dt * static_cast<double>(k) <= top; ++k) {
    const double wv = ps.w[k];
    const double fd = (-ps.w[k + 2] + 8 * ps.w[k + 1] - 8 * ps.w[k - 1] + ps.w[k - 2]) / (12 * ps.dt);
    const double rhs = std::pow(qc / (sp.gamma * q), 1 / q) / eps * std::pow(sp.psi(wv), 1 / q);
    res.ode = std::max(res.ode, std::abs(fd - rhs));
    // slope through the inverse representation
    const double slope = std::pow(sp.psi(wv), 1 / q) / (c * eps);
    const double alpha_q = sp.gamma * q * std::pow(eps, q - 1) * std::pow(slope, q);
    const double beta_qc = qc * sp.psi(wv) / eps;
    const double scale = std::max(alpha_q, beta_qc);
    if (scale > 0) res.calibration = std::max(res.calibration, std::abs(alpha_q - beta_qc) / scale);
    const double lhs = sp.psi(wv) / eps + sp.gamma * std::pow(eps, q - 1) * std::pow(slope, q);
    const double rhs2 = std::pow(qc, 1 / qc) * std::pow(sp.gamma * q, 1 / q) *
                        std::pow(sp.psi(wv), 1 / qc) * slope;
    if (lhs > 0) res.young_sum = std::max(res.young_sum, std::abs(lhs - rhs2) / lhs);
  }
  return res;
}

/// Planar jump on {x_n = plane} across the box; smooth parts are polynomials.
struct JumpTemplate {
  struct Mismatch {
    Face face;
    PolyField datum;
  };

  int dim = 1;
  std::array<double, 3> extents{1, 1, 1};
  double plane = 0.5;
  std::array<double, 3> support_lo{0, 0, 0};  // tangential axes 0..n-2
  std::array<double, 3> support_hi{1, 1, 1};
  PolyField lower, upper;
  double lipschitz_L = 0;
  std::vector<Mismatch> boundary;

  int normal_axis() const { return dim - 1; }
  Eigen::VectorXd normal() const { return Eigen::VectorXd::Unit(dim, dim - 1); }

  bool in_support(const Eigen::VectorXd& x) const {
    for (int a = 0; a + 1 < dim; ++a)
      if (x(a) < support_lo[a] || x(a) > support_hi[a]) return false;
    return true;
  }

  /// [u](x') = upper - lower on the plane; zero off the support.
  Eigen::VectorXd jump(Eigen::VectorXd x) const {
    x(dim - 1) = plane;
    if (!in_support(x)) return Eigen::VectorXd::Zero(dim);
    return upper.value(x) - lower.value(x);
  }

  Eigen::VectorXd value(const Eigen::VectorXd& x) const {
    return x(dim - 1) >= plane ? upper.value(x) : lower.value(x);
  }

  /// Distance from x to the closed support rectangle inside the plane.
  double dist_to_support(const Eigen::VectorXd& x) const {
    double s = 0;
    for (int a = 0; a + 1 < dim; ++a) {
      const double d = std::max({support_lo[a] - x(a), 0.0, x(a) - support_hi[a]});
      s += d * d;
    }
    const double dn = x(dim - 1) - plane;
    return std::sqrt(s + dn * dn);
  }

  void validate(std::uint64_t seed = 7) const {
    require_dim(dim);
    if (lower.dim() != dim || upper.dim() != dim)
      throw ConfigError("template: smooth parts must have the template dimension");
    if (!(plane > 0 && plane < extents[dim - 1]))
      throw ConfigError("template.plane must lie strictly inside the box");
    for (int a = 0; a + 1 < dim; ++a)
      if (!(support_lo[a] >= 0 && support_hi[a] <= extents[a] && support_lo[a] < support_hi[a]))
        throw ConfigError("template.support must be a nonempty sub-rectangle of the box face");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0, 1);
    for (int s = 0; s < 2000; ++s) {
      Eigen::VectorXd x(dim);
      for (int a = 0; a < dim; ++a) x(a) = extents[a] * U(rng);
      const double gl = lower.gradient(x).operatorNorm();
      const double gu = upper.gradient(x).operatorNorm();
      if (gl > lipschitz_L * (1 + 1e-12) + 1e-14 || gu > lipschitz_L * (1 + 1e-12) + 1e-14)
        throw ConfigError("template.lipschitz is smaller than the gradient of a smooth part");
      x(dim - 1) = plane;
      if (!in_support(x) && (upper.value(x) - lower.value(x)).norm() > 1e-12)
        throw ConfigError("template: smooth parts disagree on the plane outside the support");
    }
  }
};

namespace detail {

/// 10-point Gauss-Legendre nodes and weights on [lo, hi] split into panels.
inline void gauss_nodes(double lo, double hi, int panels, std::vector<double>& x,
                        std::vector<double>& w) {
  using G = boost::math::quadrature::gauss<double, 10>;
  const auto& ab = G::abscissa();
  const auto& wt = G::weights();
  x.clear();
  w.clear();
  const double len = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * len, half = len / 2;
    for (std::size_t i = 0; i < ab.size(); ++i) {
      x.push_back(mid - half * ab[i]);
      w.push_back(half * wt[i]);
      if (ab[i] != 0) {
        x.push_back(mid + half * ab[i]);
        w.push_back(half * wt[i]);
      }
    }
  }
}

/// Tensor-product integral over the box [lo, hi] (dimension = lo.size(); 0 -> point value).
inline double tensor_integrate(const std::vector<double>& lo, const std::vector<double>& hi,
                               int panels, const std::function<double(const std::vector<double>&)>& f) {
  const std::size_t n = lo.size();
  if (n == 0) return f({});
  std::vector<std::vector<double>> xs(n), ws(n);
  for (std::size_t a = 0; a < n; ++a) gauss_nodes(lo[a], hi[a], panels, xs[a], ws[a]);
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> pt(n), vals;
  while (true) {
    double wgt = 1;
    for (std::size_t a = 0; a < n; ++a) {
      pt[a] = xs[a][idx[a]];
      wgt *= ws[a][idx[a]];
    }
    vals.push_back(wgt * f(pt));
    std::size_t a = 0;
    while (a < n && ++idx[a] == xs[a].size()) idx[a++] = 0;
    if (a == n) break;
  }
  return pairwise_sum(vals);
}

}  // namespace detail

struct LimitEnergy {
  double bulk = 0;
  double jump = 0;
  double boundary = 0;
  double total = 0;
};

/// Limit functional at v = 1 for a template: bulk by tensor Gauss quadrature
/// of the exact strains, jump and boundary parts by (n-1)-dimensional rules.
inline LimitEnergy limit_energy(const JumpTemplate& tpl, const FirstOrderOperator& op,
                                const BulkDensity& f, const StaticParams& sp, int quad_res = 4) {
  const int n = tpl.dim;
  const LimitConstants lc = limit_constants(sp);
  const Eigen::MatrixXd rest = Eigen::MatrixXd::Identity(sym_size(n), sym_size(n)) - op.a_matrix;
  LimitEnergy le;
  for (int side = 0; side < 2; ++side) {
    std::vector<double> lo(n, 0.0), hi(n);
    for (int a = 0; a < n; ++a) hi[a] = tpl.extents[a];
    (side == 0 ? hi : lo)[n - 1] = tpl.plane;
    const PolyField& part = side == 0 ? tpl.lower : tpl.upper;
    le.bulk += detail::tensor_integrate(lo, hi, quad_res, [&](const std::vector<double>& p) {
      const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(p.data(), n);
      const Eigen::VectorXd e = to_sym(part.sym_gradient(x));
      return f.eval(Eigen::VectorXd(op.a_matrix * e)) + f.eval(Eigen::VectorXd(rest * e));
    });
  }
  auto density = [&](const Eigen::VectorXd& d, const Eigen::VectorXd& nu) {
    if (d.norm() <= 1e-14) return 0.0;
    return lc.a + lc.b * surface_norm(f, op, d, nu);
  };
  {
    std::vector<double> lo, hi;
    for (int a = 0; a + 1 < n; ++a) {
      lo.push_back(tpl.support_lo[a]);
      hi.push_back(tpl.support_hi[a]);
    }
    le.jump = detail::tensor_integrate(lo, hi, quad_res, [&](const std::vector<double>& p) {
      Eigen::VectorXd x(n);
      for (int a = 0; a + 1 < n; ++a) x(a) = p[a];
      x(n - 1) = tpl.plane;
      return density(tpl.jump(x), tpl.normal());
    });
  }
  for (const auto& mm : tpl.boundary) {
    std::vector<double> lo, hi;
    for (int a = 0; a < n; ++a)
      if (a != mm.face.axis) {
        lo.push_back(0.0);
        hi.push_back(tpl.extents[a]);
      }
    Eigen::VectorXd nu = Eigen::VectorXd::Zero(n);
    nu(mm.face.axis) = mm.face.upper ? 1.0 : -1.0;
    le.boundary += detail::tensor_integrate(lo, hi, quad_res, [&](const std::vector<double>& p) {
      Eigen::VectorXd x(n);
      for (int a = 0, k = 0; a < n; ++a)
        x(a) = a == mm.face.axis ? (mm.face.upper ? tpl.extents[a] : 0.0) : p[k++];
      return density(tpl.value(x) - mm.datum.value(x), nu);
    });
  }
  le.total = le.bulk + le.jump + le.boundary;
  return le;
}

/// Half-width of the fully cracked layer above x'.
inline double sigma_at(const JumpTemplate& tpl, const StaticParams& sp, const BulkDensity& f,
                       const FirstOrderOperator& op, double eps, const Eigen::VectorXd& x) {
  const double pc = sp.p_conj();
  const double pref = eps / (2 * pc * std::pow(sp.psi.psi0, 1 / pc)) * std::pow(sp.p, 1 / sp.p) *
                      std::pow(pc, 1 / pc);
  return pref * surface_norm(f, op, tpl.jump(x), tpl.normal());
}

/// Nodal recovery pair (u_k, v_k). Columns with a zero jump are treated as
/// jump-free.
inline GridField build_recovery(const JumpTemplate& tpl, const StaticParams& sp,
                                const BulkDensity& f, const FirstOrderOperator& op, double eps,
                                const Grid& grid) {
  tpl.validate();
  const int n = tpl.dim;
  if (grid.dim != n) throw ConfigError("recovery grid dimension mismatch");
  const ProfileSolution prof = optimal_profile(sp, eps);
  GridField fld(grid);
  std::vector<double> sig(fld.nodes());
  double smin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < fld.nodes(); ++i) {
    const Eigen::VectorXd x = grid.node_coord(i);
    sig[i] = tpl.in_support(x) ? sigma_at(tpl, sp, f, op, eps, x) : 0.0;
    if (sig[i] > 0) smin = std::min(smin, sig[i]);
  }
  if (std::isfinite(smin) && grid.h(n - 1) > smin / 4 * (1 + 1e-9)) {
    const int need = static_cast<int>(std::ceil(grid.extents[n - 1] / (smin / 4)));
    throw ConfigError("recovery grid under-resolves the cracked layer: need at least " +
                      std::to_string(need) + " cells along the normal axis");
  }
  for (std::size_t i = 0; i < fld.nodes(); ++i) {
    const Eigen::VectorXd x = grid.node_coord(i);
    const double y = x(n - 1) - tpl.plane;
    const double s = sig[i];
    Eigen::VectorXd u;
    double d;
    if (s > 0) {
      if (std::abs(y) < s) {
        Eigen::VectorXd xm = x, xp = x;
        xm(n - 1) = tpl.plane - s;
        xp(n - 1) = tpl.plane + s;
        const double t = (y + s) / (2 * s);
        u = (1 - t) * tpl.lower.value(xm) + t * tpl.upper.value(xp);
      } else {
        u = tpl.value(x);
      }
      d = std::max(std::abs(y) - s, 0.0);
    } else {
      u = tpl.value(x);
      d = tpl.dist_to_support(x);
    }
    for (int c = 0; c < n; ++c) fld.u[i * n + c] = u(c);
    fld.v[i] = s > 0 && std::abs(y) < s ? 0.0 : d < prof.tau ? prof(d) : 1 - prof.rho;
  }
  return fld;
}

struct GridRule {
  double divisor = 4;  // h <= sigma_min / divisor near the plane
  double snap = 0.02;  // |sigma_min/h - round(sigma_min/h)| <= snap
  int tangential_cells = 0;  // > 0 overrides the uniform rule on tangential axes
  int max_cells = 8192;
};

/// Smallest positive sigma over the support (Gauss points of the support).
inline double sigma_min(const JumpTemplate& tpl, const StaticParams& sp, const BulkDensity& f,
                        const FirstOrderOperator& op, double eps) {
  const int n = tpl.dim;
  double smin = std::numeric_limits<double>::infinity();
  std::vector<double> lo, hi;
  for (int a = 0; a + 1 < n; ++a) {
    lo.push_back(tpl.support_lo[a]);
    hi.push_back(tpl.support_hi[a]);
  }
  detail::tensor_integrate(lo, hi, 4, [&](const std::vector<double>& p) {
    Eigen::VectorXd x(n);
    for (int a = 0; a + 1 < n; ++a) x(a) = p[a];
    x(n - 1) = tpl.plane;
    const double s = sigma_at(tpl, sp, f, op, eps, x);
    if (s > 0) smin = std::min(smin, s);
    return 0.0;
  });
  return smin;
}

inline Grid recovery_grid(const JumpTemplate& tpl, const StaticParams& sp, const BulkDensity& f,
                          const FirstOrderOperator& op, double eps, const GridRule& rule) {
  const int n = tpl.dim;
  const double smin = sigma_min(tpl, sp, f, op, eps);
  if (!std::isfinite(smin)) throw ConfigError("template has no nonzero jump");
  const double len = tpl.extents[n - 1];
  int cells = static_cast<int>(std::ceil(len * rule.divisor / smin));
  cells += cells % 2;
  auto off = [&](int c) {
    const double r = smin * c / len;
    return std::abs(r - std::round(r));
  };
  while (off(cells) > rule.snap && cells < rule.max_cells) cells += 2;
  if (cells > rule.max_cells) throw ConfigError("grid rule exceeds limsup.max_cells");
  const double h = len / cells;
  std::array<int, 3> c{1, 1, 1};
  for (int a = 0; a + 1 < n; ++a)
    c[a] = rule.tangential_cells > 0
               ? rule.tangential_cells
               : std::max(1, static_cast<int>(std::ceil(tpl.extents[a] / h - 1e-9)));
  c[n - 1] = cells;
  return Grid(n, tpl.extents, c);
}

struct LimsupRow {
  double eps = 0;
  int cells = 0;  // along the normal axis
  EnergyBreakdown energy;
  double layer_psi = 0;      // psi term over cells centered in the cracked layer
  double transition = 0;     // psi + gradient terms over the remaining cells
  double d_limit = 0;
  double ratio = 0;
};

inline std::vector<LimsupRow> limsup_check(const JumpTemplate& tpl, const StaticParams& sp,
                                           const BulkDensity& f, const FirstOrderOperator& op,
                                           const std::function<double(double)>& eta_of_eps,
                                           const std::vector<double>& eps_list,
                                           const GridRule& rule = {}) {
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw ConfigError("eps list must be strictly decreasing");
  const double dlim = limit_energy(tpl, op, f, sp).total;
  std::vector<LimsupRow> rows;
  for (double eps : eps_list) {
    const Grid g = recovery_grid(tpl, sp, f, op, eps, rule);
    const GridField fld = build_recovery(tpl, sp, f, op, eps, g);
    const EpsParams prm{eps, eta_of_eps(eps), sp.gamma, sp.q, sp.psi};
    LimsupRow row;
    row.eps = eps;
    row.cells = g.cells[g.dim - 1];
    row.energy = assemble_energy(fld, prm, op, f);
    dispatch_dim(g.dim, [&](auto dc) {
      constexpr int D = decltype(dc)::value;
      const EnergyModel<D> m(g, prm, op, f);
      std::vector<double> lay, tr;
      for (std::size_t c = 0; c < m.cells(); ++c) {
        const auto nd = m.cell_nodes(c);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(D);
        for (auto node : nd) x += g.node_coord(node);
        x /= static_cast<double>(nd.size());
        const double s = sigma_at(tpl, sp, f, op, eps, x);
        const auto t = m.cell_terms(c, fld.u, fld.v);
        if (s > 0 && std::abs(x(D - 1) - tpl.plane) < s)
          lay.push_back(t[2]);
        else
          tr.push_back(t[2] + t[3]);
      }
      row.layer_psi = pairwise_sum(lay);
      row.transition = pairwise_sum(tr);
    });
    row.d_limit = dlim;
    row.ratio = row.energy.total / dlim;
    rows.push_back(row);
  }
  return rows;
}

struct BarMinimum {
  double value = 0;
  double jump = 0;  // 0 on the elastic branch
  double elastic = 0;
  double cracked = 0;
};

/// Minimum of the limit functional for a 1D bar (0, L) with u(0) = 0,
/// u(L) = delta: min over the jump J of L f((delta - J)/L) + [J != 0](a + b |J|_f).
inline BarMinimum bar_limit_minimum(const StaticParams& sp, const BulkDensity& f, double delta,
                                    double length = 1) {
  if (f.hooke.dim != 1) throw ConfigError("bar oracle needs a 1D density");
  const LimitConstants lc = limit_constants(sp);
  const FirstOrderOperator op = FirstOrderOperator::full_strain(1);
  auto bulk = [&](double s) { return length * f.eval(Eigen::Matrix<double, 1, 1>(s / length)); };
  auto sn = [&](double j) {
    return surface_norm(f, op, Eigen::VectorXd::Constant(1, j), Eigen::VectorXd::Constant(1, 1.0));
  };
  BarMinimum bm;
  bm.elastic = bulk(delta);
  const double sgn = delta >= 0 ? 1.0 : -1.0;
  auto phi = [&](double j) { return bulk(delta - sgn * j) + lc.a + lc.b * sn(sgn * j); };
  const auto r = boost::math::tools::brent_find_minima(phi, 0.0, std::abs(delta), 52);
  bm.cracked = std::min(r.second, phi(std::abs(delta)));
  const double jopt = phi(std::abs(delta)) < r.second ? std::abs(delta) : r.first;
  if (bm.cracked < bm.elastic && delta != 0) {
    bm.value = bm.cracked;
    bm.jump = sgn * jopt;
  } else {
    bm.value = bm.elastic;
  }
  return bm;
}

}  // namespace pfgamma
