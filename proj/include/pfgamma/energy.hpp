#pragma once

// Discrete phase-field energy on Q1 grids with one-point (cell-center)
// quadrature:
//   sum_cells vol * [ (vb + eps^{p-1}) f(A e) + (vb + eta) f(e - A e)
//                     + psi(vb)/eps + gamma eps^{q-1} |grad v|^q ]
// where vb is the corner average of v and e, grad v are taken at the center.

#include "pfgamma/bulk_density.hpp"
#include "pfgamma/errors.hpp"
#include "pfgamma/grid.hpp"
#include "pfgamma/operator_algebra.hpp"
#include "pfgamma/parallel.hpp"
#include "pfgamma/sym.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace pfgamma {

/// psi(v) = psi0 (1 - v)^m
struct PsiSpec {
  double psi0 = 1.0;
  double m = 2.0;

  void validate() const {
    if (!(psi0 > 0) || !std::isfinite(psi0)) throw ConfigError("psi.psi0 must be > 0");
    if (!(m >= 1) || !std::isfinite(m)) throw ConfigError("psi.m must be >= 1");
  }
  double operator()(double v) const {
    const double s = std::max(1.0 - v, 0.0);
    if (m == 2.0) return psi0 * s * s;
    if (m == 1.0) return psi0 * s;
    return psi0 * std::pow(s, m);
  }
  double deriv(double v) const {
    const double s = std::max(1.0 - v, 0.0);
    if (m == 2.0) return -2.0 * psi0 * s;
    if (m == 1.0) return -psi0;
    return -m * psi0 * std::pow(s, m - 1);
  }
  bool operator==(const PsiSpec&) const = default;
};

struct EpsParams {
  double eps = 0.1;
  double eta = 0.01;
  double gamma = 1.0;
  double q = 2.0;
  PsiSpec psi;

  void validate() const {
    if (!(eps > 0) || !std::isfinite(eps)) throw ConfigError("eps must be > 0");
    if (!(eta > 0) || !std::isfinite(eta)) throw ConfigError("eta must be > 0");
    if (!(gamma > 0) || !std::isfinite(gamma)) throw ConfigError("reg.gamma must be > 0");
    if (!(q > 1) || !std::isfinite(q)) throw ConfigError("reg.q must be > 1");
    psi.validate();
  }
};

struct EnergyBreakdown {
  double term_A = 0;
  double term_rest = 0;
  double term_psi = 0;
  double term_gradv = 0;
  double total = 0;
};

struct SublevelDiagnostics {
  double a_variation = 0;  // integral of |A e(u)|
  double psi_mass = 0;     // integral of psi(v)
  double energy = 0;
};

/// Dimension-specialized kernels shared by the energy and the solvers.
template <int D>
class EnergyModel {
 public:
  static constexpr int K = 1 << D;  // corners per cell
  static constexpr int S = sym_size(D);
  using VecD = Vec<D>;
  using MatD = Mat<D>;
  using SV = SymVec<D>;
  using Cells = std::array<std::size_t, K>;

  EnergyModel(const Grid& g, const EpsParams& prm, const FirstOrderOperator& op,
              const BulkDensity& f)
      : grid_(g), prm_(prm), f_(f) {
    if (g.dim != D || op.dim != D || f.hooke.dim != D)
      throw ConfigError("grid, operator and bulk density dimensions disagree");
    prm.validate();
    a_ = op.a_matrix;
    r_ = SymMat<D>::Identity() - a_;
    vol_ = g.cell_volume();
    eps_floor_ = std::pow(prm.eps, f.p - 1);
    gv_coef_ = prm.gamma * std::pow(prm.eps, prm.q - 1);
    for (int c = 0; c < K; ++c) {
      int off = 0, stride = 1;
      for (int a = 0; a < D; ++a) {
        const int bit = (c >> a) & 1;
        off += bit * stride;
        stride *= g.nodes_along(a);
        double w = 1.0;
        for (int b = 0; b < D; ++b)
          w *= b == a ? (bit ? 1.0 : -1.0) / g.h(b) : 0.5;
        dn_(a, c) = w;
      }
      offset_[c] = static_cast<std::size_t>(off);
    }
  }

  const Grid& grid() const { return grid_; }
  const EpsParams& params() const { return prm_; }
  const BulkDensity& density() const { return f_; }
  std::size_t cells() const { return grid_.cell_count(); }
  std::size_t nodes() const { return grid_.node_count(); }
  double volume() const { return vol_; }

  Cells cell_nodes(std::size_t c) const {
    std::array<int, 3> ijk{0, 0, 0};
    for (int a = 0; a < D; ++a) {
      ijk[a] = static_cast<int>(c % static_cast<std::size_t>(grid_.cells[a]));
      c /= static_cast<std::size_t>(grid_.cells[a]);
    }
    const std::size_t base = grid_.node_index(ijk[0], ijk[1], ijk[2]);
    Cells out;
    for (int k = 0; k < K; ++k) out[k] = base + offset_[k];
    return out;
  }

  MatD grad_u(const Cells& nd, std::span<const double> u) const {
    MatD g = MatD::Zero();
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < D; ++i) g.row(i) += u[nd[k] * D + i] * dn_.col(k).transpose();
    return g;
  }
  SV strain_coords(const Cells& nd, std::span<const double> u) const {
    const MatD g = grad_u(nd, u);
    return to_sym(MatD((g + g.transpose()) / 2));
  }
  double vbar(const Cells& nd, std::span<const double> v) const {
    double s = 0;
    for (int k = 0; k < K; ++k) s += v[nd[k]];
    return s / K;
  }
  VecD grad_v(const Cells& nd, std::span<const double> v) const {
    VecD g = VecD::Zero();
    for (int k = 0; k < K; ++k) g += v[nd[k]] * dn_.col(k);
    return g;
  }

  double gradv_energy(const VecD& gv) const {
    const double n2 = gv.squaredNorm();
    if (prm_.q == 2.0) return gv_coef_ * n2;
    return gv_coef_ * std::pow(n2, prm_.q / 2);
  }
  double gradv_factor(const VecD& gv) const {  // d/dg of the gradient term = factor * g
    const double n2 = gv.squaredNorm();
    if (prm_.q == 2.0) return 2 * gv_coef_;
    if (n2 == 0) return 0;
    return gv_coef_ * prm_.q * std::pow(n2, prm_.q / 2 - 1);
  }

  /// Bulk values f(A e), f(e - A e) per cell.
  void bulk_values(std::span<const double> u, std::vector<double>& fa,
                   std::vector<double>& fr) const {
    fa.resize(cells());
    fr.resize(cells());
    parallel_for(cells(), [&](std::size_t c) {
      const SV x = strain_coords(cell_nodes(c), u);
      fa[c] = f_.eval(SV(a_ * x));
      fr[c] = f_.eval(SV(r_ * x));
    });
  }

  EnergyBreakdown energy(std::span<const double> u, std::span<const double> v) const {
    std::vector<double> fa, fr;
    bulk_values(u, fa, fr);
    return energy_with_bulk(fa, fr, v);
  }

  EnergyBreakdown energy_with_bulk(const std::vector<double>& fa, const std::vector<double>& fr,
                                   std::span<const double> v) const {
    const std::size_t nc = cells();
    std::vector<double> ta(nc), tr(nc), tp(nc), tg(nc);
    parallel_for(nc, [&](std::size_t c) {
      const Cells nd = cell_nodes(c);
      const double vb = vbar(nd, v);
      ta[c] = vol_ * (vb + eps_floor_) * fa[c];
      tr[c] = vol_ * (vb + prm_.eta) * fr[c];
      tp[c] = vol_ * prm_.psi(vb) / prm_.eps;
      tg[c] = vol_ * gradv_energy(grad_v(nd, v));
    });
    EnergyBreakdown e;
    e.term_A = pairwise_sum(ta);
    e.term_rest = pairwise_sum(tr);
    e.term_psi = pairwise_sum(tp);
    e.term_gradv = pairwise_sum(tg);
    e.total = e.term_A + e.term_rest + e.term_psi + e.term_gradv;
    return e;
  }

  /// Terms of one cell: A part, remainder, psi, gradient of v.
  std::array<double, 4> cell_terms(std::size_t c, std::span<const double> u,
                                   std::span<const double> v) const {
    const Cells nd = cell_nodes(c);
    const SV x = strain_coords(nd, u);
    const double vb = vbar(nd, v);
    return {vol_ * (vb + eps_floor_) * f_.eval(SV(a_ * x)),
            vol_ * (vb + prm_.eta) * f_.eval(SV(r_ * x)), vol_ * prm_.psi(vb) / prm_.eps,
            vol_ * gradv_energy(grad_v(nd, v))};
  }

  /// Sums per-cell corner contributions into nodes in a fixed order.
  void gather(const std::vector<double>& local, int comps, std::vector<double>& out) const {
    const std::size_t nn = nodes();
    out.assign(nn * comps, 0.0);
    parallel_for(nn, [&](std::size_t n) {
      const auto ijk = grid_.node_ijk(n);
      for (int k = 0; k < K; ++k) {
        std::size_t cell = 0, stride = 1;
        bool ok = true;
        for (int a = 0; a < D; ++a) {
          const int ci = ijk[a] - ((k >> a) & 1);
          if (ci < 0 || ci >= grid_.cells[a]) {
            ok = false;
            break;
          }
          cell += static_cast<std::size_t>(ci) * stride;
          stride *= static_cast<std::size_t>(grid_.cells[a]);
        }
        if (!ok) continue;
        const std::size_t src = (cell * K + k) * comps;
        for (int i = 0; i < comps; ++i) out[n * comps + i] += local[src + i];
      }
    });
  }

  /// Gradient with respect to all nodal u values (pins not applied).
  void gradient_u(std::span<const double> u, std::span<const double> v,
                  std::vector<double>& out) const {
    std::vector<double> local(cells() * K * D);
    parallel_for(cells(), [&](std::size_t c) {
      const Cells nd = cell_nodes(c);
      const double vb = vbar(nd, v);
      const SV x = strain_coords(nd, u);
      const SV ax = a_ * x, rx = r_ * x;
      const SV g = (vb + eps_floor_) * (a_.transpose() * SV(f_.grad(ax))) +
                   (vb + prm_.eta) * (r_.transpose() * SV(f_.grad(rx)));
      const MatD gm = from_sym(g, D);
      for (int k = 0; k < K; ++k) {
        const VecD contrib = vol_ * (gm * dn_.col(k));
        for (int i = 0; i < D; ++i) local[(c * K + k) * D + i] = contrib(i);
      }
    });
    gather(local, D, out);
  }

  /// Diagonal of the u-Hessian, linearized at u (exact for p = 2).
  void diagonal_u(std::span<const double> u, std::span<const double> v,
                  std::vector<double>& out) const {
    std::vector<double> local(cells() * K * D);
    parallel_for(cells(), [&](std::size_t c) {
      const Cells nd = cell_nodes(c);
      const double vb = vbar(nd, v);
      const SV x = strain_coords(nd, u);
      const SV ax = a_ * x, rx = r_ * x;
      const double wa = (vb + eps_floor_) * f_.grad_factor(f_.hooke.quad(ax));
      const double wr = (vb + prm_.eta) * f_.grad_factor(f_.hooke.quad(rx));
      for (int k = 0; k < K; ++k)
        for (int i = 0; i < D; ++i) {
          MatD gu = MatD::Zero();
          gu.row(i) = dn_.col(k).transpose();
          const SV y = to_sym(MatD((gu + gu.transpose()) / 2));
          const SV ay = a_ * y, ry = r_ * y;
          local[(c * K + k) * D + i] =
              vol_ * (wa * f_.hooke.quad(ay) + wr * f_.hooke.quad(ry));
        }
    });
    gather(local, D, out);
  }

  /// Gradient with respect to all nodal v values given per-cell bulk values.
  void gradient_v_with_bulk(const std::vector<double>& fa, const std::vector<double>& fr,
                            std::span<const double> v, std::vector<double>& out) const {
    std::vector<double> local(cells() * K);
    parallel_for(cells(), [&](std::size_t c) {
      const Cells nd = cell_nodes(c);
      const double vb = vbar(nd, v);
      const VecD gv = grad_v(nd, v);
      const double avg = vol_ * (fa[c] + fr[c] + prm_.psi.deriv(vb) / prm_.eps) / K;
      const VecD dg = vol_ * gradv_factor(gv) * gv;
      for (int k = 0; k < K; ++k) local[c * K + k] = avg + dg.dot(dn_.col(k));
    });
    gather(local, 1, out);
  }

  void gradient_v(std::span<const double> u, std::span<const double> v,
                  std::vector<double>& out) const {
    std::vector<double> fa, fr;
    bulk_values(u, fa, fr);
    gradient_v_with_bulk(fa, fr, v, out);
  }

  /// Diagonal of the v-Hessian for the quadratic case q = 2, m in {1, 2}.
  void diagonal_v(std::vector<double>& out) const {
    std::vector<double> local(cells() * K);
    const double psi2 = prm_.psi.m == 2.0 ? 2 * prm_.psi.psi0 / prm_.eps : 0.0;
    parallel_for(cells(), [&](std::size_t c) {
      for (int k = 0; k < K; ++k)
        local[c * K + k] =
            vol_ * (psi2 / (K * K) + 2 * gv_coef_ * dn_.col(k).squaredNorm());
    });
    gather(local, 1, out);
  }

  SublevelDiagnostics sublevel(std::span<const double> u, std::span<const double> v) const {
    std::vector<double> av(cells()), pm(cells());
    parallel_for(cells(), [&](std::size_t c) {
      const Cells nd = cell_nodes(c);
      const SV x = strain_coords(nd, u);
      av[c] = vol_ * SV(a_ * x).norm();
      pm[c] = vol_ * prm_.psi(vbar(nd, v));
    });
    SublevelDiagnostics d;
    d.a_variation = pairwise_sum(av);
    d.psi_mass = pairwise_sum(pm);
    d.energy = energy(u, v).total;
    return d;
  }

 private:
  Grid grid_;
  EpsParams prm_;
  BulkDensity f_;
  SymMat<D> a_, r_;
  double vol_ = 0, eps_floor_ = 0, gv_coef_ = 0;
  Eigen::Matrix<double, D, K> dn_;
  std::array<std::size_t, K> offset_{};
};

// Runtime-dimension front ends.

/// Cell-center symmetric gradients, cell index with axis 0 fastest.
inline std::vector<Eigen::MatrixXd> strain(const Grid& g, const std::vector<double>& u) {
  return dispatch_dim(g.dim, [&](auto dc) {
    constexpr int D = decltype(dc)::value;
    const FirstOrderOperator op = FirstOrderOperator::full_strain(D);
    const EnergyModel<D> m(g, EpsParams{}, op, BulkDensity(2, 0, HookeTensor(1, 0, D)));
    std::vector<Eigen::MatrixXd> out(g.cell_count());
    for (std::size_t c = 0; c < out.size(); ++c) {
      const auto gu = m.grad_u(m.cell_nodes(c), u);
      out[c] = (gu + gu.transpose()) / 2;
    }
    return out;
  });
}

inline EnergyBreakdown assemble_energy(const GridField& fld, const EpsParams& prm,
                                       const FirstOrderOperator& op, const BulkDensity& f) {
  return dispatch_dim(fld.grid.dim, [&](auto dc) {
    return EnergyModel<decltype(dc)::value>(fld.grid, prm, op, f).energy(fld.u, fld.v);
  });
}

/// Energy gradient in u; zero at pinned nodes.
inline std::vector<double> gradient_u(const GridField& fld, const EpsParams& prm,
                                      const FirstOrderOperator& op, const BulkDensity& f) {
  std::vector<double> g;
  dispatch_dim(fld.grid.dim, [&](auto dc) {
    EnergyModel<decltype(dc)::value>(fld.grid, prm, op, f).gradient_u(fld.u, fld.v, g);
  });
  const int n = fld.grid.dim;
  for (std::size_t i = 0; i < fld.nodes(); ++i)
    if (fld.pin_u[i])
      for (int c = 0; c < n; ++c) g[i * n + c] = 0;
  return g;
}

/// Energy gradient in v; zero at pinned nodes.
inline std::vector<double> gradient_v(const GridField& fld, const EpsParams& prm,
                                      const FirstOrderOperator& op, const BulkDensity& f) {
  std::vector<double> g;
  dispatch_dim(fld.grid.dim, [&](auto dc) {
    EnergyModel<decltype(dc)::value>(fld.grid, prm, op, f).gradient_v(fld.u, fld.v, g);
  });
  for (std::size_t i = 0; i < fld.nodes(); ++i)
    if (fld.pin_v[i]) g[i] = 0;
  return g;
}

inline SublevelDiagnostics sublevel_diagnostics(const GridField& fld, const EpsParams& prm,
                                                const FirstOrderOperator& op,
                                                const BulkDensity& f) {
  return dispatch_dim(fld.grid.dim, [&](auto dc) {
    return EnergyModel<decltype(dc)::value>(fld.grid, prm, op, f).sublevel(fld.u, fld.v);
  });
}

}  // namespace pfgamma
