#pragma once

// Constant-coefficient first-order operators acting through the symmetric
// gradient, u -> A(e(u)), with A an endomorphism of Sym(n).

#include "pfgamma/polynomial.hpp"
#include "pfgamma/sym.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

namespace pfgamma {

using cd = std::complex<double>;

struct FirstOrderOperator {
  int dim = 0;
  Eigen::MatrixXd a_matrix;  // d x d in the Sym(n) basis of sym.hpp
  std::string name;

  static FirstOrderOperator full_strain(int n) {
    require_dim(n);
    return {n, Eigen::MatrixXd::Identity(sym_size(n), sym_size(n)), "full-strain"};
  }

  /// xi -> xi - (tr xi / n) Id
  static FirstOrderOperator deviatoric(int n) {
    require_dim(n);
    const int d = sym_size(n);
    Eigen::VectorXd id = Eigen::VectorXd::Zero(d);
    id.head(n).setOnes();
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(d, d) - id * id.transpose() / n;
    return {n, a, "deviatoric"};
  }

  static FirstOrderOperator custom(int n, const Eigen::MatrixXd& a) {
    require_dim(n);
    if (a.rows() != sym_size(n) || a.cols() != sym_size(n))
      throw std::invalid_argument("operator matrix must be " + std::to_string(sym_size(n)) +
                                  "x" + std::to_string(sym_size(n)) + " for dim " +
                                  std::to_string(n));
    if (!a.allFinite()) throw std::invalid_argument("operator matrix has non-finite entries");
    return {n, a, "custom"};
  }

  static FirstOrderOperator by_name(const std::string& name, int n) {
    if (name == "full-strain") return full_strain(n);
    if (name == "deviatoric") return deviatoric(n);
    throw std::invalid_argument("unknown operator '" + name +
                                "' (expected full-strain, deviatoric or a custom matrix)");
  }

  /// Applies A to a symmetric matrix (real or complex, entrywise linear).
  template <typename Derived>
  auto apply(const Eigen::MatrixBase<Derived>& xi) const {
    using Scalar = typename Derived::Scalar;
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x = to_sym(xi);
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y = a_matrix.cast<Scalar>() * x;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out = from_sym(y, dim);
    return out;
  }
};

namespace detail {

inline void check_len(const FirstOrderOperator& op, Eigen::Index len) {
  if (len != op.dim)
    throw std::invalid_argument("vector of length " + std::to_string(len) +
                                " does not match operator dimension " + std::to_string(op.dim));
}

/// d x n matrix of v -> coords(A(v . z)).
inline Eigen::MatrixXcd symbol_matrix(const FirstOrderOperator& op, const Eigen::VectorXcd& z) {
  const int n = op.dim;
  Eigen::MatrixXcd s(sym_size(n), n);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
    e(j) = 1.0;
    const Eigen::MatrixXcd p = sym_product(e, z);
    const Eigen::VectorXcd x = to_sym(p);
    s.col(j) = op.a_matrix.cast<cd>() * x;
  }
  return s;
}

inline double min_singular(const Eigen::MatrixXcd& s) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(s);
  return svd.singularValues().minCoeff();
}

inline Eigen::VectorXcd random_unit_complex(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd z(n);
  for (int i = 0; i < n; ++i) {
    const double re = g(rng);
    const double im = g(rng);
    z(i) = cd(re, im);
  }
  return z / z.norm();
}

inline Eigen::VectorXd random_unit_real(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z(i) = g(rng);
  const double nz = z.norm();
  return nz > 0 ? Eigen::VectorXd(z / nz) : Eigen::VectorXd::Unit(n, 0);
}

// Local random search on the unit sphere for the smallest singular value.
inline std::pair<double, Eigen::VectorXcd> refine_min(const FirstOrderOperator& op,
                                                      Eigen::VectorXcd z, bool real_only,
                                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  double best = min_singular(symbol_matrix(op, z));
  double step = 0.25;
  int fails = 0;
  for (int it = 0; it < 20000 && step > 1e-12 && best > 1e-15; ++it) {
    Eigen::VectorXcd trial = z;
    for (int i = 0; i < op.dim; ++i)
      trial(i) += step * cd(g(rng), real_only ? 0.0 : g(rng));
    trial /= trial.norm();
    const double val = min_singular(symbol_matrix(op, trial));
    if (val < best) {
      best = val;
      z = trial;
      fails = 0;
    } else if (++fails >= 8 * op.dim) {
      step /= 2;
      fails = 0;
    }
  }
  return {best, z};
}

}  // namespace detail

/// A(v . z) with the bilinear (non-conjugating) symmetrized product.
inline Eigen::MatrixXcd symbol(const FirstOrderOperator& op, const Eigen::VectorXcd& z,
                               const Eigen::VectorXcd& v) {
  detail::check_len(op, z.size());
  detail::check_len(op, v.size());
  return op.apply(sym_product(v, z));
}

inline Eigen::MatrixXd tensor_A(const FirstOrderOperator& op, const Eigen::VectorXd& w,
                                const Eigen::VectorXd& z) {
  detail::check_len(op, w.size());
  detail::check_len(op, z.size());
  return op.apply(sym_product(w, z));
}

struct Witness {
  Eigen::VectorXcd v;
  Eigen::VectorXcd z;
  double residual = 0;  // |A(v . z)| / (|v| |z|)
};

struct EllipticityReport {
  bool r_elliptic = false;
  bool c_elliptic = false;
  double min_sigma_real = 0;
  double min_sigma_complex = 0;
  std::optional<Witness> witness;
  int samples = 0;
  double tol = 0;
};

inline double witness_residual(const FirstOrderOperator& op, const Eigen::VectorXcd& v,
                               const Eigen::VectorXcd& z) {
  return symbol(op, z, v).norm() / (v.norm() * z.norm());
}

/// Sampled ellipticity classification. The reported minima come from the
/// samples alone, so they are monotone in n_samples for a fixed seed; a local
/// search from the best samples only feeds the witness search.
inline EllipticityReport classify_ellipticity(const FirstOrderOperator& op, int n_samples,
                                              double tol = 1e-8, std::uint64_t seed = 1) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  if (!(tol > 0)) throw std::invalid_argument("tol must be > 0");
  const int n = op.dim;
  EllipticityReport rep;
  rep.samples = n_samples;
  rep.tol = tol;

  std::mt19937_64 rng_r(seed), rng_c(seed ^ 0x9e3779b97f4a7c15ULL);
  double min_r = std::numeric_limits<double>::infinity();
  double min_c = min_r;
  Eigen::VectorXcd best_r, best_c;
  for (int s = 0; s < n_samples; ++s) {
    const Eigen::VectorXcd zr = detail::random_unit_real(n, rng_r).cast<cd>();
    const double sr = detail::min_singular(detail::symbol_matrix(op, zr));
    if (sr < min_r) {
      min_r = sr;
      best_r = zr;
    }
    const Eigen::VectorXcd zc = detail::random_unit_complex(n, rng_c);
    const double sc = detail::min_singular(detail::symbol_matrix(op, zc));
    if (sc < min_c) {
      min_c = sc;
      best_c = zc;
    }
  }
  rep.min_sigma_real = min_r;
  rep.min_sigma_complex = min_c;

  auto make_witness = [&](const Eigen::VectorXcd& z) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(detail::symbol_matrix(op, z), Eigen::ComputeFullV);
    Eigen::Index k;
    svd.singularValues().minCoeff(&k);
    Witness w{svd.matrixV().col(k), z, 0.0};
    w.residual = witness_residual(op, w.v, w.z);
    return w;
  };

  auto [ref_r, zr] = detail::refine_min(op, best_r, true, seed + 1);
  rep.r_elliptic = min_r > tol && ref_r > tol;
  if (!rep.r_elliptic && ref_r <= tol) rep.witness = make_witness(zr);

  if (!rep.witness && op.name == "deviatoric" && n == 2) {
    Witness w{Eigen::Vector2cd(1.0, cd(0, 1)), Eigen::Vector2cd(1.0, cd(0, -1)), 0.0};
    w.residual = witness_residual(op, w.v, w.z);
    if (w.residual < tol) rep.witness = w;
  }
  if (!rep.witness) {
    auto [ref_c, zc] = detail::refine_min(op, best_c, false, seed + 2);
    if (ref_c <= tol) rep.witness = make_witness(zc);
  }
  rep.c_elliptic = rep.r_elliptic && min_c > tol && !rep.witness;
  return rep;
}

struct KappaBounds {
  double kappa1 = 0;
  double kappa2 = 0;
};

/// Extremes of |A(w . z)| over real unit w, z: sampled, then refined by
/// alternating eigen-solves (for fixed z the square is a quadratic form in w).
inline KappaBounds kappa_bounds(const FirstOrderOperator& op, int n_samples,
                                std::uint64_t seed = 1) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  const int n = op.dim;
  std::mt19937_64 rng(seed);
  auto value = [&](const Eigen::VectorXd& w, const Eigen::VectorXd& z) {
    return tensor_A(op, w, z).norm();
  };
  auto gram = [&](const Eigen::VectorXd& z) {
    const Eigen::MatrixXd s = detail::symbol_matrix(op, z.cast<cd>()).real();
    return Eigen::MatrixXd(s.transpose() * s);
  };
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  Eigen::VectorXd lw, lz, hw, hz;
  for (int s = 0; s < n_samples; ++s) {
    const Eigen::VectorXd w = detail::random_unit_real(n, rng);
    const Eigen::VectorXd z = detail::random_unit_real(n, rng);
    const double val = value(w, z);
    if (val < lo) lo = val, lw = w, lz = z;
    if (val > hi) hi = val, hw = w, hz = z;
  }
  auto refine = [&](Eigen::VectorXd w, Eigen::VectorXd z, bool minimize) {
    double cur = value(w, z);
    for (int it = 0; it < 200; ++it) {
      for (int side = 0; side < 2; ++side) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram(side == 0 ? z : w));
        const Eigen::VectorXd vec = es.eigenvectors().col(minimize ? 0 : n - 1);
        (side == 0 ? w : z) = vec;
      }
      const double next = value(w, z);
      const bool better = minimize ? next < cur : next > cur;
      if (!better || std::abs(next - cur) < 1e-15) {
        cur = minimize ? std::min(cur, next) : std::max(cur, next);
        break;
      }
      cur = next;
    }
    return cur;
  };
  return {refine(lw, lz, true), refine(hw, hz, false)};
}

struct KernelField {
  enum class Kind { rigid, conformal, custom };
  Kind kind = Kind::rigid;
  Eigen::MatrixXd m;  // skew for rigid and conformal
  Eigen::VectorXd b;
  Eigen::VectorXd a;  // conformal only
  PolyField custom_field;

  static KernelField rigid(const Eigen::MatrixXd& m, const Eigen::VectorXd& b) {
    return {Kind::rigid, m, b, Eigen::VectorXd::Zero(b.size()), {}};
  }
  static KernelField conformal(const Eigen::MatrixXd& m, const Eigen::VectorXd& b,
                               const Eigen::VectorXd& a) {
    return {Kind::conformal, m, b, a, {}};
  }
  static KernelField polynomial(PolyField p) {
    return {Kind::custom, {}, {}, {}, std::move(p)};
  }

  /// x -> Mx + b [+ 2(a.x)x - |x|^2 a] as an exact polynomial.
  PolyField field() const {
    if (kind == Kind::custom) return custom_field;
    const int n = static_cast<int>(b.size());
    if (m.rows() != n || m.cols() != n) throw std::invalid_argument("kernel field: M has wrong shape");
    if (!(m + m.transpose()).isZero(1e-14))
      throw std::invalid_argument("kernel field: M must be skew-symmetric");
    PolyField p = PolyField::affine(b, m);
    if (kind == Kind::conformal) {
      if (a.size() != n) throw std::invalid_argument("kernel field: a has wrong length");
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          p.quad(i, i, j) += a(j);
          p.quad(i, j, i) += a(j);
          p.quad(i, j, j) -= a(i);
        }
    }
    return p;
  }
};

/// max |A(e(u)(x))| over seeded points of the box [lo, hi], using the exact
/// symmetric gradient of the polynomial field.
inline double kernel_residual(const FirstOrderOperator& op, const KernelField& kf, int n_points,
                              const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                              std::uint64_t seed = 1) {
  if (kf.kind == KernelField::Kind::conformal && op.dim < 3)
    throw std::invalid_argument(
        "conformal Killing fields need dim >= 3: in dim 2 the deviatoric kernel is "
        "infinite-dimensional (all holomorphic maps), in dim 1 the construction is not a kernel");
  const PolyField u = kf.field();
  if (u.dim() != op.dim) throw std::invalid_argument("kernel field dimension mismatch");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = 0;
  for (int s = 0; s < n_points; ++s) {
    Eigen::VectorXd x(op.dim);
    for (int i = 0; i < op.dim; ++i) x(i) = lo(i) + (hi(i) - lo(i)) * unif(rng);
    worst = std::max(worst, op.apply(u.sym_gradient(x)).norm());
  }
  return worst;
}

}  // namespace pfgamma
