#pragma once

// Bulk density f(xi) = ((S xi : xi + mu)^{p/2} - mu^{p/2}) / p with the
// isotropic tensor S xi = l1 xi + (l2/2) tr(xi) Id. Arguments are Sym(n)
// coordinates (see sym.hpp), so S xi : xi = l1 |x|^2 + (l2/2) tr^2.

#include "pfgamma/operator_algebra.hpp"
#include "pfgamma/sym.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace pfgamma {

inline constexpr double kPowerFloor = 1e-30;

struct HookeTensor {
  double lambda1 = 1.0;
  double lambda2 = 0.0;
  int dim = 1;

  HookeTensor() = default;
  HookeTensor(double l1, double l2, int n) : lambda1(l1), lambda2(l2), dim(n) { validate(); }

  void validate() const {
    require_dim(dim);
    if (!std::isfinite(lambda1) || !std::isfinite(lambda2))
      throw std::invalid_argument("lambda1/lambda2 must be finite");
    if (!(lambda1 > 0)) throw std::invalid_argument("positive definiteness requires lambda1 > 0");
    if (!(lambda1 + dim * lambda2 / 2 > 0))
      throw std::invalid_argument("positive definiteness requires lambda1 + n*lambda2/2 > 0");
  }

  /// Eigenvalues on Sym(n): lambda1 on trace-free matrices, lambda1 + n lambda2/2 on Id.
  double eig_min() const {
    const double iso = lambda1 + dim * lambda2 / 2;
    return dim == 1 ? iso : std::min(lambda1, iso);
  }
  double eig_max() const {
    const double iso = lambda1 + dim * lambda2 / 2;
    return dim == 1 ? iso : std::max(lambda1, iso);
  }

  template <typename Derived>
  auto apply(const Eigen::MatrixBase<Derived>& x) const {
    using V = Eigen::Matrix<double, Derived::RowsAtCompileTime, 1>;
    V s = lambda1 * x;
    s.head(dim).array() += 0.5 * lambda2 * x.head(dim).sum();
    return s;
  }

  template <typename Derived>
  double quad(const Eigen::MatrixBase<Derived>& x) const {
    const double tr = x.head(dim).sum();
    return lambda1 * x.squaredNorm() + 0.5 * lambda2 * tr * tr;
  }
};

struct BulkDensity {
  double p = 2.0;
  double mu = 0.0;
  HookeTensor hooke;

  BulkDensity() = default;
  BulkDensity(double p_, double mu_, HookeTensor h) : p(p_), mu(mu_), hooke(h) { validate(); }

  void validate() const {
    if (!(p > 1) || !std::isfinite(p)) throw std::invalid_argument("p must be > 1");
    if (!(mu >= 0) || !std::isfinite(mu)) throw std::invalid_argument("mu must be >= 0");
    hooke.validate();
  }

  /// From a quadratic-form value S xi : xi.
  double eval_quad(double qf) const {
    if (p == 2.0) return 0.5 * qf;
    if (mu > 0) return std::pow(mu, p / 2) * std::expm1(p / 2 * std::log1p(qf / mu)) / p;
    return std::pow(std::max(qf, 0.0), p / 2) / p;
  }

  template <typename Derived>
  double eval(const Eigen::MatrixBase<Derived>& x) const {
    return eval_quad(hooke.quad(x));
  }

  /// Scalar factor (S xi : xi + mu)^{p/2 - 1}; the gradient is this times S xi.
  double grad_factor(double qf) const {
    if (p == 2.0) return 1.0;
    return std::pow(std::max(qf + mu, kPowerFloor), p / 2 - 1);
  }

  template <typename Derived>
  auto grad(const Eigen::MatrixBase<Derived>& x) const {
    auto s = hooke.apply(x);
    s *= grad_factor(hooke.quad(x));
    return s;
  }

  template <typename Derived>
  double recession(const Eigen::MatrixBase<Derived>& x) const {
    return std::pow(std::max(hooke.quad(x), 0.0), p / 2) / p;
  }
};

/// sup over sampled unit xi of |f(s xi)^{1/p} / s - recession(xi)^{1/p}|.
inline double recession_gap(const BulkDensity& f, double s, int n_dirs, std::uint64_t seed = 1) {
  if (!(s > 0)) throw std::invalid_argument("scale must be > 0");
  const int d = sym_size(f.hooke.dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  double gap = 0;
  for (int k = 0; k < n_dirs; ++k) {
    Eigen::VectorXd x(d);
    for (int i = 0; i < d; ++i) x(i) = g(rng);
    x /= x.norm();
    const double lhs = std::pow(f.eval(Eigen::VectorXd(s * x)), 1.0 / f.p) / s;
    const double rhs = std::pow(f.recession(x), 1.0 / f.p);
    gap = std::max(gap, std::abs(lhs - rhs));
  }
  return gap;
}

struct GrowthConstants {
  double c_lower = 0;
  double c_upper = 0;
};

/// Empirical constants with c_lower (|xi|^p - 1) < f(xi) < c_upper (|xi|^p + 1)
/// on all samples. Large-|xi| behaviour is covered exactly through the extreme
/// values of the recession function on the unit sphere.
inline GrowthConstants growth_check(const BulkDensity& f, int n_samples, std::uint64_t seed = 1) {
  f.validate();
  const int d = sym_size(f.hooke.dim);
  const double rec_min = std::pow(f.hooke.eig_min(), f.p / 2) / f.p;
  const double rec_max = std::pow(f.hooke.eig_max(), f.p / 2) / f.p;
  double lo = rec_min, hi = rec_max;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> logmag(-3.0, 3.0);
  std::vector<Eigen::VectorXd> xs;
  xs.reserve(static_cast<std::size_t>(n_samples));
  for (int k = 0; k < n_samples; ++k) {
    Eigen::VectorXd x(d);
    for (int i = 0; i < d; ++i) x(i) = g(rng);
    x *= std::pow(10.0, logmag(rng)) / x.norm();
    xs.push_back(x);
    const double r = std::pow(x.norm(), f.p);
    const double val = f.eval(x);
    if (r > 1) lo = std::min(lo, val / (r - 1));
    hi = std::max(hi, val / (r + 1));
  }
  GrowthConstants c{lo * (1 - 1e-12), hi * (1 + 1e-12)};
  if (!(c.c_lower > 0) || !std::isfinite(c.c_upper))
    throw std::runtime_error("growth_check: no positive finite sandwich constants fit the samples");
  for (const auto& x : xs) {
    const double r = std::pow(x.norm(), f.p);
    const double val = f.eval(x);
    if (!(c.c_lower * (r - 1) < val) || !(val < c.c_upper * (r + 1)))
      throw std::runtime_error("growth_check: sample violates the sandwich bounds; density misconfigured");
  }
  return c;
}

/// recession(A(w . z))^{1/p}
inline double surface_norm(const BulkDensity& f, const FirstOrderOperator& op,
                           const Eigen::VectorXd& w, const Eigen::VectorXd& z) {
  const Eigen::MatrixXd t = tensor_A(op, w, z);
  const Eigen::VectorXd x = to_sym(t);
  return std::pow(f.recession(x), 1.0 / f.p);
}

}  // namespace pfgamma
