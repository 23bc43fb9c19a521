#pragma once

#include "pfgamma/sym.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace pfgamma {

/// Vector field x -> c + L x + q(x) of degree <= 2 on R^n, with
/// q_i(x) = sum_{j,k} Q[i][j][k] x_j x_k. Gradients are exact.
class PolyField {
 public:
  PolyField() = default;
  explicit PolyField(int dim)
      : dim_(dim),
        constant_(Eigen::VectorXd::Zero(dim)),
        linear_(Eigen::MatrixXd::Zero(dim, dim)),
        quadratic_(static_cast<std::size_t>(dim * dim * dim), 0.0) {
    require_dim(dim);
  }

  static PolyField affine(const Eigen::VectorXd& c, const Eigen::MatrixXd& l) {
    PolyField p(static_cast<int>(c.size()));
    if (l.rows() != p.dim_ || l.cols() != p.dim_)
      throw std::invalid_argument("PolyField: linear part has wrong shape");
    p.constant_ = c;
    p.linear_ = l;
    return p;
  }

  int dim() const { return dim_; }
  const Eigen::VectorXd& constant() const { return constant_; }
  const Eigen::MatrixXd& linear() const { return linear_; }
  const std::vector<double>& quadratic() const { return quadratic_; }

  Eigen::VectorXd& constant() { return constant_; }
  Eigen::MatrixXd& linear() { return linear_; }
  double& quad(int i, int j, int k) { return quadratic_[index(i, j, k)]; }
  double quad(int i, int j, int k) const { return quadratic_[index(i, j, k)]; }

  /// Replaces the quadratic tensor; size must be n^3, row-major in (i, j, k).
  void set_quadratic(std::vector<double> q) {
    if (q.size() != quadratic_.size())
      throw std::invalid_argument("PolyField: quadratic tensor must have n^3 entries");
    quadratic_ = std::move(q);
  }

  template <typename Derived>
  Eigen::VectorXd value(const Eigen::MatrixBase<Derived>& x) const {
    Eigen::VectorXd out = constant_ + linear_ * x;
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        for (int k = 0; k < dim_; ++k) out(i) += quad(i, j, k) * x(j) * x(k);
    return out;
  }

  /// grad(i, j) = d u_i / d x_j.
  template <typename Derived>
  Eigen::MatrixXd gradient(const Eigen::MatrixBase<Derived>& x) const {
    Eigen::MatrixXd g = linear_;
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        for (int k = 0; k < dim_; ++k) g(i, j) += (quad(i, j, k) + quad(i, k, j)) * x(k);
    return g;
  }

  template <typename Derived>
  Eigen::MatrixXd sym_gradient(const Eigen::MatrixBase<Derived>& x) const {
    Eigen::MatrixXd g = gradient(x);
    return (g + g.transpose()) / 2.0;
  }

  bool is_zero() const {
    if (!constant_.isZero(0.0) || !linear_.isZero(0.0)) return false;
    for (double q : quadratic_)
      if (q != 0.0) return false;
    return true;
  }

  PolyField operator-(const PolyField& o) const {
    PolyField r(*this);
    r.constant_ -= o.constant_;
    r.linear_ -= o.linear_;
    for (std::size_t i = 0; i < quadratic_.size(); ++i) r.quadratic_[i] -= o.quadratic_[i];
    return r;
  }

  bool operator==(const PolyField& o) const {
    return dim_ == o.dim_ && constant_ == o.constant_ && linear_ == o.linear_ &&
           quadratic_ == o.quadratic_;
  }

 private:
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>((i * dim_ + j) * dim_ + k);
  }

  int dim_ = 0;
  Eigen::VectorXd constant_;
  Eigen::MatrixXd linear_;
  std::vector<double> quadratic_;
};

}  // namespace pfgamma
