#pragma once

// Coordinates of symmetric n x n matrices in a fixed orthonormal basis of
// Sym(n): the diagonal units E_ii first, then (E_ij + E_ji)/sqrt(2) for i < j in
// lexicographic order. The Frobenius inner product becomes the Euclidean one.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <utility>

namespace pfgamma {

inline constexpr int kMaxDim = 3;

constexpr int sym_size(int n) { return n * (n + 1) / 2; }

/// Index pair (i, j), i <= j, of coordinate k in Sym(n).
constexpr std::pair<int, int> sym_pair(int n, int k) {
  if (k < n) return {k, k};
  k -= n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (k-- == 0) return {i, j};
  return {-1, -1};
}

template <int Dim>
using Vec = Eigen::Matrix<double, Dim, 1>;
template <int Dim>
using Mat = Eigen::Matrix<double, Dim, Dim>;
template <int Dim>
using SymVec = Eigen::Matrix<double, sym_size(Dim), 1>;
template <int Dim>
using SymMat = Eigen::Matrix<double, sym_size(Dim), sym_size(Dim)>;

/// Coordinates of the symmetric part of m.
template <typename Derived>
auto to_sym(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  constexpr int R = Derived::RowsAtCompileTime;
  constexpr int S = R == Eigen::Dynamic ? Eigen::Dynamic : sym_size(R);
  const int n = static_cast<int>(m.rows());
  Eigen::Matrix<Scalar, S, 1> x(sym_size(n));
  const double r2 = std::sqrt(2.0);
  for (int k = 0; k < sym_size(n); ++k) {
    auto [i, j] = sym_pair(n, k);
    x(k) = i == j ? m(i, i) : Scalar((m(i, j) + m(j, i)) / r2);
  }
  return x;
}

/// Symmetric matrix with coordinates x.
template <typename Derived>
auto from_sym(const Eigen::MatrixBase<Derived>& x, int n) {
  using Scalar = typename Derived::Scalar;
  constexpr int S = Derived::RowsAtCompileTime;
  constexpr int R = S == 1 ? 1 : S == 3 ? 2 : S == 6 ? 3 : Eigen::Dynamic;
  Eigen::Matrix<Scalar, R, R> m(n, n);
  const double r2 = std::sqrt(2.0);
  for (int k = 0; k < sym_size(n); ++k) {
    auto [i, j] = sym_pair(n, k);
    if (i == j) {
      m(i, i) = x(k);
    } else {
      m(i, j) = x(k) / r2;
      m(j, i) = m(i, j);
    }
  }
  return m;
}

/// Trace of the matrix with coordinates x.
template <typename Derived>
auto sym_trace(const Eigen::MatrixBase<Derived>& x, int n) {
  return x.head(n).sum();
}

/// Symmetrized product (a b^T + b a^T) / 2, no complex conjugation.
template <typename DA, typename DB>
auto sym_product(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  return ((a * b.transpose() + b * a.transpose()) / 2.0).eval();
}

inline void require_dim(int n) {
  if (n < 1 || n > kMaxDim) throw std::invalid_argument("dimension must be 1, 2 or 3");
}

/// Calls f(std::integral_constant<int, D>{}) for the runtime dimension n.
template <typename F>
decltype(auto) dispatch_dim(int n, F&& f) {
  switch (n) {
    case 1: return f(std::integral_constant<int, 1>{});
    case 2: return f(std::integral_constant<int, 2>{});
    case 3: return f(std::integral_constant<int, 3>{});
    default: throw std::invalid_argument("dimension must be 1, 2 or 3");
  }
}

}  // namespace pfgamma
