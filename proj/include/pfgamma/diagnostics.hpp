#pragma once

// Finite-difference checks of the analytic energy gradients.

#include "pfgamma/energy.hpp"
#include "pfgamma/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace pfgamma {

/// Random admissible state: u uniform in [-amp, amp], v uniform in [0.05, 0.95]
/// (pinned nodes keep u and get v = 1).
inline void randomize(GridField& fld, std::uint64_t seed, double amp = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-amp, amp), V(0.05, 0.95);
  const int n = fld.grid.dim;
  for (std::size_t i = 0; i < fld.nodes(); ++i) {
    if (!fld.pin_u[i])
      for (int c = 0; c < n; ++c) fld.u[i * n + c] = U(rng);
    fld.v[i] = fld.pin_v[i] ? 1.0 : V(rng);
  }
}

struct GradientCheck {
  double max_rel_u = 0;
  double max_rel_v = 0;
  int checked_u = 0;
  int checked_v = 0;
  bool pinned_zero = true;  // gradients vanish at pinned entries

  bool pass(double tol) const { return max_rel_u <= tol && max_rel_v <= tol && pinned_zero; }
};

/// Compares `components` randomly chosen free entries of each gradient with
/// finite differences of the energy. The relative error is taken against
/// max(|fd|, |analytic|, 1e-3 * max|analytic|). corrupt scales the analytic
/// u-gradient by (1 + corrupt) (test hook).
inline GradientCheck gradient_check(GridField fld, const EpsParams& prm,
                                    const FirstOrderOperator& op, const BulkDensity& f,
                                    int components, std::uint64_t seed, double corrupt = 0) {
  GradientCheck out;
  std::vector<double> gu = gradient_u(fld, prm, op, f);
  const std::vector<double> gv = gradient_v(fld, prm, op, f);
  for (double& x : gu) x *= 1 + corrupt;
  const int n = fld.grid.dim;
  for (std::size_t i = 0; i < fld.nodes(); ++i) {
    if (fld.pin_v[i] && gv[i] != 0) out.pinned_zero = false;
    for (int c = 0; c < n; ++c)
      if (fld.pin_u[i] && gu[i * n + c] != 0) out.pinned_zero = false;
  }
  auto scale_of = [](const std::vector<double>& g) {
    double m = 0;
    for (double x : g) m = std::max(m, std::abs(x));
    return m;
  };
  const double su = scale_of(gu), sv = scale_of(gv);
  std::mt19937_64 rng(seed);
  auto energy = [&]() { return assemble_energy(fld, prm, op, f).total; };
  // five-point stencil: truncation O(h^4), so h can stay large against roundoff
  auto derivative = [&](double& x, double h) {
    const double x0 = x;
    auto at = [&](double d) {
      x = x0 + d;
      return energy();
    };
    const double d1 = at(h) - at(-h), d2 = at(2 * h) - at(-2 * h);
    x = x0;
    return (8 * d1 - d2) / (12 * h);
  };
  for (int k = 0; k < components; ++k) {
    std::uniform_int_distribution<std::size_t> pick(0, fld.nodes() - 1);
    std::size_t node = pick(rng);
    for (int t = 0; t < 64 && fld.pin_u[node]; ++t) node = pick(rng);
    if (!fld.pin_u[node]) {
      const std::size_t idx = node * n + static_cast<std::size_t>(k % n);
      const double fd = derivative(fld.u[idx], 1e-4 * std::max(1.0, std::abs(fld.u[idx])));
      const double den = std::max({std::abs(fd), std::abs(gu[idx]), 1e-3 * su});
      if (den > 0) out.max_rel_u = std::max(out.max_rel_u, std::abs(fd - gu[idx]) / den);
      ++out.checked_u;
    }
    node = pick(rng);
    for (int t = 0; t < 64 && fld.pin_v[node]; ++t) node = pick(rng);
    if (!fld.pin_v[node]) {
      const double fd = derivative(fld.v[node], 1e-4);
      const double den = std::max({std::abs(fd), std::abs(gv[node]), 1e-3 * sv});
      if (den > 0) out.max_rel_v = std::max(out.max_rel_v, std::abs(fd - gv[node]) / den);
      ++out.checked_v;
    }
  }
  return out;
}

}  // namespace pfgamma
