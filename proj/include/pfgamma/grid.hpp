#pragma once

// Structured boxes [0, L1] x ... x [0, Ln] with Q1 nodal fields.

#include "pfgamma/errors.hpp"
#include "pfgamma/polynomial.hpp"
#include "pfgamma/sym.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

namespace pfgamma {

struct Grid {
  int dim = 1;
  std::array<double, 3> extents{1.0, 1.0, 1.0};
  std::array<int, 3> cells{1, 1, 1};

  Grid() = default;
  Grid(int n, std::array<double, 3> ext, std::array<int, 3> c) : dim(n), extents(ext), cells(c) {
    for (int i = n; i < 3; ++i) {
      extents[i] = 1.0;
      cells[i] = 1;
    }
    validate();
  }

  void validate() const {
    if (dim < 1 || dim > 3) throw ConfigError("grid.dim must be 1, 2 or 3");
    for (int i = 0; i < dim; ++i) {
      if (cells[i] < 1) throw ConfigError("grid.cells must be >= 1 on every axis");
      if (!(extents[i] > 0) || !std::isfinite(extents[i]))
        throw ConfigError("grid.extents must be positive and finite");
    }
  }

  double h(int axis) const { return extents[axis] / cells[axis]; }
  double min_h() const {
    double m = h(0);
    for (int i = 1; i < dim; ++i) m = std::min(m, h(i));
    return m;
  }
  int nodes_along(int axis) const { return axis < dim ? cells[axis] + 1 : 1; }
  std::size_t node_count() const {
    std::size_t c = 1;
    for (int i = 0; i < dim; ++i) c *= static_cast<std::size_t>(cells[i] + 1);
    return c;
  }
  std::size_t cell_count() const {
    std::size_t c = 1;
    for (int i = 0; i < dim; ++i) c *= static_cast<std::size_t>(cells[i]);
    return c;
  }
  double cell_volume() const {
    double v = 1;
    for (int i = 0; i < dim; ++i) v *= h(i);
    return v;
  }
  double volume() const {
    double v = 1;
    for (int i = 0; i < dim; ++i) v *= extents[i];
    return v;
  }

  /// Node (i, j, k) -> flat index; axis 0 varies fastest.
  std::size_t node_index(int i, int j = 0, int k = 0) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(nodes_along(0)) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(nodes_along(1)) * k);
  }
  std::array<int, 3> node_ijk(std::size_t idx) const {
    std::array<int, 3> ijk{0, 0, 0};
    for (int a = 0; a < 3; ++a) {
      const auto n = static_cast<std::size_t>(nodes_along(a));
      ijk[a] = static_cast<int>(idx % n);
      idx /= n;
    }
    return ijk;
  }
  Eigen::VectorXd node_coord(std::size_t idx) const {
    const auto ijk = node_ijk(idx);
    Eigen::VectorXd x(dim);
    for (int a = 0; a < dim; ++a) x(a) = ijk[a] * h(a);
    return x;
  }

  bool operator==(const Grid& o) const {
    return dim == o.dim && extents == o.extents && cells == o.cells;
  }
};

/// Box face by axis and side; parsed from "x0-", "x0+", "x1-", ...
struct Face {
  int axis = 0;
  bool upper = false;

  static Face parse(const std::string& s) {
    if (s.size() != 3 || s[0] != 'x' || s[1] < '0' || s[1] > '2' || (s[2] != '-' && s[2] != '+'))
      throw ConfigError("bad face name '" + s + "' (expected x0-, x0+, x1-, ...)");
    return {s[1] - '0', s[2] == '+'};
  }
  std::string name() const { return std::string("x") + char('0' + axis) + (upper ? '+' : '-'); }
  bool contains(const Grid& g, std::size_t node) const {
    const auto ijk = g.node_ijk(node);
    return ijk[axis] == (upper ? g.cells[axis] : 0);
  }
  bool operator==(const Face&) const = default;
};

struct GridField {
  Grid grid;
  std::vector<double> u;  // node-major, dim components per node
  std::vector<double> v;
  std::vector<char> pin_u;  // per node, all components pinned
  std::vector<char> pin_v;  // per node, pinned to 1

  GridField() = default;
  explicit GridField(const Grid& g)
      : grid(g),
        u(g.node_count() * static_cast<std::size_t>(g.dim), 0.0),
        v(g.node_count(), 1.0),
        pin_u(g.node_count(), 0),
        pin_v(g.node_count(), 0) {}

  std::size_t nodes() const { return v.size(); }

  /// Pins u on the faces to the polynomial datum u0.
  void pin_u_faces(const std::vector<Face>& faces, const PolyField& u0) {
    const int n = grid.dim;
    for (std::size_t i = 0; i < nodes(); ++i)
      for (const auto& f : faces)
        if (f.axis < n && f.contains(grid, i)) {
          pin_u[i] = 1;
          const Eigen::VectorXd val = u0.value(grid.node_coord(i));
          for (int c = 0; c < n; ++c) u[i * n + c] = val(c);
        }
  }

  void pin_v_faces(const std::vector<Face>& faces) {
    for (std::size_t i = 0; i < nodes(); ++i)
      for (const auto& f : faces)
        if (f.axis < grid.dim && f.contains(grid, i)) {
          pin_v[i] = 1;
          v[i] = 1.0;
        }
  }

  bool feasible() const {
    for (std::size_t i = 0; i < nodes(); ++i) {
      if (!(v[i] >= 0.0 && v[i] <= 1.0)) return false;
      if (pin_v[i] && v[i] != 1.0) return false;
    }
    return true;
  }
};

/// Multilinear interpolation of a nodal field at x (clamped to the box).
inline double interpolate(const Grid& g, const std::vector<double>& vals, int comps, int comp,
                          const Eigen::VectorXd& x) {
  std::array<int, 3> base{0, 0, 0};
  std::array<double, 3> t{0, 0, 0};
  for (int a = 0; a < g.dim; ++a) {
    const double s = std::clamp(x(a) / g.h(a), 0.0, static_cast<double>(g.cells[a]));
    base[a] = std::min(static_cast<int>(std::floor(s)), g.cells[a] - 1);
    t[a] = s - base[a];
  }
  double out = 0;
  const int corners = 1 << g.dim;
  for (int c = 0; c < corners; ++c) {
    double w = 1;
    std::array<int, 3> ijk = base;
    for (int a = 0; a < g.dim; ++a) {
      const int bit = (c >> a) & 1;
      ijk[a] += bit;
      w *= bit ? t[a] : 1 - t[a];
    }
    if (w != 0) out += w * vals[g.node_index(ijk[0], ijk[1], ijk[2]) * comps + comp];
  }
  return out;
}

/// Interpolates src onto the grid of dst (values only; pins of dst are kept
/// and re-imposed).
inline void resample_into(const GridField& src, GridField& dst) {
  const Grid& g = dst.grid;
  const int n = g.dim;
  for (std::size_t i = 0; i < dst.nodes(); ++i) {
    const Eigen::VectorXd x = g.node_coord(i);
    if (!dst.pin_u[i])
      for (int c = 0; c < n; ++c) dst.u[i * n + c] = interpolate(src.grid, src.u, n, c, x);
    dst.v[i] = dst.pin_v[i] ? 1.0 : std::clamp(interpolate(src.grid, src.v, 1, 0, x), 0.0, 1.0);
  }
}

namespace detail {

inline std::string fmt_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double x = 0;
  const char* b = s.data();
  const char* e = b + s.size();
  if (b != e && *b == '+') ++b;
  auto res = std::from_chars(b, e, x);
  if (res.ec != std::errc() || res.ptr != e) throw ConfigError("not a number: '" + s + "'");
  return x;
}

}  // namespace detail

/// Text snapshot: header lines, then "i j k u_1 .. u_n v" per node. Values are
/// written in shortest round-trip form.
inline void write_snapshot(std::ostream& os, const GridField& f) {
  const Grid& g = f.grid;
  os << "# pfgamma snapshot\n";
  os << "dim " << g.dim << "\n";
  os << "extents";
  for (int a = 0; a < g.dim; ++a) os << ' ' << detail::fmt_double(g.extents[a]);
  os << "\ncells";
  for (int a = 0; a < g.dim; ++a) os << ' ' << g.cells[a];
  os << "\nnodes " << f.nodes() << "\n";
  for (std::size_t i = 0; i < f.nodes(); ++i) {
    const auto ijk = g.node_ijk(i);
    os << ijk[0] << ' ' << ijk[1] << ' ' << ijk[2];
    for (int c = 0; c < g.dim; ++c) os << ' ' << detail::fmt_double(f.u[i * g.dim + c]);
    os << ' ' << detail::fmt_double(f.v[i]) << '\n';
  }
}

inline GridField read_snapshot(std::istream& is) {
  std::string line, key;
  auto next = [&]() {
    while (std::getline(is, line))
      if (!line.empty() && line[0] != '#') return true;
    throw ConfigError("snapshot: unexpected end of input");
  };
  int dim = 0;
  std::array<double, 3> ext{1, 1, 1};
  std::array<int, 3> cells{1, 1, 1};
  std::size_t count = 0;
  next();
  {
    std::istringstream ss(line);
    ss >> key >> dim;
    if (key != "dim" || dim < 1 || dim > 3) throw ConfigError("snapshot: bad dim line");
  }
  next();
  {
    std::istringstream ss(line);
    ss >> key;
    if (key != "extents") throw ConfigError("snapshot: expected extents");
    for (int a = 0; a < dim; ++a) {
      std::string tok;
      ss >> tok;
      ext[a] = detail::parse_double(tok);
    }
  }
  next();
  {
    std::istringstream ss(line);
    ss >> key;
    if (key != "cells") throw ConfigError("snapshot: expected cells");
    for (int a = 0; a < dim; ++a) ss >> cells[a];
  }
  next();
  {
    std::istringstream ss(line);
    ss >> key >> count;
    if (key != "nodes") throw ConfigError("snapshot: expected nodes");
  }
  GridField f(Grid(dim, ext, cells));
  if (count != f.nodes()) throw ConfigError("snapshot: node count does not match cells");
  for (std::size_t n = 0; n < count; ++n) {
    next();
    std::istringstream ss(line);
    int ijk[3];
    ss >> ijk[0] >> ijk[1] >> ijk[2];
    const std::size_t idx = f.grid.node_index(ijk[0], ijk[1], ijk[2]);
    if (idx >= count) throw ConfigError("snapshot: node index out of range");
    std::string tok;
    for (int c = 0; c < dim; ++c) {
      ss >> tok;
      f.u[idx * dim + c] = detail::parse_double(tok);
    }
    ss >> tok;
    f.v[idx] = detail::parse_double(tok);
  }
  return f;
}

}  // namespace pfgamma
