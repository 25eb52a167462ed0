#pragma once

#include <Eigen/Core>

#include "spdecone/errors.hpp"

namespace spdecone {

/// Uniform grid on an interval or an axis-aligned box in R^2.
/// A degenerate single-node grid is allowed only for scalar components
/// (used by product models whose last factor is a plain real).
struct GridSpec {
  int dim = 1;  // 1 or 2
  double x_lo = 0.0, x_hi = 1.0;
  int nx = 2;
  double y_lo = 0.0, y_hi = 1.0;
  int ny = 1;

  static GridSpec interval(double lo, double hi, int n) {
    if (n < 2) throw InvalidParameter("n_points", "interval grid needs n >= 2");
    if (!(hi > lo)) throw InvalidParameter("x_hi", "needs x_hi > x_lo");
    GridSpec g;
    g.dim = 1;
    g.x_lo = lo;
    g.x_hi = hi;
    g.nx = n;
    return g;
  }

  static GridSpec box(double xlo, double xhi, int nx, double ylo, double yhi, int ny) {
    if (nx < 2 || ny < 2) throw InvalidParameter("n_points", "box grid needs n >= 2 per axis");
    if (!(xhi > xlo) || !(yhi > ylo)) throw InvalidParameter("bounds", "empty box");
    GridSpec g;
    g.dim = 2;
    g.x_lo = xlo;
    g.x_hi = xhi;
    g.nx = nx;
    g.y_lo = ylo;
    g.y_hi = yhi;
    g.ny = ny;
    return g;
  }

  /// Single-point grid carrying one real degree of freedom.
  static GridSpec point(double x = 0.0) {
    GridSpec g;
    g.dim = 1;
    g.x_lo = x;
    g.x_hi = x;
    g.nx = 1;
    return g;
  }

  bool scalar() const { return nx == 1; }
  int size() const { return dim == 2 ? nx * ny : nx; }
  double dx() const { return nx > 1 ? (x_hi - x_lo) / (nx - 1) : 1.0; }
  double dy() const { return ny > 1 ? (y_hi - y_lo) / (ny - 1) : 1.0; }
  double node_x(int i) const { return x_lo + i * dx(); }
  double node_y(int j) const { return y_lo + j * dy(); }
  // Row-major over (i, j): index = i * ny + j.
  int index(int i, int j) const { return i * ny + j; }

  Eigen::VectorXd nodes_x() const {
    Eigen::VectorXd x(nx);
    for (int i = 0; i < nx; ++i) x[i] = node_x(i);
    return x;
  }

  bool operator==(const GridSpec& o) const {
    return dim == o.dim && nx == o.nx && ny == o.ny && x_lo == o.x_lo && x_hi == o.x_hi &&
           (dim == 1 || (y_lo == o.y_lo && y_hi == o.y_hi));
  }

  /// Composite-trapezoid quadrature weights over all nodes (tensorized in 2-D).
  Eigen::VectorXd trapezoid_weights() const {
    if (scalar()) return Eigen::VectorXd::Ones(1);
    auto axis = [](int n, double h) {
      Eigen::VectorXd w = Eigen::VectorXd::Constant(n, h);
      w[0] = w[n - 1] = 0.5 * h;
      return w;
    };
    Eigen::VectorXd wx = axis(nx, dx());
    if (dim == 1) return wx;
    Eigen::VectorXd wy = axis(ny, dy());
    Eigen::VectorXd w(nx * ny);
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) w[index(i, j)] = wx[i] * wy[j];
    return w;
  }
};

inline void require_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw NonFiniteValue(what);
}

}  // namespace spdecone
