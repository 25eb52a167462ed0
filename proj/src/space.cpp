#include "spdecone/space.hpp"

#include <cmath>

namespace spdecone {

double WeightFunction::operator()(double x) const {
  switch (kind) {
    case Kind::One:
      return 1.0;
    case Kind::Exponential:
      return std::exp(beta * x);
    case Kind::Custom:
      return fn(x);
  }
  return 1.0;
}

SpacePtr Space::plain_l2(const GridSpec& g) {
  auto s = std::shared_ptr<Space>(new Space);
  s->kind = SpaceKind::PlainL2;
  s->grid = g;
  s->quad = g.trapezoid_weights();
  return s;
}

SpacePtr Space::l2_cells(const GridSpec& parent) {
  if (parent.dim != 1 || parent.nx < 2)
    throw InvalidParameter("grid", "cell companion needs a 1-D grid with >= 2 nodes");
  auto s = std::shared_ptr<Space>(new Space);
  s->kind = SpaceKind::PlainL2;
  double dx = parent.dx();
  s->grid = GridSpec::interval(parent.x_lo + 0.5 * dx, parent.x_hi - 0.5 * dx,
                               parent.nx - 1 >= 2 ? parent.nx - 1 : 2);
  s->grid.nx = parent.nx - 1;  // allow a single cell
  s->quad = Eigen::VectorXd::Constant(parent.nx - 1, dx);
  return s;
}

SpacePtr Space::weighted_l2(const GridSpec& g, WeightFunction w) {
  auto s = std::shared_ptr<Space>(new Space);
  s->kind = SpaceKind::WeightedL2;
  s->grid = g;
  s->weight = std::move(w);
  s->quad = g.trapezoid_weights();
  // The weight is a function of the first coordinate (all shipped models
  // weight in time-to-maturity / the x axis only).
  for (int i = 0; i < s->quad.size(); ++i) {
    double x = g.dim == 2 ? g.node_x(i / g.ny) : g.node_x(i);
    s->quad[i] *= s->weight(x);
    if (!(s->quad[i] > 0)) throw InvalidParameter("weight", "w must be positive on the grid");
  }
  return s;
}

SpacePtr Space::filipovic(const GridSpec& g, WeightFunction w) {
  if (g.dim != 1 || g.nx < 2)
    throw InvalidParameter("grid", "Filipovic space needs a 1-D grid with >= 2 nodes");
  auto s = std::shared_ptr<Space>(new Space);
  s->kind = SpaceKind::Filipovic;
  s->grid = g;
  s->weight = std::move(w);
  s->cell_w.resize(g.nx - 1);
  for (int c = 0; c < g.nx - 1; ++c) {
    double mid = g.node_x(c) + 0.5 * g.dx();
    s->cell_w[c] = s->weight(mid);
    if (!(s->cell_w[c] >= 1.0))
      throw InvalidParameter("weight", "Filipovic weight must satisfy w >= 1");
  }
  return s;
}

SpacePtr Space::scalar(double x) { return plain_l2(GridSpec::point(x)); }

SpacePtr Space::product(std::vector<SpacePtr> parts) {
  if (parts.empty()) throw InvalidParameter("parts", "product of zero spaces");
  auto s = std::shared_ptr<Space>(new Space);
  s->kind = SpaceKind::Product;
  s->parts = std::move(parts);
  s->offsets.resize(s->parts.size() + 1);
  s->offsets[0] = 0;
  for (size_t j = 0; j < s->parts.size(); ++j)
    s->offsets[j + 1] = s->offsets[j] + s->parts[j]->dim();
  return s;
}

int Space::dim() const {
  if (kind == SpaceKind::Product) return offsets.back();
  return grid.size();
}

Eigen::VectorXd Space::metric_diag() const {
  switch (kind) {
    case SpaceKind::PlainL2:
    case SpaceKind::WeightedL2:
      return quad;
    case SpaceKind::Product: {
      Eigen::VectorXd d(dim());
      for (int j = 0; j < n_parts(); ++j)
        d.segment(offsets[j], parts[j]->dim()) = parts[j]->metric_diag();
      return d;
    }
    case SpaceKind::Filipovic:
      throw UnsupportedSpace("Filipovic metric is not diagonal in node coordinates");
  }
  throw UnsupportedSpace("unknown kind");
}

Eigen::MatrixXd Space::gram_matrix() const {
  const int n = dim();
  if (diagonal_metric()) return metric_diag().asDiagonal();
  Eigen::MatrixXd g(n, n);
  Eigen::VectorXd ei = Eigen::VectorXd::Zero(n), ej = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    ei.setZero();
    ei[i] = 1.0;
    for (int j = 0; j <= i; ++j) {
      ej.setZero();
      ej[j] = 1.0;
      g(i, j) = g(j, i) = inner(ei, ej);
    }
  }
  return g;
}

double Space::inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const {
  switch (kind) {
    case SpaceKind::PlainL2:
    case SpaceKind::WeightedL2:
      return (f.array() * g.array() * quad.array()).sum();
    case SpaceKind::Filipovic: {
      const double dx = grid.dx();
      double acc = f[0] * g[0];
      for (int c = 0; c + 1 < grid.nx; ++c) {
        double df = (f[c + 1] - f[c]) / dx;
        double dg = (g[c + 1] - g[c]) / dx;
        acc += dx * df * dg * cell_w[c];
      }
      return acc;
    }
    case SpaceKind::Product: {
      double acc = 0.0;
      for (int j = 0; j < n_parts(); ++j)
        acc += parts[j]->inner(f.segment(offsets[j], parts[j]->dim()),
                               g.segment(offsets[j], parts[j]->dim()));
      return acc;
    }
  }
  throw UnsupportedSpace("unknown kind");
}

double Space::norm(const Eigen::VectorXd& f) const { return std::sqrt(std::max(0.0, inner(f, f))); }

SpacePtr Space::companion() const {
  if (kind != SpaceKind::Filipovic)
    throw UnsupportedSpace("companion() is only defined for Filipovic spaces");
  return l2_cells(grid);
}

bool Space::same_as(const Space& o) const {
  if (kind != o.kind) return false;
  if (kind == SpaceKind::Product) {
    if (n_parts() != o.n_parts()) return false;
    for (int j = 0; j < n_parts(); ++j)
      if (!parts[j]->same_as(*o.parts[j])) return false;
    return true;
  }
  return grid == o.grid && weight.same_as(o.weight);
}

std::string Space::describe() const {
  switch (kind) {
    case SpaceKind::PlainL2:
      return "PlainL2[" + std::to_string(dim()) + "]";
    case SpaceKind::WeightedL2:
      return "WeightedL2[" + std::to_string(dim()) + "]";
    case SpaceKind::Filipovic:
      return "Filipovic[" + std::to_string(dim()) + "]";
    case SpaceKind::Product: {
      std::string s = "Product(";
      for (int j = 0; j < n_parts(); ++j) s += (j ? "," : "") + parts[j]->describe();
      return s + ")";
    }
  }
  return "?";
}

Eigen::VectorXd Space::part_of(const Eigen::VectorXd& v, int j) const {
  return v.segment(offsets[j], parts[j]->dim());
}

void Space::set_part(Eigen::VectorXd& v, int j, const Eigen::VectorXd& pv) const {
  v.segment(offsets[j], parts[j]->dim()) = pv;
}

void check_same_space(const Space& a, const Space& b) {
  if (!a.same_as(b)) throw MismatchedSpace(a.describe() + " vs " + b.describe());
}

double inner_product(const Space& space, const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
  if (f.size() != space.dim() || g.size() != space.dim())
    throw MismatchedSpace("vector length does not match " + space.describe());
  require_finite(f, "inner_product lhs");
  require_finite(g, "inner_product rhs");
  return space.inner(f, g);
}

double norm(const Space& space, const Eigen::VectorXd& f) {
  if (f.size() != space.dim()) throw MismatchedSpace("vector length vs " + space.describe());
  require_finite(f, "norm");
  return space.norm(f);
}

Eigen::VectorXd filipovic_embed(const Space& space, double a, const Eigen::VectorXd& f) {
  if (space.kind != SpaceKind::Filipovic) throw UnsupportedSpace("embed needs Filipovic");
  const int n = space.grid.nx;
  if (f.size() != n - 1) throw MismatchedSpace("companion vector length");
  if (!std::isfinite(a)) throw NonFiniteValue("embed scalar");
  require_finite(f, "embed companion");
  const double dx = space.grid.dx();
  Eigen::VectorXd h(n);
  h[0] = a;
  for (int c = 0; c + 1 < n; ++c) h[c + 1] = h[c] + dx * f[c] / std::sqrt(space.cell_w[c]);
  return h;
}

std::pair<double, Eigen::VectorXd> filipovic_extract(const Space& space,
                                                     const Eigen::VectorXd& h) {
  if (space.kind != SpaceKind::Filipovic) throw UnsupportedSpace("extract needs Filipovic");
  const int n = space.grid.nx;
  if (h.size() != n) throw MismatchedSpace("vector length");
  require_finite(h, "extract");
  const double dx = space.grid.dx();
  Eigen::VectorXd f(n - 1);
  for (int c = 0; c + 1 < n; ++c)
    f[c] = (h[c + 1] - h[c]) / dx * std::sqrt(space.cell_w[c]);
  return {h[0], f};
}

Eigen::VectorXd point_eval_functional(const Space& space, int node_index) {
  if (space.kind != SpaceKind::Filipovic)
    throw UnsupportedSpace("point evaluation is unbounded on L2-type spaces");
  const int n = space.grid.nx;
  if (node_index < 0 || node_index >= n) throw InvalidParameter("node_index", "out of range");
  const double dx = space.grid.dx();
  // Kernel of h -> h(x_k): delta(xi) = 1 + int_0^{min(xi, x_k)} w^{-1} dx.
  Eigen::VectorXd d(n);
  d[0] = 1.0;
  for (int c = 0; c + 1 < n; ++c)
    d[c + 1] = d[c] + (c < node_index ? dx / space.cell_w[c] : 0.0);
  return d;
}

Eigen::VectorXd direct_sum_project(const Space& space, const Eigen::VectorXd& h,
                                   DirectSumPart part) {
  if (space.kind != SpaceKind::Filipovic) throw UnsupportedSpace("direct sum needs Filipovic");
  if (h.size() != space.dim()) throw MismatchedSpace("vector length");
  require_finite(h, "direct_sum_project");
  if (part == DirectSumPart::Constants)
    return Eigen::VectorXd::Constant(h.size(), h[0]);
  return h - Eigen::VectorXd::Constant(h.size(), h[0]);
}

}  // namespace spdecone
