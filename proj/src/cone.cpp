#include "spdecone/cone.hpp"

#include <algorithm>
#include <cmath>

namespace spdecone {

namespace {

constexpr int kDykstraCap = 10000;
constexpr double kDykstraTol = 1e-10;

bool is_nonneg_diag(const Cone& c) {
  return c.kind == ConeKind::Nonnegative && c.space->diagonal_metric();
}

std::vector<int> constrained_nodes(const Cone& c) {
  if (!c.mask.empty()) return c.mask;
  std::vector<int> all(c.space->dim());
  for (int i = 0; i < c.space->dim(); ++i) all[i] = i;
  return all;
}

/// Pool-adjacent-violators: ascending isotonic regression, equal weights.
void pava_ascending(Eigen::VectorXd& v) {
  const int m = static_cast<int>(v.size());
  std::vector<double> mean(m), weightv(m);
  std::vector<int> len(m);
  int top = 0;
  for (int i = 0; i < m; ++i) {
    mean[top] = v[i];
    weightv[top] = 1.0;
    len[top] = 1;
    while (top > 0 && mean[top - 1] > mean[top]) {
      double w = weightv[top - 1] + weightv[top];
      mean[top - 1] = (weightv[top - 1] * mean[top - 1] + weightv[top] * mean[top]) / w;
      weightv[top - 1] = w;
      len[top - 1] += len[top];
      --top;
    }
    ++top;
  }
  int pos = 0;
  for (int b = 0; b < top; ++b)
    for (int k = 0; k < len[b]; ++k) v[pos++] = mean[b];
}

/// Dykstra over half-spaces {<g_i, x> >= 0} in the metric of `space`.
Eigen::VectorXd dykstra_halfspaces(const Space& space, const std::vector<Eigen::VectorXd>& gens,
                                   const Eigen::VectorXd& h) {
  const int m = static_cast<int>(gens.size());
  std::vector<double> gg(m);
  for (int i = 0; i < m; ++i) gg[i] = space.inner(gens[i], gens[i]);
  Eigen::VectorXd x = h;
  std::vector<Eigen::VectorXd> p(m, Eigen::VectorXd::Zero(h.size()));
  const double stop = kDykstraTol * (1.0 + space.norm(h));
  for (int cycle = 0; cycle < kDykstraCap; ++cycle) {
    Eigen::VectorXd x_prev = x;
    for (int i = 0; i < m; ++i) {
      Eigen::VectorXd y = x + p[i];
      double c = space.inner(gens[i], y);
      if (c < 0.0 && gg[i] > 0.0)
        x = y - (c / gg[i]) * gens[i];
      else
        x = y;
      p[i] = y - x;
    }
    if (space.norm(x - x_prev) < stop) return x;
  }
  throw NoConvergence("Dykstra half-space projection", kDykstraCap);
}

/// Euclidean Dykstra in R^m over rows of M (constraints M_i . v >= 0).
Eigen::VectorXd dykstra_rows(const Eigen::MatrixXd& M, const Eigen::VectorXd& v0) {
  const int m = static_cast<int>(M.rows());
  Eigen::VectorXd x = v0;
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(m, v0.size());
  std::vector<double> rr(m);
  for (int i = 0; i < m; ++i) rr[i] = M.row(i).squaredNorm();
  const double stop = 1e-12 * (1.0 + v0.norm());
  for (int cycle = 0; cycle < kDykstraCap; ++cycle) {
    Eigen::VectorXd x_prev = x;
    for (int i = 0; i < m; ++i) {
      Eigen::VectorXd y = x + p.row(i).transpose();
      double c = M.row(i).dot(y);
      if (c < 0.0 && rr[i] > 0.0)
        x = y - (c / rr[i]) * M.row(i).transpose();
      else
        x = y;
      p.row(i) = (y - x).transpose();
    }
    if ((x - x_prev).norm() < stop) return x;
  }
  throw NoConvergence("pointwise matrix-cone projection", kDykstraCap);
}

Eigen::VectorXd lift(const Space& prod, int part, const Eigen::VectorXd& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(prod.dim());
  prod.set_part(out, part, v);
  return out;
}

}  // namespace

ConePtr Cone::nonnegative(SpacePtr space, std::vector<int> mask) {
  auto c = std::shared_ptr<Cone>(new Cone);
  c->kind = ConeKind::Nonnegative;
  c->space = std::move(space);
  c->mask = std::move(mask);
  for (int i : c->mask)
    if (i < 0 || i >= c->space->dim()) throw InvalidParameter("mask", "index out of range");
  return c;
}

ConePtr Cone::halfspace_system(SpacePtr space, std::vector<Eigen::VectorXd> gens) {
  auto c = std::shared_ptr<Cone>(new Cone);
  c->kind = ConeKind::HalfspaceSystem;
  c->space = std::move(space);
  c->gens = std::move(gens);
  for (const auto& g : c->gens)
    if (g.size() != c->space->dim()) throw MismatchedSpace("generator length");
  return c;
}

ConePtr Cone::product(std::vector<ConePtr> parts) {
  if (parts.empty()) throw InvalidParameter("parts", "empty product cone");
  auto c = std::shared_ptr<Cone>(new Cone);
  c->kind = ConeKind::Product;
  std::vector<SpacePtr> spaces;
  for (const auto& p : parts) spaces.push_back(p->space);
  c->space = Space::product(std::move(spaces));
  c->parts = std::move(parts);
  return c;
}

ConePtr Cone::matrix_transformed(Eigen::MatrixXd M, std::vector<ConePtr> base) {
  const int m = static_cast<int>(base.size());
  if (M.rows() != m || M.cols() != m) throw InvalidParameter("M", "shape must match base count");
  for (const auto& b : base) {
    if (b->kind != ConeKind::Nonnegative || !b->mask.empty())
      throw UnsupportedCone("matrix-transformed base cones must be plain Nonnegative");
    if (!b->space->same_as(*base[0]->space))
      throw MismatchedSpace("matrix-transformed components must share one space");
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  double scale = M.cwiseAbs().maxCoeff();
  if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-10 * std::pow(scale, m))
    throw SingularTransform("matrix-transformed coupling matrix");
  auto c = std::shared_ptr<Cone>(new Cone);
  c->kind = ConeKind::MatrixTransformed;
  std::vector<SpacePtr> spaces;
  for (const auto& b : base) spaces.push_back(b->space);
  c->space = Space::product(std::move(spaces));
  c->parts = std::move(base);
  c->M = std::move(M);
  return c;
}

ConePtr Cone::monotone_chain(ConePtr base, int m, bool with_floor) {
  if (m < 1) throw InvalidParameter("m", "chain needs at least one component");
  if (base->kind != ConeKind::Nonnegative || !base->space->diagonal_metric())
    throw UnsupportedCone("monotone chain base must be Nonnegative over a diagonal-metric space");
  auto c = std::shared_ptr<Cone>(new Cone);
  c->kind = ConeKind::MonotoneChain;
  std::vector<SpacePtr> spaces(m, base->space);
  c->space = Space::product(std::move(spaces));
  c->parts.assign(m, base);
  c->chain_m = m;
  c->with_floor = with_floor;
  return c;
}

ConePtr Cone::filipovic_monotone(SpacePtr space) {
  if (space->kind != SpaceKind::Filipovic)
    throw UnsupportedCone("FilipovicMonotone needs a Filipovic space");
  auto c = std::shared_ptr<Cone>(new Cone);
  c->kind = ConeKind::FilipovicMonotone;
  c->space = std::move(space);
  return c;
}

bool cone_contains(const Cone& cone, const Eigen::VectorXd& h, double tol) {
  if (h.size() != cone.space->dim()) throw MismatchedSpace("cone_contains vector length");
  require_finite(h, "cone_contains");
  switch (cone.kind) {
    case ConeKind::Nonnegative: {
      for (int i : constrained_nodes(cone))
        if (h[i] < -tol) return false;
      return true;
    }
    case ConeKind::HalfspaceSystem: {
      double scale = 1.0 + cone.space->norm(h);
      for (const auto& g : cone.gens)
        if (cone.space->inner(g, h) < -tol * scale * std::max(1.0, cone.space->norm(g)))
          return false;
      return true;
    }
    case ConeKind::Product: {
      for (int j = 0; j < static_cast<int>(cone.parts.size()); ++j)
        if (!cone_contains(*cone.parts[j], cone.space->part_of(h, j), tol)) return false;
      return true;
    }
    case ConeKind::MatrixTransformed: {
      const int m = static_cast<int>(cone.parts.size());
      for (int i = 0; i < m; ++i) {
        Eigen::VectorXd u = Eigen::VectorXd::Zero(cone.parts[0]->space->dim());
        for (int k = 0; k < m; ++k) u += cone.M(i, k) * cone.space->part_of(h, k);
        if (!cone_contains(*cone.parts[i], u, tol)) return false;
      }
      return true;
    }
    case ConeKind::MonotoneChain: {
      const int m = cone.chain_m;
      if (cone.with_floor && cone.space->part_of(h, 0).minCoeff() < -tol) return false;
      for (int i = 0; i + 1 < m; ++i)
        if ((cone.space->part_of(h, i + 1) - cone.space->part_of(h, i)).minCoeff() < -tol)
          return false;
      return true;
    }
    case ConeKind::FilipovicMonotone: {
      auto [a, f] = filipovic_extract(*cone.space, h);
      return a >= -tol && (f.size() == 0 || f.minCoeff() >= -tol);
    }
  }
  throw UnsupportedCone("unknown kind");
}

Eigen::VectorXd cone_project(const Cone& cone, const Eigen::VectorXd& h) {
  if (h.size() != cone.space->dim()) throw MismatchedSpace("cone_project vector length");
  require_finite(h, "cone_project");
  switch (cone.kind) {
    case ConeKind::Nonnegative: {
      if (cone.space->diagonal_metric()) {
        Eigen::VectorXd out = h;
        for (int i : constrained_nodes(cone)) out[i] = std::max(0.0, out[i]);
        return out;
      }
      // Non-diagonal metric (Filipovic): Dykstra over point-evaluation
      // half-spaces h(x_k) >= 0.
      std::vector<Eigen::VectorXd> gens;
      for (int i = 0; i < cone.space->grid.nx; ++i)
        gens.push_back(point_eval_functional(*cone.space, i));
      return dykstra_halfspaces(*cone.space, gens, h);
    }
    case ConeKind::HalfspaceSystem:
      return dykstra_halfspaces(*cone.space, cone.gens, h);
    case ConeKind::Product: {
      Eigen::VectorXd out(h.size());
      for (int j = 0; j < static_cast<int>(cone.parts.size()); ++j)
        cone.space->set_part(out, j, cone_project(*cone.parts[j], cone.space->part_of(h, j)));
      return out;
    }
    case ConeKind::MatrixTransformed: {
      // The coupling acts node-by-node across components with one shared
      // metric weight per node, so the projection decouples per node.
      const int m = static_cast<int>(cone.parts.size());
      const int nc = cone.parts[0]->space->dim();
      Eigen::VectorXd out(h.size());
      Eigen::VectorXd v(m);
      for (int t = 0; t < nc; ++t) {
        for (int k = 0; k < m; ++k) v[k] = h[cone.space->offsets[k] + t];
        Eigen::VectorXd w = dykstra_rows(cone.M, v);
        for (int k = 0; k < m; ++k) out[cone.space->offsets[k] + t] = w[k];
      }
      return out;
    }
    case ConeKind::MonotoneChain: {
      const int m = cone.chain_m;
      const int nc = cone.parts[0]->space->dim();
      Eigen::VectorXd out(h.size());
      Eigen::VectorXd v(m);
      for (int t = 0; t < nc; ++t) {
        for (int k = 0; k < m; ++k) v[k] = h[cone.space->offsets[k] + t];
        pava_ascending(v);
        if (cone.with_floor)
          for (int k = 0; k < m; ++k) v[k] = std::max(0.0, v[k]);
        for (int k = 0; k < m; ++k) out[cone.space->offsets[k] + t] = v[k];
      }
      return out;
    }
    case ConeKind::FilipovicMonotone: {
      // Exact in the isometric coordinates (a, f): both constraints are
      // coordinate half-lines of a diagonal metric.
      auto [a, f] = filipovic_extract(*cone.space, h);
      a = std::max(0.0, a);
      f = f.cwiseMax(0.0);
      return filipovic_embed(*cone.space, a, f);
    }
  }
  throw UnsupportedCone("unknown kind");
}

double cone_distance(const Cone& cone, const Eigen::VectorXd& h) {
  return cone.space->norm(h - cone_project(cone, h));
}

std::vector<Eigen::VectorXd> generating_system(const Cone& cone, int resolution) {
  if (resolution < 1) throw InvalidParameter("resolution", "needs resolution >= 1");
  std::vector<Eigen::VectorXd> out;
  switch (cone.kind) {
    case ConeKind::Nonnegative: {
      if (cone.space->diagonal_metric()) {
        auto nodes = constrained_nodes(cone);
        const int nb = std::min<int>(resolution, static_cast<int>(nodes.size()));
        Eigen::VectorXd q = cone.space->metric_diag();
        for (int b = 0; b < nb; ++b) {
          size_t lo = nodes.size() * b / nb, hi = nodes.size() * (b + 1) / nb;
          Eigen::VectorXd g = Eigen::VectorXd::Zero(cone.space->dim());
          for (size_t k = lo; k < hi; ++k) g[nodes[k]] = 1.0;
          out.push_back(g / cone.space->norm(g));
        }
        return out;
      }
      // Filipovic nonnegative cone: point-evaluation functionals.
      const int n = cone.space->grid.nx;
      const int nb = std::min(resolution, n);
      for (int b = 0; b < nb; ++b) {
        int i = (n - 1) * b / std::max(1, nb - 1);
        if (nb == 1) i = 0;
        Eigen::VectorXd g = point_eval_functional(*cone.space, i);
        out.push_back(g / cone.space->norm(g));
      }
      return out;
    }
    case ConeKind::HalfspaceSystem:
      return cone.gens;
    case ConeKind::Product: {
      for (int j = 0; j < static_cast<int>(cone.parts.size()); ++j)
        for (const auto& g : generating_system(*cone.parts[j], resolution))
          out.push_back(lift(*cone.space, j, g));
      return out;
    }
    case ConeKind::MatrixTransformed: {
      const int m = static_cast<int>(cone.parts.size());
      for (int i = 0; i < m; ++i) {
        for (const auto& g : generating_system(*cone.parts[i], resolution)) {
          // S delta_i g* with S the blockwise adjoint of R h = M h.
          Eigen::VectorXd v = Eigen::VectorXd::Zero(cone.space->dim());
          for (int k = 0; k < m; ++k) cone.space->set_part(v, k, cone.M(i, k) * g);
          out.push_back(v);
        }
      }
      return out;
    }
    case ConeKind::MonotoneChain: {
      const int m = cone.chain_m;
      if (cone.with_floor)
        for (const auto& g : generating_system(*cone.parts[0], resolution))
          out.push_back(lift(*cone.space, 0, g));
      for (int i = 0; i + 1 < m; ++i)
        for (const auto& g : generating_system(*cone.parts[i], resolution)) {
          Eigen::VectorXd v = lift(*cone.space, i + 1, g);
          cone.space->set_part(v, i, -g);
          out.push_back(v);
        }
      return out;
    }
    case ConeKind::FilipovicMonotone: {
      const int n = cone.space->grid.nx;
      out.push_back(Eigen::VectorXd::Ones(n));  // representer of h -> h(x_lo)
      const int nb = std::min(resolution, n - 1);
      for (int b = 0; b < nb; ++b) {
        int c = (n - 2) * b / std::max(1, nb - 1);
        if (nb == 1) c = 0;
        Eigen::VectorXd f = Eigen::VectorXd::Zero(n - 1);
        f[c] = 1.0;
        Eigen::VectorXd g = filipovic_embed(*cone.space, 0.0, f);
        out.push_back(g / cone.space->norm(g));
      }
      return out;
    }
  }
  throw UnsupportedCone("unknown kind");
}

namespace {

// Contiguous zero-window pair for nonnegative cones over diagonal metrics:
// h vanishes on a window Z, h* is the node indicator at the centre of Z,
// so the supports are disjoint and the pairing is exactly zero.
BoundaryPair nonneg_window_pair(const Cone& cone, Rng& rng) {
  auto nodes = constrained_nodes(cone);
  const int nL = static_cast<int>(nodes.size());
  if (nL < 1) throw Exhausted("nonnegative cone without constrained nodes");
  if (nL == 1) {
    // Single constrained node (scalar factor): the only boundary profile
    // vanishes there and is free elsewhere.
    BoundaryPair bp;
    bp.h = Eigen::VectorXd::Zero(cone.space->dim());
    for (int i = 0; i < cone.space->dim(); ++i) bp.h[i] = std::abs(rng.normal());
    bp.h[nodes[0]] = 0.0;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(cone.space->dim());
    g[nodes[0]] = 1.0;
    bp.h_star = g / cone.space->norm(g);
    bp.pairing = cone.space->inner(bp.h_star, bp.h);
    return bp;
  }
  int wid;
  if (nL >= 16)
    wid = nL / 4 + static_cast<int>(rng.below(std::max<long>(1, nL / 4)));
  else
    wid = 1 + static_cast<int>(rng.below(std::max<long>(1, nL - 1)));
  wid = std::min(wid, nL - 1);
  int start = static_cast<int>(rng.below(nL - wid));
  BoundaryPair bp;
  bp.h = Eigen::VectorXd::Zero(cone.space->dim());
  for (int i = 0; i < cone.space->dim(); ++i) bp.h[i] = std::abs(rng.normal());
  for (int k = start; k < start + wid; ++k) bp.h[nodes[k]] = 0.0;
  int centre = nodes[start + wid / 2];
  Eigen::VectorXd g = Eigen::VectorXd::Zero(cone.space->dim());
  g[centre] = 1.0;
  bp.h_star = g / cone.space->norm(g);
  bp.pairing = cone.space->inner(bp.h_star, bp.h);
  return bp;
}

// Filipovic nonnegative cone: delta_x pairs. Even pairs use the cusp
// profile min((x - x_j)^{3/4}, 1) whose difference quotients blow up at
// x_j; odd pairs use a random curve that is flat through x_j.
BoundaryPair filipovic_nonneg_pair(const Cone& cone, Rng& rng, bool cusp) {
  const auto& sp = *cone.space;
  const int n = sp.grid.nx;
  int j = static_cast<int>(rng.below(std::max(1, n / 2)));
  BoundaryPair bp;
  bp.h_star = point_eval_functional(sp, j);
  bp.h_star /= sp.norm(bp.h_star);
  bp.h.resize(n);
  if (cusp) {
    double xj = sp.grid.node_x(j);
    for (int i = 0; i < n; ++i) {
      double d = sp.grid.node_x(i) - xj;
      bp.h[i] = d <= 0.0 ? 0.0 : std::min(std::pow(d, 0.75), 1.0);
    }
  } else {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n - 1);
    for (int c = j; c < n - 1; ++c) f[c] = std::abs(rng.normal());
    bp.h = filipovic_embed(sp, 0.0, f);
    for (int i = 0; i < j; ++i) bp.h[i] = 0.0;
  }
  bp.pairing = sp.inner(bp.h_star, bp.h);
  return bp;
}

BoundaryPair filipovic_monotone_pair(const Cone& cone, Rng& rng) {
  const auto& sp = *cone.space;
  const int n = sp.grid.nx;
  Eigen::VectorXd f(n - 1);
  for (int c = 0; c < n - 1; ++c) f[c] = std::abs(rng.normal());
  BoundaryPair bp;
  if (rng.below(2) == 0 || n < 3) {
    bp.h = filipovic_embed(sp, 0.0, f);
    bp.h_star = Eigen::VectorXd::Ones(n);
  } else {
    int c0 = static_cast<int>(rng.below(n - 1));
    f[c0] = 0.0;
    bp.h = filipovic_embed(sp, std::abs(rng.normal()), f);
    Eigen::VectorXd fc = Eigen::VectorXd::Zero(n - 1);
    fc[c0] = 1.0;
    Eigen::VectorXd g = filipovic_embed(sp, 0.0, fc);
    bp.h_star = g / sp.norm(g);
  }
  bp.pairing = sp.inner(bp.h_star, bp.h);
  return bp;
}

BoundaryPair halfspace_pair(const Cone& cone, Rng& rng) {
  if (cone.gens.empty()) throw Exhausted("half-space system without generators");
  const auto& sp = *cone.space;
  for (int attempt = 0; attempt < 32; ++attempt) {
    const Eigen::VectorXd& g = cone.gens[rng.below(static_cast<long>(cone.gens.size()))];
    double gg = sp.inner(g, g);
    if (gg <= 0.0) continue;
    Eigen::VectorXd x(sp.dim());
    for (int i = 0; i < sp.dim(); ++i) x[i] = rng.normal();
    // Alternate between the cone and the hyperplane <g, .> = 0.
    for (int it = 0; it < 200; ++it) {
      x = cone_project(cone, x);
      double pr = sp.inner(g, x);
      if (std::abs(pr) <= 1e-12 * (1.0 + sp.norm(x))) break;
      x -= (pr / gg) * g;
    }
    x = cone_project(cone, x);
    double pr = sp.inner(g, x);
    double scale = (1.0 + sp.norm(x)) * std::max(1.0, sp.norm(g));
    if (std::abs(pr) <= 1e-10 * scale && sp.norm(x) > 1e-8) {
      BoundaryPair bp;
      bp.h_star = g;
      bp.h = x;
      bp.pairing = pr;
      return bp;
    }
  }
  throw Exhausted("no nontrivial boundary pair found for half-space system");
}

}  // namespace

Eigen::VectorXd sample_in_cone(const Cone& cone, Rng& rng) {
  const auto& sp = *cone.space;
  switch (cone.kind) {
    case ConeKind::Nonnegative: {
      Eigen::VectorXd h(sp.dim());
      for (int i = 0; i < sp.dim(); ++i) h[i] = std::abs(rng.normal());
      if (!sp.diagonal_metric()) {
        // smooth-ish nonnegative curve on the Filipovic grid
        Eigen::VectorXd f(sp.grid.nx - 1);
        for (int c = 0; c < f.size(); ++c) f[c] = rng.normal();
        h = filipovic_embed(sp, rng.normal(), f).cwiseAbs();
      }
      return h;
    }
    case ConeKind::FilipovicMonotone: {
      Eigen::VectorXd f(sp.grid.nx - 1);
      for (int c = 0; c < f.size(); ++c) f[c] = std::abs(rng.normal());
      return filipovic_embed(sp, std::abs(rng.normal()), f);
    }
    case ConeKind::Product: {
      Eigen::VectorXd h(sp.dim());
      for (int j = 0; j < static_cast<int>(cone.parts.size()); ++j) {
        Eigen::VectorXd part = sample_in_cone(*cone.parts[j], rng);
        sp.set_part(h, j, part);
      }
      return h;
    }
    case ConeKind::MatrixTransformed: {
      const int m = static_cast<int>(cone.parts.size());
      Eigen::MatrixXd Minv = cone.M.fullPivLu().inverse();
      std::vector<Eigen::VectorXd> g(m);
      for (int k = 0; k < m; ++k) g[k] = sample_in_cone(*cone.parts[k], rng);
      Eigen::VectorXd h(sp.dim());
      for (int i = 0; i < m; ++i) {
        Eigen::VectorXd hi = Eigen::VectorXd::Zero(cone.parts[0]->space->dim());
        for (int k = 0; k < m; ++k) hi += Minv(i, k) * g[k];
        sp.set_part(h, i, hi);
      }
      return h;
    }
    case ConeKind::MonotoneChain: {
      const int nc = cone.parts[0]->space->dim();
      Eigen::VectorXd prev(nc);
      for (int t = 0; t < nc; ++t)
        prev[t] = cone.with_floor ? std::abs(rng.normal()) : rng.normal();
      Eigen::VectorXd h(sp.dim());
      sp.set_part(h, 0, prev);
      for (int i = 1; i < cone.chain_m; ++i) {
        for (int t = 0; t < nc; ++t) prev[t] += std::abs(rng.normal());
        sp.set_part(h, i, prev);
      }
      return h;
    }
    case ConeKind::HalfspaceSystem: {
      Eigen::VectorXd x(sp.dim());
      for (int i = 0; i < sp.dim(); ++i) x[i] = rng.normal();
      return cone_project(cone, x);
    }
  }
  throw UnsupportedCone("unknown kind");
}

std::vector<BoundaryPair> sample_boundary_pairs(const Cone& cone, int count,
                                                std::uint64_t rng_seed) {
  if (count < 1) throw InvalidParameter("count", "needs count >= 1");
  std::vector<BoundaryPair> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    Rng rng = Rng::stream(rng_seed, static_cast<std::uint64_t>(k));
    switch (cone.kind) {
      case ConeKind::Nonnegative:
        out.push_back(cone.space->diagonal_metric() ? nonneg_window_pair(cone, rng)
                                                    : filipovic_nonneg_pair(cone, rng, k % 2 == 0));
        break;
      case ConeKind::FilipovicMonotone:
        out.push_back(filipovic_monotone_pair(cone, rng));
        break;
      case ConeKind::HalfspaceSystem:
        out.push_back(halfspace_pair(cone, rng));
        break;
      case ConeKind::Product: {
        int j = static_cast<int>(rng.below(static_cast<long>(cone.parts.size())));
        auto sub = sample_boundary_pairs(*cone.parts[j], 1,
                                         rng_seed ^ (0x51ed2700fabcULL + 7919 * k + j));
        BoundaryPair bp;
        bp.h_star = lift(*cone.space, j, sub[0].h_star);
        bp.h = Eigen::VectorXd::Zero(cone.space->dim());
        for (int i = 0; i < static_cast<int>(cone.parts.size()); ++i) {
          Eigen::VectorXd part =
              (i == j) ? sub[0].h : sample_in_cone(*cone.parts[i], rng);
          cone.space->set_part(bp.h, i, part);
        }
        bp.pairing = cone.space->inner(bp.h_star, bp.h);
        out.push_back(std::move(bp));
        break;
      }
      case ConeKind::MatrixTransformed: {
        const int m = static_cast<int>(cone.parts.size());
        int i = static_cast<int>(rng.below(m));
        auto sub = sample_boundary_pairs(*cone.parts[i], 1,
                                         rng_seed ^ (0xabcdef12345ULL + 104729 * k + i));
        Eigen::MatrixXd Minv = cone.M.fullPivLu().inverse();
        std::vector<Eigen::VectorXd> g(m);
        for (int kk = 0; kk < m; ++kk)
          g[kk] = (kk == i) ? sub[0].h : sample_in_cone(*cone.parts[kk], rng);
        BoundaryPair bp;
        bp.h = Eigen::VectorXd::Zero(cone.space->dim());
        for (int r = 0; r < m; ++r) {
          Eigen::VectorXd hr = Eigen::VectorXd::Zero(cone.parts[0]->space->dim());
          for (int kk = 0; kk < m; ++kk) hr += Minv(r, kk) * g[kk];
          cone.space->set_part(bp.h, r, hr);
        }
        bp.h_star = Eigen::VectorXd::Zero(cone.space->dim());
        for (int kk = 0; kk < m; ++kk)
          cone.space->set_part(bp.h_star, kk, cone.M(i, kk) * sub[0].h_star);
        bp.pairing = cone.space->inner(bp.h_star, bp.h);
        out.push_back(std::move(bp));
        break;
      }
      case ConeKind::MonotoneChain: {
        const int m = cone.chain_m;
        const int nc = cone.parts[0]->space->dim();
        if (nc < 2) throw Exhausted("chain component too small");
        int wid = nc >= 16 ? nc / 4 + static_cast<int>(rng.below(std::max<long>(1, nc / 4)))
                           : 1 + static_cast<int>(rng.below(std::max<long>(1, nc - 1)));
        wid = std::min(wid, nc - 1);
        int start = static_cast<int>(rng.below(nc - wid));
        int centre = start + wid / 2;
        if (!cone.with_floor && m < 2) throw Exhausted("floorless single-component chain");
        int link = cone.with_floor ? static_cast<int>(rng.below(m))
                                   : 1 + static_cast<int>(rng.below(m - 1));
        BoundaryPair bp;
        bp.h = Eigen::VectorXd::Zero(cone.space->dim());
        Eigen::VectorXd level = Eigen::VectorXd::Zero(nc);
        for (int i = 0; i < m; ++i) {
          for (int t = 0; t < nc; ++t) {
            double inc = std::abs(rng.normal());
            // link == i means the step from component i-1 (or the floor)
            // to component i is flattened on the window
            if (i == link && t >= start && t < start + wid) inc = 0.0;
            if (i == 0 && link != 0) inc += 0.1;  // keep off the floor unless targeted
            level[t] += inc;
          }
          cone.space->set_part(bp.h, i, level);
        }
        Eigen::VectorXd g = Eigen::VectorXd::Zero(nc);
        g[centre] = 1.0;
        g /= cone.parts[0]->space->norm(g);
        bp.h_star = lift(*cone.space, link, g);
        if (link > 0) cone.space->set_part(bp.h_star, link - 1, -g);
        bp.pairing = cone.space->inner(bp.h_star, bp.h);
        out.push_back(std::move(bp));
        break;
      }
    }
  }
  for (auto& bp : out) {
    double scale = (1.0 + cone.space->norm(bp.h)) * std::max(1.0, cone.space->norm(bp.h_star));
    if (std::abs(bp.pairing) > 1e-10 * scale) throw NotBoundaryPair(bp.pairing);
  }
  return out;
}

ConePtr transform_cone(const Eigen::MatrixXd& T, const Cone& base) {
  const int n = base.space->dim();
  if (T.rows() != n || T.cols() != n) throw MismatchedSpace("transform size");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(T);
  if (!lu.isInvertible()) throw SingularTransform("transform_cone T");
  Eigen::MatrixXd G = base.space->gram_matrix();
  Eigen::MatrixXd Tt = T.transpose();
  Eigen::PartialPivLU<Eigen::MatrixXd> luT(Tt);
  Eigen::PartialPivLU<Eigen::MatrixXd> luG(G);
  std::vector<Eigen::VectorXd> gens;
  for (const auto& g : generating_system(base, n)) {
    // S g = G^{-1} T^{-T} G g  (the adjoint-inverse in the space metric)
    Eigen::VectorXd u = G * g;
    Eigen::VectorXd v = luT.solve(u);
    gens.push_back(luG.solve(v));
  }
  return Cone::halfspace_system(base.space, std::move(gens));
}

SchauderProjection::SchauderProjection(SpacePtr space, int level) : space_(std::move(space)), level_(level) {
  if (level < 1) throw InvalidParameter("level", "needs level >= 1");
  if (!space_->diagonal_metric() || space_->kind == SpaceKind::Product)
    throw UnsupportedSpace("dyadic projection needs a diagonal-metric grid space");
  quad_ = space_->metric_diag();
  // Recursive index bisection per axis; nesting across levels by construction.
  auto split = [](int n, int lev) {
    std::vector<std::pair<int, int>> ranges{{0, n}};
    for (int l = 0; l < lev; ++l) {
      std::vector<std::pair<int, int>> next;
      for (auto [lo, hi] : ranges) {
        int mid = (lo + hi) / 2;
        if (mid > lo && mid < hi) {
          next.push_back({lo, mid});
          next.push_back({mid, hi});
        } else {
          next.push_back({lo, hi});
        }
      }
      ranges = std::move(next);
    }
    return ranges;
  };
  const GridSpec& g = space_->grid;
  if (g.dim == 1) {
    for (auto [lo, hi] : split(g.nx, level)) {
      std::vector<int> cell;
      for (int i = lo; i < hi; ++i) cell.push_back(i);
      cells_.push_back(std::move(cell));
    }
  } else {
    auto rx = split(g.nx, level), ry = split(g.ny, level);
    for (auto [xlo, xhi] : rx)
      for (auto [ylo, yhi] : ry) {
        std::vector<int> cell;
        for (int i = xlo; i < xhi; ++i)
          for (int j = ylo; j < yhi; ++j) cell.push_back(g.index(i, j));
        cells_.push_back(std::move(cell));
      }
  }
}

Eigen::VectorXd SchauderProjection::apply(const Eigen::VectorXd& h) const {
  if (h.size() != space_->dim()) throw MismatchedSpace("projection vector length");
  Eigen::VectorXd out(h.size());
  for (const auto& cell : cells_) {
    // Exact on cell-constant data: the weighted mean of equal values is
    // that value, with no rounding.
    bool flat = true;
    for (int i : cell)
      if (h[i] != h[cell.front()]) {
        flat = false;
        break;
      }
    double mean;
    if (flat) {
      mean = h[cell.front()];
    } else {
      double num = 0.0, den = 0.0;
      for (int i : cell) {
        num += quad_[i] * h[i];
        den += quad_[i];
      }
      mean = den > 0.0 ? num / den : 0.0;
    }
    for (int i : cell) out[i] = mean;
  }
  return out;
}

SchauderProjection schauder_projection(const Cone& cone, int level) {
  if (cone.kind != ConeKind::Nonnegative || !cone.mask.empty())
    throw UnsupportedCone("dyadic projection is defined for the plain nonnegative cone");
  return SchauderProjection(cone.space, level);
}

}  // namespace spdecone
