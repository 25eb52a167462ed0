#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "spdecone/rng.hpp"
#include "spdecone/space.hpp"

namespace spdecone {

enum class ConeKind {
  Nonnegative,
  HalfspaceSystem,
  Product,
  MatrixTransformed,
  MonotoneChain,
  FilipovicMonotone,
};

class Cone;
using ConePtr = std::shared_ptr<const Cone>;

/// Closed convex cone over a discretized space. Immutable.
class Cone {
 public:
  ConeKind kind;
  SpacePtr space;  // ambient space

  // Nonnegative: optional node mask (empty = all nodes constrained).
  std::vector<int> mask;
  // HalfspaceSystem: generating functionals as space elements.
  std::vector<Eigen::VectorXd> gens;
  // Product / MatrixTransformed / MonotoneChain component cones.
  std::vector<ConePtr> parts;
  // MatrixTransformed coupling matrix (m x m).
  Eigen::MatrixXd M;
  // MonotoneChain.
  int chain_m = 0;
  bool with_floor = true;

  static ConePtr nonnegative(SpacePtr space, std::vector<int> mask = {});
  static ConePtr halfspace_system(SpacePtr space, std::vector<Eigen::VectorXd> gens);
  static ConePtr product(std::vector<ConePtr> parts);
  /// K = { h : sum_k M_ik h_k in base_i for all i }; base cones must be
  /// Nonnegative over one common component space.
  static ConePtr matrix_transformed(Eigen::MatrixXd M, std::vector<ConePtr> base);
  /// Chain h_1 <= h_2 <= ... <= h_m in the pointwise order of `base`'s
  /// space, with 0 <= h_1 when with_floor.
  static ConePtr monotone_chain(ConePtr base, int m, bool with_floor);
  /// { h : h(x_lo) >= 0 and h' >= 0 } over a Filipovic space.
  static ConePtr filipovic_monotone(SpacePtr space);

 private:
  Cone() = default;
};

struct BoundaryPair {
  Eigen::VectorXd h_star;
  Eigen::VectorXd h;
  double pairing = 0.0;
};

/// Conditional-expectation averaging over dyadic index cells at a fixed
/// level; idempotent, 1-Lipschitz, maps the nonnegative cone into itself.
class SchauderProjection {
 public:
  SchauderProjection(SpacePtr space, int level);
  Eigen::VectorXd apply(const Eigen::VectorXd& h) const;
  int level() const { return level_; }
  int n_cells() const { return static_cast<int>(cells_.size()); }

 private:
  SpacePtr space_;
  int level_;
  std::vector<std::vector<int>> cells_;
  Eigen::VectorXd quad_;
};

bool cone_contains(const Cone& cone, const Eigen::VectorXd& h, double tol = 1e-9);
Eigen::VectorXd cone_project(const Cone& cone, const Eigen::VectorXd& h);
double cone_distance(const Cone& cone, const Eigen::VectorXd& h);
std::vector<Eigen::VectorXd> generating_system(const Cone& cone, int resolution);
std::vector<BoundaryPair> sample_boundary_pairs(const Cone& cone, int count,
                                                std::uint64_t rng_seed);
/// Random element of K (used by checkers and invariance diagnostics).
Eigen::VectorXd sample_in_cone(const Cone& cone, Rng& rng);
/// Image cone T K of `base` under an invertible matrix T on the whole
/// discretized space, represented as a half-space system with generators
/// S g* = G^{-1} T^{-T} G g* (G the Gram matrix).
ConePtr transform_cone(const Eigen::MatrixXd& T, const Cone& base);
SchauderProjection schauder_projection(const Cone& cone, int level);

}  // namespace spdecone
