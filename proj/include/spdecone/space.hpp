#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "spdecone/grid.hpp"

namespace spdecone {

/// Weight w(x) for weighted L^2 and Filipovic norms.
struct WeightFunction {
  enum class Kind { One, Exponential, Custom };
  Kind kind = Kind::One;
  double beta = 0.0;                 // Exponential: w(x) = exp(beta * x)
  std::function<double(double)> fn;  // Custom

  static WeightFunction one() { return {}; }
  static WeightFunction exponential(double beta) {
    WeightFunction w;
    w.kind = Kind::Exponential;
    w.beta = beta;
    return w;
  }
  static WeightFunction custom(std::function<double(double)> f) {
    WeightFunction w;
    w.kind = Kind::Custom;
    w.fn = std::move(f);
    return w;
  }

  double operator()(double x) const;
  bool same_as(const WeightFunction& o) const { return kind == o.kind && beta == o.beta; }
};

enum class SpaceKind { PlainL2, WeightedL2, Filipovic, Product };

class Space;
using SpacePtr = std::shared_ptr<const Space>;

/// Discretized Hilbert space over a grid. Immutable after construction.
///
/// PlainL2 / WeightedL2 carry a diagonal metric (quadrature weights, times
/// w at the nodes for the weighted case). The Filipovic space stores node
/// values of curves h on [x_lo, x_hi] with
///   <f, g> = f(x0) g(x0) + sum_cells dx * f'_c g'_c w(mid_c),
/// where f'_c is the first difference over cell c. The coordinates
/// (f(x0), f' w^{1/2} on cells) are an exact isometry onto R x L2(cells).
class Space : public std::enable_shared_from_this<Space> {
 public:
  SpaceKind kind;
  GridSpec grid;          // undefined for Product
  WeightFunction weight;  // WeightedL2 / Filipovic
  Eigen::VectorXd quad;   // diagonal metric (PlainL2/WeightedL2)
  Eigen::VectorXd cell_w; // Filipovic: w at the nx-1 cell midpoints
  std::vector<SpacePtr> parts;  // Product
  std::vector<int> offsets;     // Product: part j occupies [offsets[j], offsets[j+1])

  static SpacePtr plain_l2(const GridSpec& g);
  /// Midpoint-rule L2 space over the nx-1 cell midpoints of `parent`
  /// (the companion in the Filipovic isometry R x L2).
  static SpacePtr l2_cells(const GridSpec& parent);
  static SpacePtr weighted_l2(const GridSpec& g, WeightFunction w);
  static SpacePtr filipovic(const GridSpec& g, WeightFunction w);
  /// One real degree of freedom with unit metric.
  static SpacePtr scalar(double x = 0.0);
  static SpacePtr product(std::vector<SpacePtr> parts);

  int dim() const;
  bool diagonal_metric() const { return kind != SpaceKind::Filipovic; }
  /// Diagonal of the Gram matrix; throws UnsupportedSpace for Filipovic.
  Eigen::VectorXd metric_diag() const;
  Eigen::MatrixXd gram_matrix() const;

  double inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const;
  double norm(const Eigen::VectorXd& f) const;

  /// Filipovic companion space (L2 over cells), else throws.
  SpacePtr companion() const;

  bool same_as(const Space& o) const;
  std::string describe() const;

  int n_parts() const { return static_cast<int>(parts.size()); }
  Eigen::VectorXd part_of(const Eigen::VectorXd& v, int j) const;
  void set_part(Eigen::VectorXd& v, int j, const Eigen::VectorXd& pv) const;

 private:
  Space() = default;
};

/// A grid function together with its owning space.
struct GridFunction {
  SpacePtr space;
  Eigen::VectorXd values;
};

// --- module operations ---------------------------------------------------

double inner_product(const Space& space, const Eigen::VectorXd& f, const Eigen::VectorXd& g);
double norm(const Space& space, const Eigen::VectorXd& f);

/// T(a, f) = a + int_{x0}^{.} f w^{-1/2} dx evaluated with the cell midpoint
/// rule; f lives on the companion cell grid (length nx - 1).
Eigen::VectorXd filipovic_embed(const Space& space, double a, const Eigen::VectorXd& f);
/// Inverse of filipovic_embed: (h(x0), h' w^{1/2} on cells).
std::pair<double, Eigen::VectorXd> filipovic_extract(const Space& space,
                                                     const Eigen::VectorXd& h);
/// Riesz representer of h -> h(x) at grid node index i.
Eigen::VectorXd point_eval_functional(const Space& space, int node_index);

enum class DirectSumPart { Constants, ZeroAtBase };
Eigen::VectorXd direct_sum_project(const Space& space, const Eigen::VectorXd& h,
                                   DirectSumPart part);

void check_same_space(const Space& a, const Space& b);

}  // namespace spdecone
