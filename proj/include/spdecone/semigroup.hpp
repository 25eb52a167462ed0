#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "spdecone/cone.hpp"
#include "spdecone/space.hpp"

namespace spdecone {

class Semigroup;
using SemigroupPtr = std::shared_ptr<const Semigroup>;

/// A concrete C0-semigroup S_t with resolvent R_lambda = (lambda - A)^{-1}
/// and Yosida approximation A_lambda = lambda^2 R_lambda - lambda.
/// Immutable; apply/resolvent are pure.
class Semigroup {
 public:
  virtual ~Semigroup() = default;

  const SpacePtr& space() const { return space_; }
  /// Pseudo-contractivity hint beta with ||S_t|| <= e^{beta t}.
  double growth_hint() const { return beta_; }
  virtual std::string name() const = 0;

  Eigen::VectorXd apply(double t, const Eigen::VectorXd& h) const;
  Eigen::VectorXd resolvent(double lambda, const Eigen::VectorXd& h) const;
  virtual Eigen::VectorXd yosida(double lambda, const Eigen::VectorXd& h) const;

  /// Generic Laplace-transform quadrature of the resolvent (diagnostic
  /// cross-check for variants that have a closed-form route).
  Eigen::VectorXd resolvent_quadrature(double lambda, const Eigen::VectorXd& h,
                                       int n_steps = 1600) const;
  /// Dense A_lambda, assembled column by column (build once, then share).
  Eigen::MatrixXd yosida_matrix(double lambda) const;

  /// Smallest time at which grid-scale structure still responds to S_t
  /// (shift >= dx for transport, diffusion length well below dx for heat).
  /// Sets the floor of the dyadic sequence in default_liminf_times.
  virtual double liminf_time_floor() const;

  static SemigroupPtr identity(SpacePtr space);
  /// S_t h(x) = h(x + t v); 1-D needs v > 0, 2-D takes (vx, vy).
  static SemigroupPtr translation(SpacePtr space, double vx, double vy = 0.0);
  /// Gaussian convolution on the truncated box (free-space heat kernel).
  static SemigroupPtr heat_full(SpacePtr space, double conductivity);
  /// Heat flow with Dirichlet boundary, discrete sine spectral expansion;
  /// max_modes = 0 keeps the full discrete spectrum (positivity-exact).
  static SemigroupPtr dirichlet_heat(SpacePtr space, double conductivity, int max_modes = 0);
  /// Generator B = alpha A + mu Id, so T_t = e^{mu t} S_{alpha t}.
  static SemigroupPtr affine_scaled(SemigroupPtr inner, double alpha, double mu);
  static SemigroupPtr product(std::vector<SemigroupPtr> components);

 protected:
  virtual Eigen::VectorXd do_apply(double t, const Eigen::VectorXd& h) const = 0;
  virtual Eigen::VectorXd do_resolvent(double lambda, const Eigen::VectorXd& h) const;

  SpacePtr space_;
  double beta_ = 0.0;
};

Eigen::VectorXd apply_semigroup(const Semigroup& sg, double t, const Eigen::VectorXd& h);
Eigen::VectorXd resolvent(const Semigroup& sg, double lambda, const Eigen::VectorXd& h);
Eigen::VectorXd yosida_apply(const Semigroup& sg, double lambda, const Eigen::VectorXd& h);

/// Max over sampled h and t of log(||S_t h|| / ||h||)/t, clamped at 0.
double growth_bound(const Semigroup& sg, int n_samples, const std::vector<double>& t_grid,
                    std::uint64_t seed = 1);

struct InvarianceReport {
  double max_semigroup_distance = 0.0;
  double max_resolvent_distance = 0.0;
  bool pass = true;
};
InvarianceReport semigroup_cone_invariance_check(const Semigroup& sg, const Cone& cone,
                                                 int n_samples,
                                                 const std::vector<double>& t_grid,
                                                 const std::vector<double>& lambda_grid,
                                                 std::uint64_t seed = 1);

enum class LiminfClass { VANISHING, BOUNDED, DIVERGENT };

struct LiminfResult {
  std::vector<double> times;
  std::vector<double> values;  // <h*, S_t h> / t
  LiminfClass cls = LiminfClass::BOUNDED;
  double slope = 0.0;  // fitted log-log slope
};

/// Default dyadic time sequence t_k = 2^{-k}, k = 2..K, with K chosen so
/// the smallest shift stays resolvable on the grid.
std::vector<double> default_liminf_times(const Semigroup& sg);

LiminfResult liminf_rate(const Semigroup& sg, const Eigen::VectorXd& h_star,
                         const Eigen::VectorXd& h, std::vector<double> t_sequence = {});

enum class LocalVerdict { LOCAL, NOT_LOCAL, INCONCLUSIVE };

struct LocalReport {
  LocalVerdict verdict = LocalVerdict::INCONCLUSIVE;
  int n_vanishing = 0, n_bounded = 0, n_divergent = 0;
};

LocalReport local_semigroup_test(const Semigroup& sg, const Cone& cone, int n_pairs,
                                 std::uint64_t seed = 1);

}  // namespace spdecone
