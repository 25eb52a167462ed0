#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "spdecone/cone.hpp"
#include "spdecone/semigroup.hpp"

namespace spdecone {

/// Finite atomic mark measure F = sum_i F_i delta_{x_i}.
struct MarkMeasure {
  std::vector<double> marks;
  std::vector<double> weights;

  static MarkMeasure none() { return {}; }
  static MarkMeasure atoms(std::vector<double> xs, std::vector<double> ws);
  int size() const { return static_cast<int>(marks.size()); }
  double total_mass() const;
};

using DriftOp = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JumpOp = std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)>;
using MarkScalarOp = std::function<double(const Eigen::VectorXd&, double)>;

/// The SPDE data (alpha, sigma^j, gamma, F). Null operations mean zero.
struct CoefficientSet {
  DriftOp alpha;
  std::vector<DriftOp> sigma;
  JumpOp gamma;
  MarkMeasure marks;
  double lipschitz_hint = 1.0;
  double growth_hint = 1.0;

  Eigen::VectorXd eval_alpha(const Eigen::VectorXd& h) const {
    return alpha ? alpha(h) : Eigen::VectorXd::Zero(h.size());
  }
  Eigen::VectorXd eval_gamma(const Eigen::VectorXd& h, double x) const {
    return gamma ? gamma(h, x) : Eigen::VectorXd::Zero(h.size());
  }
  bool has_jumps() const { return gamma && marks.size() > 0; }
};

enum class CheckStatus { PASS, FAIL, INCONCLUSIVE };

const char* to_string(CheckStatus s);

struct ConditionReport {
  std::string name;
  CheckStatus status = CheckStatus::PASS;
  /// Raw worst value: min pairing margin for sign conditions, max |pairing|
  /// for zero conditions, max relative cone distance for the jump test.
  double worst = 0.0;
  int witness_index = -1;
  std::string witness_desc;
  int n_checked = 0;
  std::uint64_t seed = 0;
  Eigen::VectorXd witness_h_star, witness_h;
};

ConditionReport check_jump_condition(const CoefficientSet& coeffs, const Cone& cone,
                                     int n_samples, std::uint64_t seed);
ConditionReport check_volatility_parallel(const CoefficientSet& coeffs, const Cone& cone,
                                          const std::vector<BoundaryPair>& pairs,
                                          double tol = 1e-8);
ConditionReport check_drift_condition(const CoefficientSet& coeffs, const Cone& cone,
                                      const std::vector<BoundaryPair>& pairs,
                                      double tol = 1e-8);
/// Adds the observed small-time rate <h*, S_t h>/t to the drift margin
/// (necessary-direction variant): DIVERGENT pairs pass outright, BOUNDED
/// pairs are inconclusive.
ConditionReport check_drift_condition_with_liminf(const CoefficientSet& coeffs,
                                                  const Semigroup& sg, const Cone& cone,
                                                  const std::vector<BoundaryPair>& pairs,
                                                  double tol = 1e-8);

struct ZeroDriftReport {
  ConditionReport drift;
  ConditionReport jump_pairing;  // max_i |<h*, gamma(h, x_i)>| per pair
  bool sides_agree = true;
};
ZeroDriftReport check_zero_drift_equivalence(const CoefficientSet& coeffs, const Cone& cone,
                                             const std::vector<BoundaryPair>& pairs,
                                             double tol = 1e-8);

ConditionReport check_inward_pointing(const DriftOp& f, const Cone& cone,
                                      const std::vector<BoundaryPair>& pairs,
                                      double tol = 1e-8);
ConditionReport check_parallel(const DriftOp& f, const Cone& cone,
                               const std::vector<BoundaryPair>& pairs, double tol = 1e-8);

/// No-arbitrage drift alpha(h) = sum_j sigma^j(h) (theta_j + Sigma^j(h))
///   - sum_i F_i gamma(h, x_i) (exp(-phi(h, x_i) - Gamma(h, x_i)) - 1)
/// with Sigma^j, Gamma the cumulative trapezoid integrals from the left
/// grid edge.
DriftOp hjm_drift(std::vector<DriftOp> sigma, JumpOp gamma, std::vector<double> theta,
                  MarkScalarOp phi, MarkMeasure marks, SpacePtr space);

/// Cumulative trapezoid integral from the left edge of a 1-D grid.
Eigen::VectorXd cumulative_trapezoid(const GridSpec& grid, const Eigen::VectorXd& v);

enum class Overall { SUFFICIENT_PASS, NECESSARY_FAIL, INCONCLUSIVE };

const char* to_string(Overall o);

struct VerdictConfig {
  int n_pairs = 40;
  int n_jump_samples = 40;
  int n_local_pairs = 16;
  int n_invariance_samples = 16;
  std::uint64_t seed = 1;
  double tol = 1e-8;
  std::vector<double> t_grid = {0.05, 0.25, 1.0};
  std::vector<double> lambda_offsets = {1.0, 10.0};
};

struct VerdictBundle {
  double growth_estimate = 0.0;
  InvarianceReport invariance;
  LocalReport local;
  ConditionReport jump, volatility, drift, drift_liminf;
  Overall overall = Overall::INCONCLUSIVE;
  std::uint64_t seed = 0;
  int n_pairs = 0;
};

VerdictBundle verdict(const Semigroup& sg, const Cone& cone, const CoefficientSet& coeffs,
                      const VerdictConfig& cfg = {});

}  // namespace spdecone
