#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "spdecone/conditions.hpp"
#include "spdecone/cone.hpp"
#include "spdecone/rng.hpp"
#include "spdecone/semigroup.hpp"

namespace spdecone {

/// Finite-rank Q-Wiener driver: increments Delta W = sum_j sqrt(lambda_j dt) xi_j e_j
/// with {e_j} orthonormal in the space inner product and lambda_j decreasing.
struct QWienerSpec {
  SpacePtr space;
  std::vector<double> eigenvalues;
  std::vector<Eigen::VectorXd> basis;

  int size() const { return static_cast<int>(eigenvalues.size()); }
  /// Gram-Schmidt of low-frequency cosine seeds; default eigenvalues 2^{1-j}.
  static QWienerSpec cosine(SpacePtr space, int J, std::vector<double> eigenvalues = {});
};

enum class SchemeKind { ExponentialEuler, YosidaEuler, ProjectedYosidaEuler };

struct SchemeConfig {
  SchemeKind kind = SchemeKind::ExponentialEuler;
  double dt = 1e-3;
  double horizon = 1.0;
  double lambda = 0.0;  // Yosida parameter
  int level = 4;        // projection level
  std::uint64_t seed = 1;
  int n_paths = 200;
  double exit_tol = 1e-6;
  double blowup_cap = 0.0;      // 0 picks 1e6 * ||h0 + 1||
  bool keep_states = false;     // retain the full state trace (studies)

  int n_steps() const;
};

struct PathResult {
  std::vector<double> times;
  std::vector<double> cone_dist;  // empty when no cone was supplied
  std::vector<double> min_node;
  double first_exit = -1.0;  // negative = never exited
  Eigen::VectorXd terminal;
  std::vector<Eigen::VectorXd> states;  // only with keep_states
};

struct MCReport {
  int n_paths = 0;
  double exit_fraction = 0.0;
  double dist_q50 = 0.0, dist_q90 = 0.0, dist_max = 0.0;
  std::vector<int> exit_histogram;  // 10 uniform bins over [0, T]
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;  // wall clock, excluded from serialized output
};

struct Model {
  SpacePtr space;
  SemigroupPtr sg;
  CoefficientSet coeffs;
  QWienerSpec qw;
  Eigen::VectorXd h0;
};

Eigen::VectorXd sample_qwiener_increment(const QWienerSpec& qw, double dt, Rng& rng);
std::vector<double> sample_jumps(const MarkMeasure& marks, double dt, Rng& rng);

/// Exponential Euler on the mild form: one semigroup application per step
/// over the fully updated state (drift + diffusion + compensated jumps).
PathResult simulate_path(const Model& model, const SchemeConfig& cfg, Rng& rng,
                         const Cone* cone = nullptr);
/// Explicit Euler on the Yosida-approximated strong form, drift
/// A_lambda(p) + alpha(p) with p the (optionally projected) state; the
/// noise pipeline consumes the rng in exactly the same order as
/// simulate_path.
PathResult simulate_yosida_path(const Model& model, const SchemeConfig& cfg, Rng& rng,
                                const Cone* cone = nullptr);

MCReport mc_invariance(const Model& model, const Cone& cone, const SchemeConfig& cfg);

struct StudyRow {
  double param = 0.0;     // lambda or level
  double mean_gap = 0.0;  // mean over paths of sup_t space-norm gap
};

std::vector<StudyRow> yosida_convergence_study(const Model& model, const Cone& cone,
                                               SchemeConfig base,
                                               const std::vector<double>& lambdas,
                                               int n_paths);
std::vector<StudyRow> projection_convergence_study(const Model& model, const Cone& cone,
                                                   SchemeConfig base, double lambda,
                                                   const std::vector<int>& levels,
                                                   int n_paths);

}  // namespace spdecone
