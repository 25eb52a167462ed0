#include "spdecone/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "spdecone/errors.hpp"

namespace spdecone {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

}  // namespace

QWienerSpec QWienerSpec::cosine(SpacePtr space, int J, std::vector<double> eigenvalues) {
  if (!space) throw InvalidParameter("space", "QWienerSpec needs a space");
  const int n = space->dim();
  if (J < 1 || J > n)
    throw InvalidParameter("J", "factor count must lie in [1, space dimension]");
  if (eigenvalues.empty()) {
    eigenvalues.resize(J);
    double v = 1.0;
    for (int j = 0; j < J; ++j, v *= 0.5) eigenvalues[j] = v;
  }
  if (static_cast<int>(eigenvalues.size()) != J)
    throw InvalidParameter("eigenvalues", "need one eigenvalue per factor");
  for (int j = 0; j < J; ++j) {
    if (!(eigenvalues[j] > 0.0) || !std::isfinite(eigenvalues[j]))
      throw InvalidParameter("eigenvalues", "eigenvalues must be positive and finite");
    if (j > 0 && eigenvalues[j] > eigenvalues[j - 1])
      throw InvalidParameter("eigenvalues", "eigenvalues must be non-increasing");
  }

  QWienerSpec qw;
  qw.space = space;
  qw.eigenvalues = std::move(eigenvalues);
  // Cosine seeds over the flat node index, orthonormalized in the space
  // inner product (two modified Gram-Schmidt sweeps for stability).
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  for (int j = 0; j < J; ++j) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = std::cos(j * kPi * i / denom);
    for (int sweep = 0; sweep < 2; ++sweep)
      for (const auto& e : qw.basis) v -= inner_product(*space, e, v) * e;
    const double nv = norm(*space, v);
    if (nv < 1e-12) throw NoConvergence("degenerate cosine seed in Gram-Schmidt", j);
    qw.basis.push_back(v / nv);
  }
  for (int a = 0; a < J; ++a)
    for (int b = 0; b <= a; ++b) {
      const double g = inner_product(*space, qw.basis[a], qw.basis[b]);
      if (std::abs(g - (a == b ? 1.0 : 0.0)) > 1e-8)
        throw NoConvergence("Q-Wiener basis failed the orthonormality check", a);
    }
  return qw;
}

int SchemeConfig::n_steps() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParameter("dt", "must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw InvalidParameter("horizon", "must be positive");
  const double raw = horizon / dt;
  const int steps = static_cast<int>(std::lround(raw));
  if (steps < 1 || std::abs(steps * dt - horizon) > 1e-9 * std::max(1.0, horizon))
    throw InvalidParameter("dt", "horizon must be an integer number of steps");
  return steps;
}

Eigen::VectorXd sample_qwiener_increment(const QWienerSpec& qw, double dt, Rng& rng) {
  if (!(dt > 0.0)) throw InvalidParameter("dt", "must be positive");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(qw.space->dim());
  for (int j = 0; j < qw.size(); ++j)
    w += std::sqrt(qw.eigenvalues[j] * dt) * rng.normal() * qw.basis[j];
  return w;
}

std::vector<double> sample_jumps(const MarkMeasure& marks, double dt, Rng& rng) {
  if (!(dt > 0.0)) throw InvalidParameter("dt", "must be positive");
  const double mass = marks.total_mass();
  if (mass <= 0.0) return {};
  const int count = rng.poisson(mass * dt);
  std::vector<double> out;
  out.reserve(count);
  for (int c = 0; c < count; ++c) {
    double u = rng.uniform() * mass;
    int pick = marks.size() - 1;
    for (int i = 0; i < marks.size(); ++i) {
      u -= marks.weights[i];
      if (u <= 0.0) {
        pick = i;
        break;
      }
    }
    out.push_back(marks.marks[pick]);
  }
  return out;
}

namespace {

/// One step's stochastic increment (diffusion + compensated jumps),
/// evaluated at `at`. RNG consumption order is fixed: J normals, then the
/// Poisson draws. Both schemes share this so matched seeds stay matched.
Eigen::VectorXd stochastic_increment(const Model& model, const Eigen::VectorXd& at,
                                     double dt, Rng& rng) {
  Eigen::VectorXd inc = Eigen::VectorXd::Zero(at.size());
  for (int j = 0; j < model.qw.size(); ++j) {
    const double xi = rng.normal();
    if (j < static_cast<int>(model.coeffs.sigma.size()))
      inc += std::sqrt(model.qw.eigenvalues[j] * dt) * xi * model.coeffs.sigma[j](at);
  }
  if (model.coeffs.has_jumps()) {
    for (double x : sample_jumps(model.coeffs.marks, dt, rng))
      inc += model.coeffs.eval_gamma(at, x);
    const MarkMeasure& mm = model.coeffs.marks;
    for (int i = 0; i < mm.size(); ++i)
      inc -= dt * mm.weights[i] * model.coeffs.eval_gamma(at, mm.marks[i]);
  }
  return inc;
}

struct StepRecorder {
  const Cone* cone;
  const SchemeConfig* cfg;
  const Space* space;
  PathResult res;
  double cap = 0.0;

  void init(const Model& model, const SchemeConfig& cfg_in, const Cone* cone_in) {
    cone = cone_in;
    cfg = &cfg_in;
    space = model.space.get();
    cap = cfg_in.blowup_cap > 0.0
              ? cfg_in.blowup_cap
              : 1e6 * norm(*space, (model.h0.array() + 1.0).matrix());
    const int steps = cfg_in.n_steps();
    res.times.reserve(steps + 1);
    res.min_node.reserve(steps + 1);
    if (cone) res.cone_dist.reserve(steps + 1);
  }

  void record(double t, const Eigen::VectorXd& r) {
    const double nr = norm(*space, r);
    if (!std::isfinite(nr) || nr > cap) throw BlowUp(nr, cap);
    res.times.push_back(t);
    res.min_node.push_back(r.minCoeff());
    if (cone) {
      const double d = cone_distance(*cone, r);
      res.cone_dist.push_back(d);
      if (res.first_exit < 0.0 && d > cfg->exit_tol * (1.0 + nr)) res.first_exit = t;
    }
    if (cfg->keep_states) res.states.push_back(r);
  }
};

}  // namespace

PathResult simulate_path(const Model& model, const SchemeConfig& cfg, Rng& rng,
                         const Cone* cone) {
  check_same_space(*model.space, *model.sg->space());
  if (model.h0.size() != model.space->dim())
    throw MismatchedSpace("simulate_path: h0 does not match the space");
  const int steps = cfg.n_steps();
  StepRecorder rec;
  rec.init(model, cfg, cone);
  Eigen::VectorXd r = model.h0;
  rec.record(0.0, r);
  for (int k = 0; k < steps; ++k) {
    Eigen::VectorXd u = r;
    u += cfg.dt * model.coeffs.eval_alpha(r);
    u += stochastic_increment(model, r, cfg.dt, rng);
    r = model.sg->apply(cfg.dt, u);
    rec.record((k + 1) * cfg.dt, r);
  }
  rec.res.terminal = std::move(r);
  return std::move(rec.res);
}

namespace {

PathResult yosida_path_impl(const Model& model, const SchemeConfig& cfg, Rng& rng,
                            const Cone* cone, const Eigen::MatrixXd& a_lambda) {
  const int steps = cfg.n_steps();
  const bool projected = cfg.kind == SchemeKind::ProjectedYosidaEuler;
  std::unique_ptr<SchauderProjection> proj;
  if (projected) {
    if (!cone)
      throw InvalidParameter("cone", "projected scheme needs a cone for its projection");
    proj = std::make_unique<SchauderProjection>(schauder_projection(*cone, cfg.level));
  }
  StepRecorder rec;
  rec.init(model, cfg, cone);
  Eigen::VectorXd r = model.h0;
  rec.record(0.0, r);
  for (int k = 0; k < steps; ++k) {
    const Eigen::VectorXd p = projected ? proj->apply(r) : r;
    Eigen::VectorXd drift = a_lambda * p;
    drift += model.coeffs.eval_alpha(p);
    Eigen::VectorXd u = r;
    u += cfg.dt * drift;
    u += stochastic_increment(model, p, cfg.dt, rng);
    r = std::move(u);
    rec.record((k + 1) * cfg.dt, r);
  }
  rec.res.terminal = std::move(r);
  return std::move(rec.res);
}

}  // namespace

PathResult simulate_yosida_path(const Model& model, const SchemeConfig& cfg, Rng& rng,
                                const Cone* cone) {
  check_same_space(*model.space, *model.sg->space());
  if (model.h0.size() != model.space->dim())
    throw MismatchedSpace("simulate_yosida_path: h0 does not match the space");
  if (!(cfg.lambda > model.sg->growth_hint()))
    throw LambdaTooSmall(cfg.lambda, model.sg->growth_hint());
  const Eigen::MatrixXd a_lambda = model.sg->yosida_matrix(cfg.lambda);
  return yosida_path_impl(model, cfg, rng, cone, a_lambda);
}

namespace {

PathResult run_one(const Model& model, const SchemeConfig& cfg, Rng& rng, const Cone* cone,
                   const Eigen::MatrixXd* a_lambda) {
  if (cfg.kind == SchemeKind::ExponentialEuler) return simulate_path(model, cfg, rng, cone);
  if (a_lambda) return yosida_path_impl(model, cfg, rng, cone, *a_lambda);
  return simulate_yosida_path(model, cfg, rng, cone);
}

}  // namespace

MCReport mc_invariance(const Model& model, const Cone& cone, const SchemeConfig& cfg) {
  if (cfg.n_paths < 1) throw InvalidParameter("n_paths", "need at least one path");
  const auto t0 = std::chrono::steady_clock::now();
  Eigen::MatrixXd a_lambda;
  const Eigen::MatrixXd* a_ptr = nullptr;
  if (cfg.kind != SchemeKind::ExponentialEuler) {
    if (!(cfg.lambda > model.sg->growth_hint()))
      throw LambdaTooSmall(cfg.lambda, model.sg->growth_hint());
    a_lambda = model.sg->yosida_matrix(cfg.lambda);
    a_ptr = &a_lambda;
  }
  MCReport rep;
  rep.n_paths = cfg.n_paths;
  rep.seed = cfg.seed;
  rep.exit_histogram.assign(10, 0);
  std::vector<double> max_rel;
  max_rel.reserve(cfg.n_paths);
  int n_exit = 0;
  for (int p = 0; p < cfg.n_paths; ++p) {
    Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(p));
    const PathResult path = run_one(model, cfg, rng, &cone, a_ptr);
    double worst = 0.0;
    for (std::size_t k = 0; k < path.cone_dist.size(); ++k)
      worst = std::max(worst, path.cone_dist[k]);
    max_rel.push_back(worst);
    if (path.first_exit >= 0.0) {
      ++n_exit;
      int bin = static_cast<int>(10.0 * path.first_exit / cfg.horizon);
      bin = std::clamp(bin, 0, 9);
      ++rep.exit_histogram[bin];
    }
  }
  rep.exit_fraction = static_cast<double>(n_exit) / cfg.n_paths;
  std::sort(max_rel.begin(), max_rel.end());
  auto quant = [&](double q) {
    const std::size_t i = static_cast<std::size_t>(q * (max_rel.size() - 1));
    return max_rel[i];
  };
  rep.dist_q50 = quant(0.5);
  rep.dist_q90 = quant(0.9);
  rep.dist_max = max_rel.back();
  rep.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

namespace {

double sup_gap(const Space& sp, const PathResult& a, const PathResult& b) {
  if (a.states.size() != b.states.size())
    throw MismatchedSpace("convergence study: path lengths differ");
  double g = 0.0;
  for (std::size_t k = 0; k < a.states.size(); ++k)
    g = std::max(g, norm(sp, a.states[k] - b.states[k]));
  return g;
}

}  // namespace

std::vector<StudyRow> yosida_convergence_study(const Model& model, const Cone& cone,
                                               SchemeConfig base,
                                               const std::vector<double>& lambdas,
                                               int n_paths) {
  for (std::size_t i = 1; i < lambdas.size(); ++i)
    if (lambdas[i] <= lambdas[i - 1])
      throw InvalidParameter("lambdas", "must be strictly increasing");
  base.keep_states = true;
  std::vector<StudyRow> table;
  for (double lam : lambdas) {
    if (!(lam > model.sg->growth_hint()))
      throw LambdaTooSmall(lam, model.sg->growth_hint());
    SchemeConfig expo = base;
    expo.kind = SchemeKind::ExponentialEuler;
    SchemeConfig yos = base;
    yos.kind = SchemeKind::YosidaEuler;
    yos.lambda = lam;
    const Eigen::MatrixXd a_lambda = model.sg->yosida_matrix(lam);
    double acc = 0.0;
    for (int p = 0; p < n_paths; ++p) {
      Rng r1 = Rng::stream(base.seed, static_cast<std::uint64_t>(p));
      Rng r2 = Rng::stream(base.seed, static_cast<std::uint64_t>(p));
      const PathResult pe = simulate_path(model, expo, r1, &cone);
      const PathResult py = yosida_path_impl(model, yos, r2, &cone, a_lambda);
      acc += sup_gap(*model.space, pe, py);
    }
    table.push_back({lam, acc / n_paths});
  }
  return table;
}

std::vector<StudyRow> projection_convergence_study(const Model& model, const Cone& cone,
                                                   SchemeConfig base, double lambda,
                                                   const std::vector<int>& levels,
                                                   int n_paths) {
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (levels[i] <= levels[i - 1])
      throw InvalidParameter("levels", "must be strictly increasing");
  if (!(lambda > model.sg->growth_hint()))
    throw LambdaTooSmall(lambda, model.sg->growth_hint());
  base.keep_states = true;
  base.lambda = lambda;
  const Eigen::MatrixXd a_lambda = model.sg->yosida_matrix(lambda);
  std::vector<StudyRow> table;
  for (int level : levels) {
    SchemeConfig yos = base;
    yos.kind = SchemeKind::YosidaEuler;
    SchemeConfig pro = base;
    pro.kind = SchemeKind::ProjectedYosidaEuler;
    pro.level = level;
    double acc = 0.0;
    for (int p = 0; p < n_paths; ++p) {
      Rng r1 = Rng::stream(base.seed, static_cast<std::uint64_t>(p));
      Rng r2 = Rng::stream(base.seed, static_cast<std::uint64_t>(p));
      const PathResult py = yosida_path_impl(model, yos, r1, &cone, a_lambda);
      const PathResult pp = yosida_path_impl(model, pro, r2, &cone, a_lambda);
      acc += sup_gap(*model.space, py, pp);
    }
    table.push_back({static_cast<double>(level), acc / n_paths});
  }
  return table;
}

}  // namespace spdecone
