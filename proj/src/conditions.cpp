#include "spdecone/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spdecone/errors.hpp"

namespace spdecone {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void describe_pair_witness(ConditionReport& rep, const std::vector<BoundaryPair>& pairs,
                           int idx, const std::string& what) {
  rep.witness_index = idx;
  rep.witness_desc = what;
  if (idx >= 0 && idx < static_cast<int>(pairs.size())) {
    rep.witness_h_star = pairs[idx].h_star;
    rep.witness_h = pairs[idx].h;
  }
}

}  // namespace

MarkMeasure MarkMeasure::atoms(std::vector<double> xs, std::vector<double> ws) {
  if (xs.size() != ws.size())
    throw InvalidParameter("marks", "mark and weight lists differ in length");
  for (double w : ws)
    if (!(w > 0.0) || !std::isfinite(w))
      throw InvalidParameter("marks", "mark weights must be positive and finite");
  for (double x : xs)
    if (!std::isfinite(x)) throw InvalidParameter("marks", "mark must be finite");
  MarkMeasure m;
  m.marks = std::move(xs);
  m.weights = std::move(ws);
  return m;
}

double MarkMeasure::total_mass() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::PASS: return "PASS";
    case CheckStatus::FAIL: return "FAIL";
    default: return "INCONCLUSIVE";
  }
}

const char* to_string(Overall o) {
  switch (o) {
    case Overall::SUFFICIENT_PASS: return "SUFFICIENT-PASS";
    case Overall::NECESSARY_FAIL: return "NECESSARY-FAIL";
    default: return "INCONCLUSIVE";
  }
}

ConditionReport check_jump_condition(const CoefficientSet& coeffs, const Cone& cone,
                                     int n_samples, std::uint64_t seed) {
  ConditionReport rep;
  rep.name = "jump";
  rep.seed = seed;
  if (!coeffs.has_jumps()) {
    rep.status = CheckStatus::PASS;
    rep.witness_desc = "no jump part";
    return rep;
  }
  // Mix interior samples with the K-side elements of boundary pairs so the
  // test sees both regimes.
  std::vector<Eigen::VectorXd> points;
  Rng rng = Rng::stream(seed, 0x6a756d70u);
  const int n_interior = std::max(1, n_samples / 2);
  for (int i = 0; i < n_interior; ++i) points.push_back(sample_in_cone(cone, rng));
  const int n_boundary = std::max(1, n_samples - n_interior);
  try {
    for (const auto& bp : sample_boundary_pairs(cone, n_boundary, seed ^ 0x9e3779b9u))
      points.push_back(bp.h);
  } catch (const Exhausted&) {
    // A cone without boundary structure; interior samples still apply.
  }
  double worst = 0.0;
  for (std::size_t s = 0; s < points.size(); ++s) {
    const Eigen::VectorXd& h = points[s];
    const double scale = 1.0 + norm(*cone.space, h);
    for (int i = 0; i < coeffs.marks.size(); ++i) {
      const Eigen::VectorXd step = h + coeffs.eval_gamma(h, coeffs.marks.marks[i]);
      const double d = cone_distance(cone, step) / scale;
      ++rep.n_checked;
      if (d > worst) {
        worst = d;
        rep.witness_index = static_cast<int>(s);
        rep.witness_desc = "h + gamma(h, x) leaves the cone at mark index " +
                           std::to_string(i);
        rep.witness_h = h;
      }
    }
  }
  rep.worst = worst;
  rep.status = worst <= 1e-6 ? CheckStatus::PASS : CheckStatus::FAIL;
  if (rep.status == CheckStatus::PASS) rep.witness_desc.clear();
  return rep;
}

ConditionReport check_volatility_parallel(const CoefficientSet& coeffs, const Cone& cone,
                                          const std::vector<BoundaryPair>& pairs,
                                          double tol) {
  ConditionReport rep;
  rep.name = "volatility";
  const Space& sp = *cone.space;
  double worst = 0.0;
  bool fail = false;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const double hs_norm = norm(sp, pairs[p].h_star);
    for (std::size_t j = 0; j < coeffs.sigma.size(); ++j) {
      const Eigen::VectorXd sj = coeffs.sigma[j](pairs[p].h);
      const double v = inner_product(sp, pairs[p].h_star, sj);
      const double scale = 1.0 + hs_norm * norm(sp, sj);
      ++rep.n_checked;
      if (std::abs(v) > worst) {
        worst = std::abs(v);
        describe_pair_witness(rep, pairs, static_cast<int>(p),
                              "<h*, sigma^" + std::to_string(j) + "(h)> nonzero");
      }
      if (std::abs(v) > tol * scale) fail = true;
    }
  }
  rep.worst = worst;
  rep.status = fail ? CheckStatus::FAIL : CheckStatus::PASS;
  if (!fail) {
    rep.witness_index = -1;
    rep.witness_desc.clear();
    rep.witness_h_star.resize(0);
    rep.witness_h.resize(0);
  }
  return rep;
}

namespace {

double drift_margin(const CoefficientSet& coeffs, const Space& sp, const BoundaryPair& bp) {
  double m = inner_product(sp, bp.h_star, coeffs.eval_alpha(bp.h));
  for (int i = 0; i < coeffs.marks.size(); ++i)
    m -= coeffs.marks.weights[i] *
         inner_product(sp, bp.h_star, coeffs.eval_gamma(bp.h, coeffs.marks.marks[i]));
  return m;
}

double drift_scale(const CoefficientSet& coeffs, const Space& sp, const BoundaryPair& bp) {
  double s = norm(sp, coeffs.eval_alpha(bp.h));
  for (int i = 0; i < coeffs.marks.size(); ++i)
    s += coeffs.marks.weights[i] *
         norm(sp, coeffs.eval_gamma(bp.h, coeffs.marks.marks[i]));
  return 1.0 + norm(sp, bp.h_star) * s;
}

}  // namespace

ConditionReport check_drift_condition(const CoefficientSet& coeffs, const Cone& cone,
                                      const std::vector<BoundaryPair>& pairs, double tol) {
  ConditionReport rep;
  rep.name = "drift";
  const Space& sp = *cone.space;
  double worst = kInf;
  bool fail = false;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const double m = drift_margin(coeffs, sp, pairs[p]);
    ++rep.n_checked;
    if (m < worst) {
      worst = m;
      describe_pair_witness(rep, pairs, static_cast<int>(p),
                            "<h*, alpha(h)> - sum_i F_i <h*, gamma(h, x_i)> negative");
    }
    if (m < -tol * drift_scale(coeffs, sp, pairs[p])) fail = true;
  }
  if (pairs.empty()) worst = 0.0;
  rep.worst = worst;
  rep.status = fail ? CheckStatus::FAIL : CheckStatus::PASS;
  if (!fail) {
    rep.witness_desc.clear();
  }
  return rep;
}

ConditionReport check_drift_condition_with_liminf(const CoefficientSet& coeffs,
                                                  const Semigroup& sg, const Cone& cone,
                                                  const std::vector<BoundaryPair>& pairs,
                                                  double tol) {
  check_same_space(*sg.space(), *cone.space);
  ConditionReport rep;
  rep.name = "drift+liminf";
  const Space& sp = *cone.space;
  double worst = kInf;
  bool fail = false, inconclusive = false;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    ++rep.n_checked;
    const LiminfResult lr = liminf_rate(sg, pairs[p].h_star, pairs[p].h);
    if (lr.cls == LiminfClass::DIVERGENT) continue;  // the rate term dominates
    if (lr.cls == LiminfClass::BOUNDED) {
      // A finite nonzero rate shifts the margin by an amount this test
      // cannot pin down, so the pair is not decisive either way.
      inconclusive = true;
      continue;
    }
    const double m = drift_margin(coeffs, sp, pairs[p]) +
                     (lr.values.empty() ? 0.0 : lr.values.back());
    if (m < worst) {
      worst = m;
      describe_pair_witness(rep, pairs, static_cast<int>(p),
                            "drift margin plus vanishing rate term negative");
    }
    if (m < -tol * drift_scale(coeffs, sp, pairs[p])) fail = true;
  }
  if (!std::isfinite(worst)) worst = 0.0;
  rep.worst = worst;
  if (fail)
    rep.status = CheckStatus::FAIL;
  else if (inconclusive)
    rep.status = CheckStatus::INCONCLUSIVE;
  else
    rep.status = CheckStatus::PASS;
  if (rep.status != CheckStatus::FAIL) rep.witness_desc.clear();
  return rep;
}

ZeroDriftReport check_zero_drift_equivalence(const CoefficientSet& coeffs, const Cone& cone,
                                             const std::vector<BoundaryPair>& pairs,
                                             double tol) {
  const Space& sp = *cone.space;
  for (const auto& bp : pairs) {
    const Eigen::VectorXd a = coeffs.eval_alpha(bp.h);
    const double an = norm(sp, a);
    if (an > 1e-12 * (1.0 + norm(sp, bp.h))) throw AlphaNotZero(an);
  }
  ZeroDriftReport out;
  out.drift = check_drift_condition(coeffs, cone, pairs, tol);

  ConditionReport& zp = out.jump_pairing;
  zp.name = "jump-pairing-zero";
  double worst = 0.0;
  bool fail = false;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const double hs_norm = norm(sp, pairs[p].h_star);
    for (int i = 0; i < coeffs.marks.size(); ++i) {
      const Eigen::VectorXd g = coeffs.eval_gamma(pairs[p].h, coeffs.marks.marks[i]);
      const double v = inner_product(sp, pairs[p].h_star, g);
      const double scale = 1.0 + hs_norm * norm(sp, g);
      ++zp.n_checked;
      if (std::abs(v) > worst) {
        worst = std::abs(v);
        describe_pair_witness(zp, pairs, static_cast<int>(p),
                              "<h*, gamma(h, x_i)> nonzero at mark index " +
                                  std::to_string(i));
      }
      if (std::abs(v) > tol * scale) fail = true;
    }
  }
  zp.worst = worst;
  zp.status = fail ? CheckStatus::FAIL : CheckStatus::PASS;
  if (!fail) zp.witness_desc.clear();
  out.sides_agree = (out.drift.status == CheckStatus::PASS) == (zp.status == CheckStatus::PASS);
  return out;
}

ConditionReport check_inward_pointing(const DriftOp& f, const Cone& cone,
                                      const std::vector<BoundaryPair>& pairs, double tol) {
  CoefficientSet c;
  c.alpha = f;
  ConditionReport rep = check_drift_condition(c, cone, pairs, tol);
  rep.name = "inward";
  return rep;
}

ConditionReport check_parallel(const DriftOp& f, const Cone& cone,
                               const std::vector<BoundaryPair>& pairs, double tol) {
  CoefficientSet c;
  c.sigma.push_back(f);
  ConditionReport rep = check_volatility_parallel(c, cone, pairs, tol);
  rep.name = "parallel";
  return rep;
}

Eigen::VectorXd cumulative_trapezoid(const GridSpec& grid, const Eigen::VectorXd& v) {
  if (grid.dim != 1) throw UnsupportedSpace("cumulative_trapezoid needs a 1-D grid");
  if (v.size() != grid.size())
    throw MismatchedSpace("cumulative_trapezoid: length does not match grid");
  Eigen::VectorXd out(v.size());
  out[0] = 0.0;
  const double dx = grid.dx();
  for (Eigen::Index i = 1; i < v.size(); ++i)
    out[i] = out[i - 1] + 0.5 * dx * (v[i - 1] + v[i]);
  return out;
}

DriftOp hjm_drift(std::vector<DriftOp> sigma, JumpOp gamma, std::vector<double> theta,
                  MarkScalarOp phi, MarkMeasure marks, SpacePtr space) {
  if (!space) throw InvalidParameter("space", "hjm_drift needs a space");
  if (space->grid.dim != 1)
    throw UnsupportedSpace("hjm_drift is defined on 1-D grids");
  if (theta.size() != sigma.size())
    throw InvalidParameter("theta", "one market price of risk per factor");
  if (gamma && !phi)
    throw InvalidParameter("phi", "jump part needs the mark exponent phi");
  const GridSpec grid = space->grid;
  return [sigma = std::move(sigma), gamma = std::move(gamma), theta = std::move(theta),
          phi = std::move(phi), marks = std::move(marks),
          grid](const Eigen::VectorXd& h) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(h.size());
    for (std::size_t j = 0; j < sigma.size(); ++j) {
      const Eigen::VectorXd sj = sigma[j](h);
      const Eigen::VectorXd big = cumulative_trapezoid(grid, sj);
      a.array() += sj.array() * (theta[j] + big.array());
    }
    if (gamma) {
      for (int i = 0; i < marks.size(); ++i) {
        const double x = marks.marks[i];
        const Eigen::VectorXd g = gamma(h, x);
        const Eigen::VectorXd big = cumulative_trapezoid(grid, g);
        const double ph = phi(h, x);
        a.array() -= marks.weights[i] * g.array() *
                     ((-ph - big.array()).exp() - 1.0);
      }
    }
    return a;
  };
}

VerdictBundle verdict(const Semigroup& sg, const Cone& cone, const CoefficientSet& coeffs,
                      const VerdictConfig& cfg) {
  check_same_space(*sg.space(), *cone.space);
  VerdictBundle out;
  out.seed = cfg.seed;

  std::vector<BoundaryPair> pairs =
      sample_boundary_pairs(cone, cfg.n_pairs, cfg.seed);
  out.n_pairs = static_cast<int>(pairs.size());

  out.growth_estimate = growth_bound(sg, 8, cfg.t_grid, cfg.seed ^ 0x67726f77u);
  std::vector<double> lambda_grid;
  const double lo = std::max(sg.growth_hint(), out.growth_estimate);
  for (double off : cfg.lambda_offsets) lambda_grid.push_back(lo + off);
  out.invariance = semigroup_cone_invariance_check(sg, cone, cfg.n_invariance_samples,
                                                   cfg.t_grid, lambda_grid,
                                                   cfg.seed ^ 0x696e7661u);
  out.local = local_semigroup_test(sg, cone, cfg.n_local_pairs, cfg.seed ^ 0x6c6f63u);

  out.jump = check_jump_condition(coeffs, cone, cfg.n_jump_samples, cfg.seed ^ 0x6au);
  out.volatility = check_volatility_parallel(coeffs, cone, pairs, cfg.tol);
  out.drift = check_drift_condition(coeffs, cone, pairs, cfg.tol);
  out.drift_liminf = check_drift_condition_with_liminf(coeffs, sg, cone, pairs, cfg.tol);

  const bool all_pass = out.jump.status == CheckStatus::PASS &&
                        out.volatility.status == CheckStatus::PASS &&
                        out.drift.status == CheckStatus::PASS;
  const bool any_fail = out.jump.status == CheckStatus::FAIL ||
                        out.volatility.status == CheckStatus::FAIL ||
                        out.drift_liminf.status == CheckStatus::FAIL;
  if (all_pass && out.invariance.pass)
    out.overall = Overall::SUFFICIENT_PASS;
  else if (out.local.verdict == LocalVerdict::LOCAL && any_fail)
    out.overall = Overall::NECESSARY_FAIL;
  else
    out.overall = Overall::INCONCLUSIVE;
  return out;
}

}  // namespace spdecone
