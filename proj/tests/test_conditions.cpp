#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "spdecone/conditions.hpp"

using namespace spdecone;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

CoefficientSet no_coeffs() { return {}; }

CoefficientSet pointwise_scaling_sigma(int J) {
  CoefficientSet c;
  for (int j = 1; j <= J; ++j)
    c.sigma.push_back([j](const Eigen::VectorXd& h) {
      return (std::pow(2.0, 1 - j) * h).eval();
    });
  return c;
}
}  // namespace

TEST_CASE("mark measures validate their atoms") {
  auto m = MarkMeasure::atoms({0.5, 1.5}, {2.0, 3.0});
  CHECK(m.total_mass() == doctest::Approx(5.0));
  CHECK_THROWS_AS((void)MarkMeasure::atoms({0.5}, {-1.0}), InvalidParameter);
  CHECK_THROWS_AS((void)MarkMeasure::atoms({0.5, 1.0}, {1.0}), InvalidParameter);
}

TEST_CASE("jump condition") {
  auto sp = Space::plain_l2(GridSpec::interval(0.0, 1.0, 33));
  auto cone = Cone::nonnegative(sp);

  SUBCASE("no jumps pass trivially") {
    auto rep = check_jump_condition(no_coeffs(), *cone, 40, 1);
    CHECK(rep.status == CheckStatus::PASS);
    CHECK(rep.worst == 0.0);
  }
  SUBCASE("gamma = -h/2 keeps the nonnegative cone") {
    CoefficientSet c;
    c.gamma = [](const Eigen::VectorXd& h, double) { return (-0.5 * h).eval(); };
    c.marks = MarkMeasure::atoms({1.0}, {1.0});
    CHECK(check_jump_condition(c, *cone, 40, 1).status == CheckStatus::PASS);
  }
  SUBCASE("gamma = -2h leaves the cone and names a witness") {
    CoefficientSet c;
    c.gamma = [](const Eigen::VectorXd& h, double) { return (-2.0 * h).eval(); };
    c.marks = MarkMeasure::atoms({1.0}, {1.0});
    auto rep = check_jump_condition(c, *cone, 40, 1);
    CHECK(rep.status == CheckStatus::FAIL);
    CHECK(rep.worst > 1e-6);
    CHECK(rep.witness_index >= 0);
    CHECK(rep.witness_h.size() == 33);
    // the stored witness reproduces the violation directly
    Eigen::VectorXd moved = rep.witness_h + c.gamma(rep.witness_h, 1.0);
    CHECK(cone_distance(*cone, moved) > 0.0);
  }
}

TEST_CASE("volatility parallel condition") {
  auto sp = Space::plain_l2(GridSpec::interval(0.0, 1.0, 65));
  auto cone = Cone::nonnegative(sp);
  auto pairs = sample_boundary_pairs(*cone, 30, 5);

  SUBCASE("pointwise scaling factors are parallel") {
    auto rep = check_volatility_parallel(pointwise_scaling_sigma(4), *cone, pairs);
    CHECK(rep.status == CheckStatus::PASS);
    CHECK(rep.worst <= 1e-12);
  }
  SUBCASE("a constant factor overlapping h* support fails") {
    CoefficientSet c;
    c.sigma.push_back([](const Eigen::VectorXd& h) {
      return Eigen::VectorXd::Ones(h.size()).eval();
    });
    auto rep = check_volatility_parallel(c, *cone, pairs);
    CHECK(rep.status == CheckStatus::FAIL);
    CHECK(rep.witness_index >= 0);
  }
  SUBCASE("linear combinations of parallel factors stay parallel") {
    CoefficientSet c = pointwise_scaling_sigma(2);
    DriftOp s0 = c.sigma[0], s1 = c.sigma[1];
    c.sigma.push_back([s0, s1](const Eigen::VectorXd& h) {
      return (1.7 * s0(h) - 0.4 * s1(h)).eval();
    });
    CHECK(check_volatility_parallel(c, *cone, pairs).status == CheckStatus::PASS);
  }
}

TEST_CASE("drift condition") {
  auto sp = Space::plain_l2(GridSpec::interval(0.0, 1.0, 65));
  auto cone = Cone::nonnegative(sp);
  auto pairs = sample_boundary_pairs(*cone, 30, 7);

  SUBCASE("zero coefficients pass with margin 0") {
    auto rep = check_drift_condition(no_coeffs(), *cone, pairs);
    CHECK(rep.status == CheckStatus::PASS);
    CHECK(rep.worst == 0.0);
  }
  SUBCASE("constant positive drift points inward") {
    CoefficientSet c;
    c.alpha = [](const Eigen::VectorXd& h) {
      return (0.3 * Eigen::VectorXd::Ones(h.size())).eval();
    };
    auto rep = check_drift_condition(c, *cone, pairs);
    CHECK(rep.status == CheckStatus::PASS);
    CHECK(rep.worst > 0.0);
  }
  SUBCASE("drift aimed against a boundary functional fails with -|h*|^2") {
    const BoundaryPair bp = pairs[0];
    CoefficientSet c;
    c.alpha = [bp](const Eigen::VectorXd&) { return (-bp.h_star).eval(); };
    auto rep = check_drift_condition(c, *cone, {bp});
    CHECK(rep.status == CheckStatus::FAIL);
    const double want = -std::pow(norm(*sp, bp.h_star), 2);
    CHECK(rep.worst == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("drift condition with small-time semigroup rate") {
  auto sp = Space::plain_l2(GridSpec::interval(0.0, 1.0, 65));
  auto cone = Cone::nonnegative(sp);
  auto pairs = sample_boundary_pairs(*cone, 20, 9);

  SUBCASE("identity semigroup bit-matches the plain drift check") {
    CoefficientSet c;
    c.alpha = [](const Eigen::VectorXd& h) {
      return (0.1 * Eigen::VectorXd::Ones(h.size()) - 0.05 * h).eval();
    };
    auto sg = Semigroup::identity(sp);
    auto plain = check_drift_condition(c, *cone, pairs);
    auto with = check_drift_condition_with_liminf(c, *sg, *cone, pairs);
    CHECK(with.status == plain.status);
    CHECK(with.worst == plain.worst);  // +0.0 preserves the bits
  }
  SUBCASE("a diverging small-time rate rescues a zero drift") {
    auto fsp = Space::filipovic(GridSpec::interval(0.0, 1.0, 257), WeightFunction::one());
    auto fcone = Cone::nonnegative(fsp);
    auto fsg = Semigroup::translation(fsp, 1.0);
    BoundaryPair bp;
    bp.h_star = point_eval_functional(*fsp, 0);
    bp.h_star /= norm(*fsp, bp.h_star);
    bp.h.resize(257);
    for (int i = 0; i < 257; ++i)
      bp.h[i] = std::min(std::pow(fsp->grid.node_x(i), 0.75), 1.0);
    bp.pairing = inner_product(*fsp, bp.h_star, bp.h);
    auto rep = check_drift_condition_with_liminf(no_coeffs(), *fsg, *fcone, {bp});
    CHECK(rep.status == CheckStatus::PASS);
  }
  SUBCASE("a bounded, non-vanishing rate is inconclusive") {
    // translation past a linear ramp: <h*, S_t h>/t is a nonzero constant
    auto wsp = Space::weighted_l2(GridSpec::interval(0.0, 1.0, 65),
                                  WeightFunction::one());
    auto wcone = Cone::nonnegative(wsp);
    auto wsg = Semigroup::translation(wsp, 1.0);
    const int c = 16;
    const double xc = wsp->grid.node_x(c);
    BoundaryPair bp;
    bp.h_star = Eigen::VectorXd::Zero(65);
    bp.h_star[c] = 1.0;
    bp.h_star /= norm(*wsp, bp.h_star);
    bp.h = Eigen::VectorXd::Zero(65);
    for (int i = c; i < 65; ++i) bp.h[i] = wsp->grid.node_x(i) - xc;
    bp.pairing = inner_product(*wsp, bp.h_star, bp.h);
    auto rep = check_drift_condition_with_liminf(no_coeffs(), *wsg, *wcone, {bp});
    CHECK(rep.status == CheckStatus::INCONCLUSIVE);
  }
}

TEST_CASE("zero-drift equivalence") {
  auto sp = Space::plain_l2(GridSpec::interval(0.0, 1.0, 65));
  auto cone = Cone::nonnegative(sp);
  auto pairs = sample_boundary_pairs(*cone, 25, 11);

  SUBCASE("alpha must evaluate to zero") {
    CoefficientSet c;
    c.alpha = [](const Eigen::VectorXd& h) { return h.eval(); };
    CHECK_THROWS_AS((void)check_zero_drift_equivalence(c, *cone, pairs), AlphaNotZero);
  }
  SUBCASE("no jumps: both sides pass") {
    auto rep = check_zero_drift_equivalence(no_coeffs(), *cone, pairs);
    CHECK(rep.drift.status == CheckStatus::PASS);
    CHECK(rep.jump_pairing.status == CheckStatus::PASS);
    CHECK(rep.sides_agree);
  }
  SUBCASE("gamma = -h/2 on disjoint-support pairs: both sides pass") {
    CoefficientSet c;
    c.gamma = [](const Eigen::VectorXd& h, double) { return (-0.5 * h).eval(); };
    c.marks = MarkMeasure::atoms({1.0}, {1.0});
    auto rep = check_zero_drift_equivalence(c, *cone, pairs);
    CHECK(rep.drift.status == CheckStatus::PASS);
    CHECK(rep.jump_pairing.status == CheckStatus::PASS);
    CHECK(rep.sides_agree);
  }
  SUBCASE("a jump bump inside the h* support fails both sides together") {
    CoefficientSet c;
    c.marks = MarkMeasure::atoms({1.0}, {1.0});
    c.gamma = [](const Eigen::VectorXd& h, double) {
      return (0.2 * Eigen::VectorXd::Ones(h.size())).eval();
    };
    auto rep = check_zero_drift_equivalence(c, *cone, pairs);
    // the jump lands inside the cone, but its pairing with h* is positive,
    // so the alpha = 0 drift margin -F<h*,gamma> is negative
    CHECK(rep.drift.status == CheckStatus::FAIL);
    CHECK(rep.jump_pairing.status == CheckStatus::FAIL);
    CHECK(rep.sides_agree);
    CHECK(check_jump_condition(c, *cone, 40, 3).status == CheckStatus::PASS);
  }
}

TEST_CASE("inward-pointing and parallel primitives") {
  auto sp = Space::plain_l2(GridSpec::interval(0.0, 1.0, 65));
  auto cone = Cone::nonnegative(sp);
  auto pairs = sample_boundary_pairs(*cone, 25, 13);

  SUBCASE("the Yosida map of a cone-invariant semigroup points inward") {
    auto sg = Semigroup::dirichlet_heat(sp, 0.3);
    DriftOp f = [sg](const Eigen::VectorXd& h) { return sg->yosida(20.0, h); };
    CHECK(check_inward_pointing(f, *cone, pairs).status == CheckStatus::PASS);
  }
  SUBCASE("the identity map is parallel") {
    DriftOp f = [](const Eigen::VectorXd& h) { return h.eval(); };
    auto rep = check_parallel(f, *cone, pairs);
    CHECK(rep.status == CheckStatus::PASS);
  }
  SUBCASE("conic combinations of inward maps stay inward") {
    DriftOp f = [](const Eigen::VectorXd& h) {
      return (Eigen::VectorXd::Ones(h.size()) - 0.1 * h).eval();
    };
    DriftOp g = [](const Eigen::VectorXd& h) { return (-0.5 * h).eval(); };
    CHECK(check_inward_pointing(f, *cone, pairs).status == CheckStatus::PASS);
    CHECK(check_inward_pointing(g, *cone, pairs).status == CheckStatus::PASS);
    DriftOp combo = [f, g](const Eigen::VectorXd& h) {
      return (2.0 * f(h) + 3.0 * g(h)).eval();
    };
    CHECK(check_inward_pointing(combo, *cone, pairs).status == CheckStatus::PASS);
  }
}

TEST_CASE("no-arbitrage drift constructor") {
  auto sp = Space::weighted_l2(GridSpec::interval(0.0, 2.0, 201),
                               WeightFunction::exponential(0.1));
  const int n = 201;

  SUBCASE("zero inputs give zero drift") {
    auto a = hjm_drift({}, nullptr, {}, nullptr, MarkMeasure::none(), sp);
    CHECK(a(Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("one constant factor reproduces alpha(x) = c^2 x") {
    const double c = 0.7;
    std::vector<DriftOp> sigma = {[c, n](const Eigen::VectorXd&) {
      return (c * Eigen::VectorXd::Ones(n)).eval();
    }};
    auto a = hjm_drift(sigma, nullptr, {0.0}, nullptr, MarkMeasure::none(), sp);
    Eigen::VectorXd out = a(Eigen::VectorXd::Zero(n));
    for (int i = 0; i < n; ++i)
      CHECK(out[i] == doctest::Approx(c * c * sp->grid.node_x(i)).epsilon(1e-8));
  }
  SUBCASE("market prices of risk enter linearly") {
    const double c = 0.5, th = 0.3;
    std::vector<DriftOp> sigma = {[c, n](const Eigen::VectorXd&) {
      return (c * Eigen::VectorXd::Ones(n)).eval();
    }};
    auto a = hjm_drift(sigma, nullptr, {th}, nullptr, MarkMeasure::none(), sp);
    Eigen::VectorXd out = a(Eigen::VectorXd::Zero(n));
    for (int i = 0; i < n; ++i)
      CHECK(out[i] ==
            doctest::Approx(c * th + c * c * sp->grid.node_x(i)).epsilon(1e-8));
  }
  SUBCASE("with parallel volatility the drift margin is the jump term alone") {
    auto cone = Cone::nonnegative(sp);
    auto pairs = sample_boundary_pairs(*cone, 25, 17);
    MarkMeasure marks = MarkMeasure::atoms({0.5, 1.5}, {0.8, 0.4});
    // pointwise factors commute with the disjoint-support pairs
    std::vector<DriftOp> sigma = {
        [](const Eigen::VectorXd& h) { return (0.2 * h).eval(); },
        [](const Eigen::VectorXd& h) { return (0.1 * h).eval(); }};
    JumpOp gamma = [](const Eigen::VectorXd& h, double x) {
      return (0.05 * x * (h.array() + 0.3).matrix()).eval();
    };
    MarkScalarOp phi = [](const Eigen::VectorXd&, double x) { return 0.1 * x; };
    auto alpha = hjm_drift(sigma, gamma, {0.4, -0.2}, phi, marks, sp);

    CoefficientSet full;
    full.alpha = alpha;
    full.sigma = sigma;
    full.gamma = gamma;
    full.marks = marks;
    CHECK(check_volatility_parallel(full, *cone, pairs).status == CheckStatus::PASS);
    auto drift = check_drift_condition(full, *cone, pairs);

    // oracle: <h*, alpha(h)> - sum F_i <h*, gamma> = -sum F_i <h*, gamma e^{-phi-Gamma}>
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto& bp = pairs[p];
      double margin = inner_product(*sp, bp.h_star, alpha(bp.h));
      double oracle = 0.0;
      for (int i = 0; i < marks.size(); ++i) {
        const double x = marks.marks[i], F = marks.weights[i];
        Eigen::VectorXd g = gamma(bp.h, x);
        margin -= F * inner_product(*sp, bp.h_star, g);
        Eigen::VectorXd G = cumulative_trapezoid(sp->grid, g);
        Eigen::VectorXd disc =
            (g.array() * (-phi(bp.h, x) - G.array()).exp()).matrix();
        oracle -= F * inner_product(*sp, bp.h_star, disc);
      }
      CHECK(std::abs(margin - oracle) <= 1e-8 * (1.0 + std::abs(oracle)));
    }
    (void)drift;
  }
}

TEST_CASE("cumulative trapezoid integrates linear functions exactly") {
  auto sp = Space::plain_l2(GridSpec::interval(0.0, 2.0, 21));
  Eigen::VectorXd v = sp->grid.nodes_x();
  Eigen::VectorXd I = cumulative_trapezoid(sp->grid, v);
  for (int i = 0; i < 21; ++i) {
    const double x = sp->grid.node_x(i);
    CHECK(I[i] == doctest::Approx(0.5 * x * x).epsilon(1e-12));
  }
}

TEST_CASE("aggregate verdicts") {
  auto sp = Space::plain_l2(GridSpec::interval(0.0, 1.0, 65));
  auto cone = Cone::nonnegative(sp);

  SUBCASE("identity dynamics with zero coefficients") {
    auto b = verdict(*Semigroup::identity(sp), *cone, no_coeffs());
    CHECK(b.overall == Overall::SUFFICIENT_PASS);
    CHECK(b.growth_estimate == 0.0);
    CHECK(b.invariance.pass);
  }
  SUBCASE("stochastic-exponential dynamics pass") {
    auto b = verdict(*Semigroup::dirichlet_heat(sp, 0.3), *cone,
                     pointwise_scaling_sigma(4));
    CHECK(b.overall == Overall::SUFFICIENT_PASS);
    CHECK(b.volatility.status == CheckStatus::PASS);
    CHECK(b.drift.status == CheckStatus::PASS);
    CHECK(b.jump.status == CheckStatus::PASS);
  }
  SUBCASE("constant additive volatility on a local semigroup is a hard fail") {
    CoefficientSet c;
    c.sigma.push_back([](const Eigen::VectorXd& h) {
      return (0.1 * Eigen::VectorXd::Ones(h.size())).eval();
    });
    auto b = verdict(*Semigroup::dirichlet_heat(sp, 0.3), *cone, c);
    CHECK(b.overall == Overall::NECESSARY_FAIL);
    CHECK(b.volatility.status == CheckStatus::FAIL);
    CHECK(b.local.verdict == LocalVerdict::LOCAL);
  }
  SUBCASE("the same failure on a non-local semigroup stays inconclusive") {
    auto fsp = Space::filipovic(GridSpec::interval(0.0, 1.0, 257), WeightFunction::one());
    auto fcone = Cone::nonnegative(fsp);
    CoefficientSet c;
    c.sigma.push_back([](const Eigen::VectorXd& h) {
      return (0.1 * Eigen::VectorXd::Ones(h.size())).eval();
    });
    auto b = verdict(*Semigroup::translation(fsp, 1.0), *fcone, c);
    CHECK(b.local.verdict == LocalVerdict::NOT_LOCAL);
    CHECK(b.overall == Overall::INCONCLUSIVE);
  }
}

TEST_CASE("margins scale exactly with the coefficients") {
  auto sp = Space::plain_l2(GridSpec::interval(0.0, 1.0, 65));
  auto cone = Cone::nonnegative(sp);
  auto pairs = sample_boundary_pairs(*cone, 25, 19);
  const double c = 4.0;  // power of two: bit-exact scaling

  CoefficientSet base;
  base.alpha = [](const Eigen::VectorXd& h) {
    return (0.2 * Eigen::VectorXd::Ones(h.size()) - 0.1 * h).eval();
  };
  base.sigma.push_back(
      [](const Eigen::VectorXd& h) { return (0.3 * h).eval(); });
  base.gamma = [](const Eigen::VectorXd& h, double) { return (-0.25 * h).eval(); };
  base.marks = MarkMeasure::atoms({1.0}, {0.5});

  CoefficientSet scaled;
  scaled.alpha = [&base, c](const Eigen::VectorXd& h) { return (c * base.alpha(h)).eval(); };
  scaled.sigma.push_back(
      [&base, c](const Eigen::VectorXd& h) { return (c * base.sigma[0](h)).eval(); });
  scaled.gamma = [&base, c](const Eigen::VectorXd& h, double x) {
    return (c * base.gamma(h, x)).eval();
  };
  scaled.marks = base.marks;

  auto d1 = check_drift_condition(base, *cone, pairs);
  auto d2 = check_drift_condition(scaled, *cone, pairs);
  CHECK(d2.worst == c * d1.worst);

  auto v1 = check_volatility_parallel(base, *cone, pairs);
  auto v2 = check_volatility_parallel(scaled, *cone, pairs);
  CHECK(v2.worst == c * v1.worst);
}

TEST_CASE("failed checks replay bit-identically from the stored seed") {
  auto sp = Space::plain_l2(GridSpec::interval(0.0, 1.0, 65));
  auto cone = Cone::nonnegative(sp);
  CoefficientSet c;
  c.gamma = [](const Eigen::VectorXd& h, double) { return (-2.0 * h).eval(); };
  c.marks = MarkMeasure::atoms({1.0}, {1.0});
  auto r1 = check_jump_condition(c, *cone, 40, 77);
  auto r2 = check_jump_condition(c, *cone, 40, r1.seed);
  REQUIRE(r1.status == CheckStatus::FAIL);
  CHECK(r2.status == CheckStatus::FAIL);
  CHECK(r2.worst == r1.worst);
  CHECK(r2.witness_index == r1.witness_index);
  CHECK((r2.witness_h - r1.witness_h).cwiseAbs().maxCoeff() == 0.0);
}
