#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "spdecone/rng.hpp"
#include "spdecone/space.hpp"

using namespace spdecone;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

Eigen::VectorXd random_vec(Rng& rng, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}
}  // namespace

TEST_CASE("inner product on plain L2: constant integrand") {
  auto sp = Space::plain_l2(GridSpec::interval(0.0, 1.0, 101));
  Eigen::VectorXd one = Eigen::VectorXd::Ones(101);
  CHECK(inner_product(*sp, one, one) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("inner product on weighted L2 matches the closed form") {
  const int n = 401;
  auto sp = Space::weighted_l2(GridSpec::interval(0.0, 10.0, n),
                               WeightFunction::exponential(1.0));
  Eigen::VectorXd f(n);
  for (int i = 0; i < n; ++i) f[i] = std::exp(-sp->grid.node_x(i));
  // integral of e^{-2x} e^x over [0,10] = 1 - e^{-10}
  CHECK(inner_product(*sp, f, f) ==
        doctest::Approx(1.0 - std::exp(-10.0)).epsilon(1e-4));
}

TEST_CASE("Filipovic direct sum: constants orthogonal to zero-at-base part") {
  auto sp = Space::filipovic(GridSpec::interval(0.0, 1.0, 65), WeightFunction::one());
  Rng rng(7);
  Eigen::VectorXd c = filipovic_embed(*sp, 1.0, Eigen::VectorXd::Zero(64));
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::VectorXd u = random_vec(rng, 64);
    Eigen::VectorXd g = filipovic_embed(*sp, 0.0, u);
    CHECK(std::abs(inner_product(*sp, c, g)) <= 1e-12);
  }
}

TEST_CASE("norm basics") {
  auto sp = Space::plain_l2(GridSpec::interval(0.0, 1.0, 33));
  CHECK(norm(*sp, Eigen::VectorXd::Zero(33)) == 0.0);
  CHECK(norm(*sp, 2.0 * Eigen::VectorXd::Ones(33)) ==
        doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("Filipovic norm obeys Pythagoras in (a, f) coordinates") {
  auto sp = Space::filipovic(GridSpec::interval(0.0, 1.0, 129), WeightFunction::one());
  auto comp = sp->companion();
  Rng rng(3);
  Eigen::VectorXd f = random_vec(rng, 128);
  f *= 4.0 / norm(*comp, f);
  Eigen::VectorXd h = filipovic_embed(*sp, 3.0, f);
  CHECK(norm(*sp, h) == doctest::Approx(5.0).epsilon(1e-10));
}

TEST_CASE("embed: zero data, linear ramp, exact isometry") {
  auto sp = Space::filipovic(GridSpec::interval(0.0, 1.0, 129), WeightFunction::one());
  auto comp = sp->companion();
  CHECK(filipovic_embed(*sp, 0.0, Eigen::VectorXd::Zero(128)).cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd ramp = filipovic_embed(*sp, 0.0, Eigen::VectorXd::Ones(128));
  for (int i = 0; i < 129; ++i)
    CHECK(ramp[i] == doctest::Approx(sp->grid.node_x(i)).epsilon(1e-12));

  Rng rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    double a = rng.normal();
    Eigen::VectorXd f = random_vec(rng, 128);
    double target = a * a + comp->inner(f, f);
    double got = std::pow(norm(*sp, filipovic_embed(*sp, a, f)), 2);
    CHECK(std::abs(got - target) <= 1e-8 * target);
  }
}

TEST_CASE("extract inverts embed") {
  auto sp = Space::filipovic(GridSpec::interval(0.0, 2.0, 65),
                             WeightFunction::exponential(0.3));
  Rng rng(5);

  auto [ac, fc] = filipovic_extract(*sp, 3.5 * Eigen::VectorXd::Ones(65));
  CHECK(ac == doctest::Approx(3.5));
  CHECK(fc.cwiseAbs().maxCoeff() <= 1e-12);

  auto spu = Space::filipovic(GridSpec::interval(0.0, 1.0, 65), WeightFunction::one());
  auto [al, fl] = filipovic_extract(*spu, spu->grid.nodes_x());
  CHECK(std::abs(al) <= 1e-12);
  CHECK((fl.array() - 1.0).abs().maxCoeff() <= 1e-8);

  for (int rep = 0; rep < 50; ++rep) {
    double a = rng.normal();
    Eigen::VectorXd f = random_vec(rng, 64);
    Eigen::VectorXd h = filipovic_embed(*sp, a, f);
    auto [a2, f2] = filipovic_extract(*sp, h);
    Eigen::VectorXd h2 = filipovic_embed(*sp, a2, f2);
    CHECK(norm(*sp, h - h2) <= 1e-8 * (1.0 + norm(*sp, h)));
  }
}

TEST_CASE("point evaluation functional") {
  auto sp = Space::filipovic(GridSpec::interval(0.0, 1.0, 65),
                             WeightFunction::exponential(0.4));
  Rng rng(13);

  Eigen::VectorXd d0 = point_eval_functional(*sp, 0);
  Eigen::VectorXd h = filipovic_embed(*sp, 0.7, random_vec(rng, 64));
  CHECK(std::abs(inner_product(*sp, d0, h) - 0.7) <= 1e-10);

  for (int rep = 0; rep < 100; ++rep) {
    int node = static_cast<int>(rng.below(65));
    Eigen::VectorXd g = filipovic_embed(*sp, rng.normal(), random_vec(rng, 64));
    Eigen::VectorXd dk = point_eval_functional(*sp, node);
    CHECK(std::abs(inner_product(*sp, dk, g) - g[node]) <= 1e-8 * (1.0 + norm(*sp, g)));
  }

  // analytic kernel agrees with a dense Gram solve of <d, e_i> = e_i(x_k)
  const int node = 40;
  Eigen::MatrixXd G = sp->gram_matrix();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(65);
  rhs[node] = 1.0;  // h -> h(x_k) in the nodal basis
  Eigen::VectorXd via_solve = G.ldlt().solve(rhs);
  Eigen::VectorXd analytic = point_eval_functional(*sp, node);
  CHECK((via_solve - analytic).cwiseAbs().maxCoeff() <= 1e-6);

  auto plain = Space::plain_l2(GridSpec::interval(0.0, 1.0, 9));
  CHECK_THROWS_AS((void)point_eval_functional(*plain, 2), UnsupportedSpace);
}

TEST_CASE("direct sum projection") {
  auto sp = Space::filipovic(GridSpec::interval(0.0, 1.0, 65), WeightFunction::one());
  Rng rng(17);

  Eigen::VectorXd c = 2.5 * Eigen::VectorXd::Ones(65);
  CHECK((direct_sum_project(*sp, c, DirectSumPart::Constants) - c).norm() <= 1e-12);
  CHECK(direct_sum_project(*sp, c, DirectSumPart::ZeroAtBase).cwiseAbs().maxCoeff() <=
        1e-12);

  Eigen::VectorXd g = filipovic_embed(*sp, 0.0, random_vec(rng, 64));
  CHECK(direct_sum_project(*sp, g, DirectSumPart::Constants).cwiseAbs().maxCoeff() <=
        1e-12);

  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd h = filipovic_embed(*sp, rng.normal(), random_vec(rng, 64));
    Eigen::VectorXd p1 = direct_sum_project(*sp, h, DirectSumPart::Constants);
    Eigen::VectorXd p2 = direct_sum_project(*sp, h, DirectSumPart::ZeroAtBase);
    CHECK((p1 + p2 - h).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(std::abs(inner_product(*sp, p1, p2)) <= 1e-10);
  }
}

TEST_CASE("bilinearity and Cauchy-Schwarz") {
  auto sp = Space::weighted_l2(GridSpec::interval(0.0, 3.0, 41),
                               WeightFunction::exponential(0.2));
  Rng rng(23);
  for (int rep = 0; rep < 50; ++rep) {
    double a = rng.normal(), b = rng.normal();
    Eigen::VectorXd f = random_vec(rng, 41), g = random_vec(rng, 41),
                    u = random_vec(rng, 41);
    double lhs = inner_product(*sp, a * f + b * g, u);
    double rhs = a * inner_product(*sp, f, u) + b * inner_product(*sp, g, u);
    double scale = std::abs(lhs) + std::abs(rhs) + 1.0;
    CHECK(std::abs(lhs - rhs) <= 1e-10 * scale);
    CHECK(std::abs(inner_product(*sp, f, g)) <=
          norm(*sp, f) * norm(*sp, g) * (1.0 + 1e-10));
    CHECK(inner_product(*sp, f, g) == doctest::Approx(inner_product(*sp, g, f)));
  }
}

TEST_CASE("refinement consistency: trapezoid rule is second order") {
  auto value = [](int n) {
    auto sp = Space::plain_l2(GridSpec::interval(0.0, 1.0, n));
    Eigen::VectorXd f(n);
    for (int i = 0; i < n; ++i) f[i] = std::exp(sp->grid.node_x(i));
    return inner_product(*sp, f, f);
  };
  const double exact = 0.5 * (std::exp(2.0) - 1.0);
  const double e1 = std::abs(value(33) - exact);
  const double e2 = std::abs(value(65) - exact);
  const double order = std::log2(e1 / e2);
  CHECK(order >= 1.8);
}

TEST_CASE("mismatched and non-finite inputs are rejected") {
  auto sp = Space::plain_l2(GridSpec::interval(0.0, 1.0, 9));
  Eigen::VectorXd wrong = Eigen::VectorXd::Zero(8);
  CHECK_THROWS_AS((void)norm(*sp, wrong), MismatchedSpace);
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(9);
  bad[4] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS((void)norm(*sp, bad), NonFiniteValue);
}

TEST_CASE("product space splits and recombines parts") {
  auto s1 = Space::plain_l2(GridSpec::interval(0.0, 1.0, 9));
  auto s2 = Space::scalar();
  auto sp = Space::product({s1, s2});
  CHECK(sp->dim() == 10);
  Eigen::VectorXd v(10);
  for (int i = 0; i < 10; ++i) v[i] = i;
  CHECK(sp->part_of(v, 1)[0] == 9.0);
  double want = inner_product(*s1, sp->part_of(v, 0), sp->part_of(v, 0)) +
                inner_product(*s2, sp->part_of(v, 1), sp->part_of(v, 1));
  CHECK(inner_product(*sp, v, v) == doctest::Approx(want).epsilon(1e-12));
}
