#include "spdecone/apps.hpp"

#include <cmath>

#include "spdecone/errors.hpp"

namespace spdecone {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

/// sigma^j(h) = c_j h, pointwise in the state; commutes with node masks,
/// component blocks and difference couplings, which is what keeps the
/// boundary pairings of every gallery cone exactly zero.
std::vector<DriftOp> multiplicative_sigma(const QWienerSpec& qw, double scale) {
  std::vector<DriftOp> out;
  for (int j = 0; j < qw.size(); ++j) {
    const double c = scale * qw.eigenvalues[j];
    out.push_back([c](const Eigen::VectorXd& h) { return (c * h).eval(); });
  }
  return out;
}

Eigen::VectorXd sine_bump(const GridSpec& g) {
  Eigen::VectorXd h(g.nx);
  for (int i = 0; i < g.nx; ++i)
    h[i] = std::sin(kPi * (g.node_x(i) - g.x_lo) / (g.x_hi - g.x_lo));
  return h;
}

Application build_cable(const ApplicationSpec& spec) {
  const int n = static_cast<int>(spec.param("nodes", 129));
  const double tau = spec.param("tau", 1.0);
  const double lam = spec.param("lambda_cable", 0.2);
  if (!(tau > 0.0)) throw InvalidParameter("cable.tau", "must be positive");
  Application app;
  app.space = Space::plain_l2(GridSpec::interval(0.0, 1.0, n));
  app.cone = Cone::nonnegative(app.space);
  app.sg = Semigroup::affine_scaled(Semigroup::dirichlet_heat(app.space, 1.0),
                                    lam * lam / tau, -1.0 / tau);
  app.qw = QWienerSpec::cosine(app.space, static_cast<int>(spec.param("factors", 8)));
  app.coeffs.sigma = multiplicative_sigma(app.qw, spec.param("sigma_scale", 0.5));
  app.h0 = sine_bump(app.space->grid);
  return app;
}

Application build_heat_anderson(const ApplicationSpec& spec) {
  const int n = static_cast<int>(spec.param("nodes", 129));
  const double a = spec.param("conductivity", 0.002);
  Application app;
  app.space = Space::plain_l2(GridSpec::interval(0.0, 1.0, n));
  app.cone = Cone::nonnegative(app.space);
  app.sg = Semigroup::dirichlet_heat(app.space, a);
  app.qw = QWienerSpec::cosine(app.space, static_cast<int>(spec.param("factors", 8)));
  if (spec.flag("sigma", "anderson") == "additive") {
    // Constant-volatility variant: the diffusion pushes across the boundary
    // regardless of the state, so the cone cannot be invariant.
    const double c = spec.param("sigma_scale", 1.0);
    const int dim = app.space->dim();
    app.coeffs.sigma.push_back([c, dim](const Eigen::VectorXd&) {
      return (c * Eigen::VectorXd::Ones(dim)).eval();
    });
    app.h0 = 0.05 * Eigen::VectorXd::Ones(dim);
  } else {
    app.coeffs.sigma = multiplicative_sigma(app.qw, spec.param("sigma_scale", 1.0));
    app.h0 = sine_bump(app.space->grid);
  }
  return app;
}

Application build_hjmm(const ApplicationSpec& spec) {
  const int n = static_cast<int>(spec.param("nodes", 129));
  const double beta = spec.param("beta", 0.1);
  Application app;
  app.space = Space::weighted_l2(GridSpec::interval(0.0, 5.0, n),
                                 WeightFunction::exponential(beta));
  app.cone = Cone::nonnegative(app.space);
  app.sg = Semigroup::translation(app.space, 1.0);
  app.qw = QWienerSpec::cosine(app.space, static_cast<int>(spec.param("factors", 8)));
  app.coeffs.sigma = multiplicative_sigma(app.qw, spec.param("sigma_scale", 0.2));
  const double jump_mass = spec.param("jump_mass", 1.0);
  app.coeffs.marks = MarkMeasure::atoms({0.1, 0.25}, {0.5 * jump_mass, 0.5 * jump_mass});
  app.coeffs.gamma = [](const Eigen::VectorXd& h, double x) { return (x * h).eval(); };
  const double phi0 = spec.param("phi", 0.0);
  std::vector<double> theta(app.coeffs.sigma.size(), spec.param("theta", 0.0));
  app.coeffs.alpha = hjm_drift(app.coeffs.sigma, app.coeffs.gamma, theta,
                               [phi0](const Eigen::VectorXd&, double) { return phi0; },
                               app.coeffs.marks, app.space);
  const Eigen::VectorXd x = app.space->grid.nodes_x();
  app.h0 = (0.03 + 0.005 * x.array()).matrix();
  return app;
}

Application build_mortality(const ApplicationSpec& spec) {
  const int n = static_cast<int>(spec.param("nodes", 33));
  Application app;
  const GridSpec g = GridSpec::box(-1.0, 1.0, n, 0.0, 1.0, n);
  app.space = Space::plain_l2(g);
  // The model lives on {(s, y) : -y <= s}; everything outside the wedge is
  // carried along unconstrained.
  std::vector<int> mask;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      if (g.node_x(i) + g.node_y(j) >= 0.0) mask.push_back(g.index(i, j));
  app.cone = Cone::nonnegative(app.space, mask);
  app.sg = Semigroup::translation(app.space, 1.0, -1.0);
  app.qw = QWienerSpec::cosine(app.space, static_cast<int>(spec.param("factors", 8)));
  app.coeffs.sigma = multiplicative_sigma(app.qw, spec.param("sigma_scale", 0.2));
  app.h0.resize(g.size());
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      app.h0[g.index(i, j)] = 0.01 + 0.02 * std::max(0.0, g.node_x(i) + g.node_y(j));
  return app;
}

Application build_hybrid(const ApplicationSpec& spec) {
  const int n = static_cast<int>(spec.param("nodes", 65));
  Application app;
  SpacePtr s1 = Space::plain_l2(GridSpec::interval(0.0, 1.0, n));
  SpacePtr s2 = Space::weighted_l2(GridSpec::interval(0.0, 5.0, n),
                                   WeightFunction::exponential(spec.param("beta", 0.1)));
  app.space = Space::product({s1, s2});
  app.cone = Cone::product({Cone::nonnegative(s1), Cone::nonnegative(s2)});
  app.sg = Semigroup::product({Semigroup::dirichlet_heat(s1, spec.param("conductivity", 0.01)),
                               Semigroup::translation(s2, 1.0)});
  app.qw = QWienerSpec::cosine(app.space, static_cast<int>(spec.param("factors", 8)));
  app.coeffs.sigma = multiplicative_sigma(app.qw, spec.param("sigma_scale", 0.2));
  Eigen::VectorXd h0(app.space->dim());
  h0.head(n) = sine_bump(s1->grid);
  const Eigen::VectorXd x2 = s2->grid.nodes_x();
  h0.tail(n) = (0.03 + 0.005 * x2.array()).matrix();
  app.h0 = h0;
  return app;
}

Application build_energy(const ApplicationSpec& spec) {
  const int n = static_cast<int>(spec.param("nodes", 129));
  Application app;
  app.space = Space::weighted_l2(GridSpec::interval(0.0, 5.0, n),
                                 WeightFunction::exponential(spec.param("beta", 0.1)));
  app.cone = Cone::nonnegative(app.space);
  app.sg = Semigroup::translation(app.space, 1.0);
  app.qw = QWienerSpec::cosine(app.space, static_cast<int>(spec.param("factors", 8)));
  app.coeffs.sigma = multiplicative_sigma(app.qw, spec.param("sigma_scale", 0.3));
  const Eigen::VectorXd x = app.space->grid.nodes_x();
  app.h0 = (0.01 + 0.04 * (-0.1 * x.array()).exp()).matrix();
  return app;
}

Application build_variance_swap(const ApplicationSpec& spec) {
  const int n = static_cast<int>(spec.param("nodes", 129));
  Application app;
  app.space = Space::filipovic(GridSpec::interval(0.0, 1.0, n),
                               WeightFunction::exponential(spec.param("beta", 0.5)));
  app.cone = Cone::filipovic_monotone(app.space);
  app.sg = Semigroup::translation(app.space, 1.0);
  app.qw = QWienerSpec::cosine(app.space, static_cast<int>(spec.param("factors", 8)));
  // sigma^j(h) = c_j (h - h(0)): scales the increments of h and leaves the
  // left endpoint alone, so both defining pairings stay exactly zero.
  for (int j = 0; j < app.qw.size(); ++j) {
    const double c = spec.param("sigma_scale", 0.2) * app.qw.eigenvalues[j];
    app.coeffs.sigma.push_back([c](const Eigen::VectorXd& h) {
      return (c * (h.array() - h[0])).matrix().eval();
    });
  }
  app.h0 = filipovic_embed(*app.space, 0.04,
                           0.05 * Eigen::VectorXd::Ones(app.space->dim() - 1));
  return app;
}

Application build_cdo(const ApplicationSpec& spec) {
  const int n = static_cast<int>(spec.param("nodes", 65));
  const int m = static_cast<int>(spec.param("tranches", 4));
  if (m < 2) throw InvalidParameter("cdo.tranches", "need at least two tranches");
  Application app;
  SpacePtr comp = Space::weighted_l2(GridSpec::interval(0.0, 5.0, n),
                                     WeightFunction::exponential(spec.param("beta", 0.1)));
  std::vector<SpacePtr> sps(m, comp);
  app.space = Space::product(sps);
  // h_1 >= h_2 >= ... >= h_m >= 0, encoded as M h componentwise nonnegative.
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(m, m);
  for (int i = 0; i + 1 < m; ++i) M(i, i + 1) = -1.0;
  std::vector<ConePtr> bases;
  for (int i = 0; i < m; ++i) bases.push_back(Cone::nonnegative(comp));
  app.cone = Cone::matrix_transformed(M, bases);
  std::vector<SemigroupPtr> sgs;
  for (int i = 0; i < m; ++i) sgs.push_back(Semigroup::translation(comp, 1.0));
  app.sg = Semigroup::product(sgs);
  app.qw = QWienerSpec::cosine(app.space, static_cast<int>(spec.param("factors", 8)));
  if (spec.flag("sigma", "parallel") == "tranche_additive") {
    // Per-tranche constants break the pairing against h_i - h_{i+1}.
    Eigen::VectorXd v(app.space->dim());
    for (int i = 0; i < m; ++i)
      v.segment(i * n, n).setConstant(0.005 * (i + 1));
    app.coeffs.sigma.push_back([v](const Eigen::VectorXd&) { return v; });
  } else {
    app.coeffs.sigma = multiplicative_sigma(app.qw, spec.param("sigma_scale", 0.2));
  }
  Eigen::VectorXd h0(app.space->dim());
  for (int i = 0; i < m; ++i) h0.segment(i * n, n).setConstant(0.01 * (m - i));
  app.h0 = h0;
  return app;
}

Application build_fx(const ApplicationSpec& spec) {
  const int n = static_cast<int>(spec.param("nodes", 65));
  Application app;
  SpacePtr comp = Space::weighted_l2(GridSpec::interval(0.0, 5.0, n),
                                     WeightFunction::exponential(spec.param("beta", 0.1)));
  SpacePtr pair_space = Space::product({comp, comp});
  SpacePtr sc = Space::scalar();
  app.space = Space::product({pair_space, sc});
  // K1 = {0 <= h1 <= h2} on the curve pair, K2 = R_+ for the scalar factor.
  Eigen::MatrixXd M(2, 2);
  M << 1.0, 0.0, -1.0, 1.0;
  ConePtr k1 = Cone::matrix_transformed(M, {Cone::nonnegative(comp), Cone::nonnegative(comp)});
  app.cone = Cone::product({k1, Cone::nonnegative(sc)});
  SemigroupPtr tr = Semigroup::translation(comp, 1.0);
  app.sg = Semigroup::product({Semigroup::product({tr, tr}), Semigroup::identity(sc)});
  app.qw = QWienerSpec::cosine(app.space, static_cast<int>(spec.param("factors", 8)));
  app.coeffs.sigma = multiplicative_sigma(app.qw, spec.param("sigma_scale", 0.25));
  Eigen::VectorXd h0(app.space->dim());
  h0.segment(0, n).setConstant(0.02);
  h0.segment(n, n).setConstant(0.05);
  h0[2 * n] = 1.0;
  app.h0 = h0;
  return app;
}

}  // namespace

double ApplicationSpec::param(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

std::string ApplicationSpec::flag(const std::string& key, const std::string& fallback) const {
  auto it = flags.find(key);
  return it == flags.end() ? fallback : it->second;
}

const std::vector<std::string>& application_names() {
  static const std::vector<std::string> names = {
      "cable", "heat_anderson", "hjmm",          "mortality", "hybrid",
      "energy", "variance_swap", "cdo",          "fx"};
  return names;
}

Application build_application(const ApplicationSpec& spec) {
  Application app;
  if (spec.name == "cable") app = build_cable(spec);
  else if (spec.name == "heat_anderson") app = build_heat_anderson(spec);
  else if (spec.name == "hjmm") app = build_hjmm(spec);
  else if (spec.name == "mortality") app = build_mortality(spec);
  else if (spec.name == "hybrid") app = build_hybrid(spec);
  else if (spec.name == "energy") app = build_energy(spec);
  else if (spec.name == "variance_swap") app = build_variance_swap(spec);
  else if (spec.name == "cdo") app = build_cdo(spec);
  else if (spec.name == "fx") app = build_fx(spec);
  else throw InvalidParameter("app", "unknown application '" + spec.name + "'");
  app.name = spec.name;
  if (!cone_contains(*app.cone, app.h0, 1e-9))
    throw InvalidParameter(spec.name + ".h0", "initial state must lie in the cone");
  return app;
}

}  // namespace spdecone
