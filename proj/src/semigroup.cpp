#include "spdecone/semigroup.hpp"

#include <cmath>

namespace spdecone {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

double interp1(const Eigen::VectorXd& h, const GridSpec& g, double x) {
  if (x <= g.x_lo) return h[0];
  if (x >= g.x_hi) return h[g.nx - 1];
  double s = (x - g.x_lo) / g.dx();
  int i = std::min(static_cast<int>(s), g.nx - 2);
  double w = s - i;
  return (1.0 - w) * h[i] + w * h[i + 1];
}

double interp2(const Eigen::VectorXd& h, const GridSpec& g, double x, double y) {
  double sx = std::clamp((x - g.x_lo) / g.dx(), 0.0, static_cast<double>(g.nx - 1));
  double sy = std::clamp((y - g.y_lo) / g.dy(), 0.0, static_cast<double>(g.ny - 1));
  int i = std::min(static_cast<int>(sx), g.nx - 2);
  int j = std::min(static_cast<int>(sy), g.ny - 2);
  double u = sx - i, v = sy - j;
  return (1 - u) * (1 - v) * h[g.index(i, j)] + u * (1 - v) * h[g.index(i + 1, j)] +
         (1 - u) * v * h[g.index(i, j + 1)] + u * v * h[g.index(i + 1, j + 1)];
}

class IdentitySg final : public Semigroup {
 public:
  explicit IdentitySg(SpacePtr s) {
    space_ = std::move(s);
    beta_ = 0.0;
  }
  std::string name() const override { return "identity"; }
  Eigen::VectorXd yosida(double lambda, const Eigen::VectorXd& h) const override {
    if (lambda <= beta_) throw LambdaTooSmall(lambda, beta_);
    return Eigen::VectorXd::Zero(h.size());  // A = 0 exactly
  }

 protected:
  Eigen::VectorXd do_apply(double, const Eigen::VectorXd& h) const override { return h; }
  Eigen::VectorXd do_resolvent(double lambda, const Eigen::VectorXd& h) const override {
    return h / lambda;
  }
};

class TranslationSg final : public Semigroup {
 public:
  TranslationSg(SpacePtr s, double vx, double vy) : vx_(vx), vy_(vy) {
    if (s->kind == SpaceKind::Product) throw UnsupportedSpace("translation on product space");
    if (s->grid.dim == 1 && vx <= 0.0)
      throw InvalidParameter("direction", "1-D translation needs v > 0");
    space_ = std::move(s);
    beta_ = 0.0;  // admissible weights give pseudo-contraction with beta = 0
  }
  std::string name() const override { return "translation"; }
  double liminf_time_floor() const override {
    const GridSpec& g = space_->grid;
    const double v = std::max(std::abs(vx_), std::abs(vy_));
    return v > 0.0 ? g.dx() / v : g.dx();
  }

 protected:
  Eigen::VectorXd do_apply(double t, const Eigen::VectorXd& h) const override {
    const GridSpec& g = space_->grid;
    Eigen::VectorXd out(h.size());
    if (g.dim == 1) {
      for (int i = 0; i < g.nx; ++i) out[i] = interp1(h, g, g.node_x(i) + t * vx_);
    } else {
      for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
          out[g.index(i, j)] = interp2(h, g, g.node_x(i) + t * vx_, g.node_y(j) + t * vy_);
    }
    return out;
  }

  Eigen::VectorXd do_resolvent(double lambda, const Eigen::VectorXd& h) const override {
    const GridSpec& g = space_->grid;
    if (g.dim != 1) return resolvent_quadrature(lambda, h);
    // Closed-form Laplace transform of the piecewise-linear interpolant
    // with constant right extension; exact and positivity-preserving.
    const int n = g.nx;
    const double tau = g.dx() / vx_;
    const double E = std::exp(-lambda * tau);
    const double em1 = std::expm1(-lambda * tau);  // E - 1
    const double A = (lambda * tau + em1) / (lambda * lambda * tau);
    const double B = -(em1 + E * lambda * tau) / (lambda * lambda * tau);
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) {
      double acc = 0.0, fac = 1.0;
      int j = i;
      for (; j + 1 < n; ++j) {
        acc += fac * (A * h[j] + B * h[j + 1]);
        fac *= E;
        if (fac < 1e-18) break;
      }
      if (j + 1 >= n) acc += fac * h[n - 1] / lambda;  // constant tail
      out[i] = acc;
    }
    return out;
  }

 private:
  double vx_, vy_;
};

class DirichletHeatSg final : public Semigroup {
 public:
  DirichletHeatSg(SpacePtr s, double a, int max_modes) : a_(a) {
    if (s->kind != SpaceKind::PlainL2 || s->grid.scalar())
      throw UnsupportedSpace("Dirichlet heat needs a plain L2 grid space");
    if (a <= 0.0) throw InvalidParameter("conductivity", "needs a > 0");
    space_ = std::move(s);
    beta_ = 0.0;
    const GridSpec& g = space_->grid;
    build_axis(g.nx, g.dx(), max_modes, Sx_, mux_);
    if (g.dim == 2) build_axis(g.ny, g.dy(), max_modes, Sy_, muy_);
  }
  std::string name() const override { return "dirichlet_heat"; }
  double liminf_time_floor() const override {
    const double dx = space_->grid.dx();
    return dx * dx / (64.0 * a_);  // diffusion length well below one cell
  }

 protected:
  Eigen::VectorXd do_apply(double t, const Eigen::VectorXd& h) const override {
    return spectral(h, [&](double mu) { return std::exp(a_ * mu * t); });
  }
  Eigen::VectorXd do_resolvent(double lambda, const Eigen::VectorXd& h) const override {
    return spectral(h, [&](double mu) { return 1.0 / (lambda - a_ * mu); });
  }

 private:
  static void build_axis(int n, double dx, int max_modes, Eigen::MatrixXd& S,
                         Eigen::VectorXd& mu) {
    const int N = n - 1;          // intervals
    int m = N - 1;                // interior modes of the discrete Laplacian
    if (max_modes > 0) m = std::min(m, max_modes);
    S.resize(m, N - 1);
    mu.resize(m);
    for (int k = 1; k <= m; ++k) {
      double s = std::sin(k * kPi / (2.0 * N));
      mu[k - 1] = -4.0 / (dx * dx) * s * s;
      for (int i = 1; i <= N - 1; ++i) S(k - 1, i - 1) = std::sin(k * kPi * i / N);
    }
  }

  template <typename F>
  Eigen::VectorXd spectral(const Eigen::VectorXd& h, F factor) const {
    const GridSpec& g = space_->grid;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(h.size());
    if (g.dim == 1) {
      const int N = g.nx - 1;
      Eigen::VectorXd c = Sx_ * h.segment(1, N - 1) * (2.0 / N);
      for (int k = 0; k < c.size(); ++k) c[k] *= factor(mux_[k]);
      out.segment(1, N - 1) = Sx_.transpose() * c;
      return out;
    }
    const int Nx = g.nx - 1, Ny = g.ny - 1;
    Eigen::MatrixXd H(Nx - 1, Ny - 1);
    for (int i = 1; i <= Nx - 1; ++i)
      for (int j = 1; j <= Ny - 1; ++j) H(i - 1, j - 1) = h[g.index(i, j)];
    Eigen::MatrixXd C = (Sx_ * H * Sy_.transpose()) * (4.0 / (Nx * Ny));
    for (int k = 0; k < C.rows(); ++k)
      for (int l = 0; l < C.cols(); ++l) C(k, l) *= factor(mux_[k] + muy_[l]);
    Eigen::MatrixXd Hout = Sx_.transpose() * C * Sy_;
    for (int i = 1; i <= Nx - 1; ++i)
      for (int j = 1; j <= Ny - 1; ++j) out[g.index(i, j)] = Hout(i - 1, j - 1);
    return out;
  }

  double a_;
  Eigen::MatrixXd Sx_, Sy_;
  Eigen::VectorXd mux_, muy_;
};

class HeatFullSg final : public Semigroup {
 public:
  HeatFullSg(SpacePtr s, double a) : a_(a) {
    if (s->kind != SpaceKind::PlainL2 || s->grid.scalar())
      throw UnsupportedSpace("free-space heat needs a plain L2 grid space");
    if (a <= 0.0) throw InvalidParameter("conductivity", "needs a > 0");
    space_ = std::move(s);
    beta_ = 0.0;
  }
  std::string name() const override { return "heat_full"; }
  double liminf_time_floor() const override {
    const double dx = space_->grid.dx();
    return dx * dx / (64.0 * a_);
  }

 protected:
  Eigen::VectorXd do_apply(double t, const Eigen::VectorXd& h) const override {
    const GridSpec& g = space_->grid;
    Eigen::MatrixXd Kx = axis_kernel(g.nx, g.dx(), t);
    if (g.dim == 1) return Kx * h;
    Eigen::MatrixXd Ky = axis_kernel(g.ny, g.dy(), t);
    Eigen::MatrixXd H(g.nx, g.ny);
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j) H(i, j) = h[g.index(i, j)];
    Eigen::MatrixXd Hout = Kx * H * Ky.transpose();
    Eigen::VectorXd out(h.size());
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j) out[g.index(i, j)] = Hout(i, j);
    return out;
  }

 private:
  Eigen::MatrixXd axis_kernel(int n, double dx, double t) const {
    // The grid cannot resolve the Gaussian once its width drops below dx;
    // switch to a Taylor exponential of the discrete Laplacian there.
    if (2.0 * a_ * t < 1.5 * dx * dx) return small_time_kernel(n, dx, t);
    // trapezoid quadrature of the Gaussian kernel with variance 2 a t
    Eigen::MatrixXd K(n, n);
    double norm = 1.0 / std::sqrt(4.0 * kPi * a_ * t);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double z = (i - j) * dx;
        double w = (j == 0 || j == n - 1) ? 0.5 * dx : dx;
        K(i, j) = norm * std::exp(-z * z / (4.0 * a_ * t)) * w;
      }
    return K;
  }

  Eigen::MatrixXd small_time_kernel(int n, double dx, double t) const {
    // exp(a t L) with reflecting ends (mass-conserving free-space stand-in);
    // ||a t L / dx^2|| <= 3 at the crossover, so 24 Taylor terms suffice.
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      if (i > 0) L(i, i - 1) = 1.0;
      if (i < n - 1) L(i, i + 1) = 1.0;
      L(i, i) = (i == 0 || i == n - 1) ? -1.0 : -2.0;
    }
    L *= a_ * t / (dx * dx);
    Eigen::MatrixXd K = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k <= 24; ++k) {
      term = (L * term) / static_cast<double>(k);
      K += term;
    }
    return K;
  }

  double a_;
};

class AffineScaledSg final : public Semigroup {
 public:
  AffineScaledSg(SemigroupPtr inner, double alpha, double mu)
      : inner_(std::move(inner)), alpha_(alpha), mu_(mu) {
    if (alpha <= 0.0) throw InvalidParameter("alpha", "needs alpha > 0");
    space_ = inner_->space();
    beta_ = std::max(0.0, mu_ + alpha_ * inner_->growth_hint());
  }
  std::string name() const override { return "affine(" + inner_->name() + ")"; }
  double liminf_time_floor() const override {
    return inner_->liminf_time_floor() / alpha_;
  }

 protected:
  Eigen::VectorXd do_apply(double t, const Eigen::VectorXd& h) const override {
    return std::exp(mu_ * t) * inner_->apply(alpha_ * t, h);
  }
  Eigen::VectorXd do_resolvent(double lambda, const Eigen::VectorXd& h) const override {
    // (lambda - alpha A - mu)^{-1} = R^A_{(lambda-mu)/alpha} / alpha
    return inner_->resolvent((lambda - mu_) / alpha_, h) / alpha_;
  }

 private:
  SemigroupPtr inner_;
  double alpha_, mu_;
};

class ProductSg final : public Semigroup {
 public:
  explicit ProductSg(std::vector<SemigroupPtr> comps) : comps_(std::move(comps)) {
    std::vector<SpacePtr> spaces;
    for (const auto& c : comps_) {
      spaces.push_back(c->space());
      beta_ = std::max(beta_, c->growth_hint());
    }
    space_ = Space::product(std::move(spaces));
  }
  std::string name() const override { return "product"; }
  double liminf_time_floor() const override {
    double f = 1.0;
    for (const auto& c : comps_) f = std::min(f, c->liminf_time_floor());
    return f;
  }

 protected:
  Eigen::VectorXd do_apply(double t, const Eigen::VectorXd& h) const override {
    Eigen::VectorXd out(h.size());
    for (int j = 0; j < static_cast<int>(comps_.size()); ++j)
      space_->set_part(out, j, comps_[j]->apply(t, space_->part_of(h, j)));
    return out;
  }
  Eigen::VectorXd do_resolvent(double lambda, const Eigen::VectorXd& h) const override {
    Eigen::VectorXd out(h.size());
    for (int j = 0; j < static_cast<int>(comps_.size()); ++j)
      space_->set_part(out, j, comps_[j]->resolvent(lambda, space_->part_of(h, j)));
    return out;
  }

 private:
  std::vector<SemigroupPtr> comps_;
};

}  // namespace

Eigen::VectorXd Semigroup::apply(double t, const Eigen::VectorXd& h) const {
  if (t < 0.0) throw NegativeTime(t);
  if (h.size() != space_->dim()) throw MismatchedSpace("apply vector length");
  require_finite(h, "apply_semigroup");
  if (t == 0.0) return h;
  return do_apply(t, h);
}

Eigen::VectorXd Semigroup::resolvent(double lambda, const Eigen::VectorXd& h) const {
  if (lambda <= beta_) throw LambdaTooSmall(lambda, beta_);
  if (h.size() != space_->dim()) throw MismatchedSpace("resolvent vector length");
  require_finite(h, "resolvent");
  return do_resolvent(lambda, h);
}

Eigen::VectorXd Semigroup::yosida(double lambda, const Eigen::VectorXd& h) const {
  return lambda * (lambda * resolvent(lambda, h) - h);
}

Eigen::VectorXd Semigroup::do_resolvent(double lambda, const Eigen::VectorXd& h) const {
  return resolvent_quadrature(lambda, h);
}

Eigen::VectorXd Semigroup::resolvent_quadrature(double lambda, const Eigen::VectorXd& h,
                                                int n_steps) const {
  if (lambda <= beta_) throw LambdaTooSmall(lambda, beta_);
  // composite Simpson over [0, T] with e^{-(lambda-beta) T} = 1e-12
  if (n_steps % 2 != 0) ++n_steps;
  const double T = -std::log(1e-12) / (lambda - beta_);
  const double dt = T / n_steps;
  Eigen::VectorXd acc = h;  // t = 0 term (S_0 = Id), weight 1
  for (int k = 1; k <= n_steps; ++k) {
    double t = k * dt;
    double w = (k == n_steps) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    acc += w * std::exp(-lambda * t) * apply(t, h);
  }
  return (dt / 3.0) * acc;
}

Eigen::MatrixXd Semigroup::yosida_matrix(double lambda) const {
  const int n = space_->dim();
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    A.col(j) = yosida(lambda, e);
    e[j] = 0.0;
  }
  return A;
}

SemigroupPtr Semigroup::identity(SpacePtr space) {
  return std::make_shared<IdentitySg>(std::move(space));
}
SemigroupPtr Semigroup::translation(SpacePtr space, double vx, double vy) {
  return std::make_shared<TranslationSg>(std::move(space), vx, vy);
}
SemigroupPtr Semigroup::heat_full(SpacePtr space, double conductivity) {
  return std::make_shared<HeatFullSg>(std::move(space), conductivity);
}
SemigroupPtr Semigroup::dirichlet_heat(SpacePtr space, double conductivity, int max_modes) {
  return std::make_shared<DirichletHeatSg>(std::move(space), conductivity, max_modes);
}
SemigroupPtr Semigroup::affine_scaled(SemigroupPtr inner, double alpha, double mu) {
  return std::make_shared<AffineScaledSg>(std::move(inner), alpha, mu);
}
SemigroupPtr Semigroup::product(std::vector<SemigroupPtr> components) {
  return std::make_shared<ProductSg>(std::move(components));
}

Eigen::VectorXd apply_semigroup(const Semigroup& sg, double t, const Eigen::VectorXd& h) {
  return sg.apply(t, h);
}
Eigen::VectorXd resolvent(const Semigroup& sg, double lambda, const Eigen::VectorXd& h) {
  return sg.resolvent(lambda, h);
}
Eigen::VectorXd yosida_apply(const Semigroup& sg, double lambda, const Eigen::VectorXd& h) {
  return sg.yosida(lambda, h);
}

double growth_bound(const Semigroup& sg, int n_samples, const std::vector<double>& t_grid,
                    std::uint64_t seed) {
  double best = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    Rng rng = Rng::stream(seed, s);
    Eigen::VectorXd h(sg.space()->dim());
    for (int i = 0; i < h.size(); ++i) h[i] = rng.normal();
    double nh = sg.space()->norm(h);
    if (nh <= 0.0) continue;
    for (double t : t_grid) {
      if (t <= 0.0) continue;
      double r = std::log(sg.space()->norm(sg.apply(t, h)) / nh) / t;
      best = std::max(best, r);
    }
  }
  return best;
}

InvarianceReport semigroup_cone_invariance_check(const Semigroup& sg, const Cone& cone,
                                                 int n_samples,
                                                 const std::vector<double>& t_grid,
                                                 const std::vector<double>& lambda_grid,
                                                 std::uint64_t seed) {
  InvarianceReport rep;
  for (int s = 0; s < n_samples; ++s) {
    Rng rng = Rng::stream(seed ^ 0x5eedc0de, s);
    Eigen::VectorXd h = sample_in_cone(cone, rng);
    double scale = 1.0 + cone.space->norm(h);
    for (double t : t_grid) {
      double d = cone_distance(cone, sg.apply(t, h)) / scale;
      rep.max_semigroup_distance = std::max(rep.max_semigroup_distance, d);
    }
    for (double lam : lambda_grid) {
      if (lam <= sg.growth_hint()) continue;
      double d = cone_distance(cone, lam * sg.resolvent(lam, h)) / scale;
      rep.max_resolvent_distance = std::max(rep.max_resolvent_distance, d);
    }
  }
  rep.pass = rep.max_semigroup_distance <= 1e-6 && rep.max_resolvent_distance <= 1e-6;
  return rep;
}

double Semigroup::liminf_time_floor() const {
  const Space* sp = space_.get();
  while (sp->kind == SpaceKind::Product) sp = sp->parts[0].get();
  return sp->grid.scalar() ? 1.0 : sp->grid.dx();
}

std::vector<double> default_liminf_times(const Semigroup& sg) {
  const double floor_t = std::max(sg.liminf_time_floor(), 1e-7);
  int kmax = 4;
  if (floor_t < 1.0)
    kmax = std::max(4, std::min(22, static_cast<int>(std::floor(std::log2(1.0 / floor_t)))));
  std::vector<double> ts;
  for (int k = 2; k <= kmax; ++k) ts.push_back(std::ldexp(1.0, -k));
  return ts;
}

LiminfResult liminf_rate(const Semigroup& sg, const Eigen::VectorXd& h_star,
                         const Eigen::VectorXd& h, std::vector<double> t_sequence) {
  const Space& sp = *sg.space();
  double scale = std::max(1e-300, sp.norm(h_star) * sp.norm(h));
  double pairing = sp.inner(h_star, h);
  if (std::abs(pairing) > 1e-10 * (1.0 + scale)) throw NotBoundaryPair(pairing);
  LiminfResult res;
  res.times = t_sequence.empty() ? default_liminf_times(sg) : std::move(t_sequence);
  // Rates below the roundoff floor of the pairing (amplified by the 1/t)
  // are noise; fitting a slope to them gives meaningless classifications.
  bool all_zero = true;
  for (double t : res.times) {
    double v = sp.inner(h_star, sg.apply(t, h)) / t;
    res.values.push_back(v);
    if (std::abs(v) > 1e-9 * scale) all_zero = false;
  }
  if (all_zero) {
    res.cls = LiminfClass::VANISHING;
    res.slope = 0.0;
    return res;
  }
  // least-squares slope of log |v| against log t
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = static_cast<int>(res.times.size());
  for (int i = 0; i < n; ++i) {
    double x = std::log(res.times[i]);
    double y = std::log(std::max(std::abs(res.values[i]), 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  res.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  if (res.slope <= -0.1)
    res.cls = LiminfClass::DIVERGENT;
  else if (res.slope >= 0.1)
    res.cls = LiminfClass::VANISHING;
  else
    res.cls = LiminfClass::BOUNDED;
  return res;
}

LocalReport local_semigroup_test(const Semigroup& sg, const Cone& cone, int n_pairs,
                                 std::uint64_t seed) {
  LocalReport rep;
  auto pairs = sample_boundary_pairs(cone, n_pairs, seed);
  for (const auto& bp : pairs) {
    LiminfResult r = liminf_rate(sg, bp.h_star, bp.h);
    switch (r.cls) {
      case LiminfClass::VANISHING:
        ++rep.n_vanishing;
        break;
      case LiminfClass::BOUNDED:
        ++rep.n_bounded;
        break;
      case LiminfClass::DIVERGENT:
        ++rep.n_divergent;
        break;
    }
  }
  if (rep.n_divergent > 0)
    rep.verdict = LocalVerdict::NOT_LOCAL;
  else if (rep.n_bounded == 0)
    rep.verdict = LocalVerdict::LOCAL;
  else
    rep.verdict = LocalVerdict::INCONCLUSIVE;
  return rep;
}

}  // namespace spdecone
