#include "symvar/applications.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "symvar/errors.hpp"
#include "symvar/rearrange.hpp"
#include "symvar/sampling.hpp"
#include "principles_internal.hpp"

namespace symvar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

double checked(double x, const std::string& what, double s, double t) {
  if (!std::isfinite(x))
    throw IntegrandError(what + " is not finite at (s, t) = (" + std::to_string(s) + ", " +
                         std::to_string(t) + ")");
  return x;
}

std::function<double(double)> zero_fn() {
  return [](double) { return 0.0; };
}

// min over ||w||_X = 1 of w^T M w, exactly and over Halton directions
std::pair<double, double> quadratic_form_min(const GridSpace& s, const Eigen::MatrixXd& M,
                                             std::uint64_t seed) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(M, s.gram());
  double exact = es.eigenvalues().minCoeff();
  std::mt19937_64 rng = sample_rng(seed, 0);
  Vec shift = uniform_box(rng, s.size(), 0.0, 1.0);
  double sampled = kInf;
  auto visit = [&](const Vec& w) {
    double nx = s.norm_x(w);
    if (nx > 0.0) sampled = std::min(sampled, w.dot(M * w) / (nx * nx));
  };
  for (int i = 0; i < s.size(); ++i) visit(Vec::Unit(s.size(), i));
  for (long k = 1; k <= 256; ++k) visit(halton_gaussian(k, s.size(), shift));
  return {sampled, exact};
}

}  // namespace

// ---- integrands

QuasilinearIntegrand dirichlet_integrand(double forcing) {
  QuasilinearIntegrand I;
  I.name = "dirichlet";
  I.L = [](double, double t) { return 0.5 * t * t; };
  I.L_s = [](double, double) { return 0.0; };
  I.L_t = [](double, double t) { return t; };
  I.p = 2.0;
  I.a = 0.0;
  I.b = 1.0;
  I.alpha = I.beta = I.gamma = zero_fn();
  I.forcing = forcing;
  return I;
}

QuasilinearIntegrand p_dirichlet_integrand(double p, double forcing) {
  if (!(p > 1.0)) throw InvalidExponent("p must exceed 1");
  QuasilinearIntegrand I;
  I.name = "p_dirichlet";
  I.L = [p](double, double t) { return std::pow(t, p) / p; };
  I.L_s = [](double, double) { return 0.0; };
  I.L_t = [p](double, double t) { return std::pow(t, p - 1.0); };
  I.p = p;
  I.b = 1.0;
  I.alpha = I.beta = I.gamma = zero_fn();
  I.forcing = forcing;
  return I;
}

QuasilinearIntegrand area_integrand(double forcing) {
  QuasilinearIntegrand I;
  I.name = "area";
  I.L = [](double, double t) { return std::sqrt(1.0 + t * t) - 1.0; };
  I.L_s = [](double, double) { return 0.0; };
  I.L_t = [](double, double t) { return t / std::sqrt(1.0 + t * t); };
  I.p = 2.0;
  I.a = 1.0;
  I.b = 1.0;
  I.alpha = I.beta = I.gamma = zero_fn();
  I.forcing = forcing;
  return I;
}

QuasilinearIntegrand integrand_by_name(const std::string& name, double p, double forcing) {
  if (name == "dirichlet") return dirichlet_integrand(forcing);
  if (name == "p_dirichlet") return p_dirichlet_integrand(p, forcing);
  if (name == "area") return area_integrand(forcing);
  throw InvalidArgument("unknown integrand '" + name + "' (dirichlet|p_dirichlet|area)");
}

void check_integrand(const QuasilinearIntegrand& I, int samples, std::uint64_t seed) {
  if (!I.L || !I.L_s || !I.L_t) throw InvalidArgument("integrand needs L, L_s and L_t");
  auto fail = [&](const std::string& what, double s, double t) {
    throw AssumptionViolated("integrand " + I.name + ": " + what + " at (s, t) = (" +
                             std::to_string(s) + ", " + std::to_string(t) + ")");
  };
  for (int k = 0; k < samples; ++k) {
    std::mt19937_64 rng = sample_rng(mix_seed(seed, 0x1a7e), std::uint64_t(k));
    std::uniform_real_distribution<double> us(-4.0, 4.0), ut(0.0, 4.0);
    const double s = us(rng), t = ut(rng);
    const double L = checked(I.L(s, t), "L", s, t);
    const double Ls = checked(I.L_s(s, t), "L_s", s, t);
    const double Lt = checked(I.L_t(s, t), "L_t", s, t);
    const double tol = 1e-12 * (1.0 + std::abs(L));
    if (L < -tol) fail("L < 0", s, t);
    if (s <= 0.0 && I.L(-s, t) > L + tol) fail("L(-s, t) > L(s, t) with s <= 0", s, t);
    const double tp = std::pow(t, I.p), tp1 = std::pow(t, I.p - 1.0), as = std::abs(s);
    const double al = I.alpha ? I.alpha(as) : 0.0, be = I.beta ? I.beta(as) : 0.0,
                 ga = I.gamma ? I.gamma(as) : 0.0;
    if (std::abs(L) > al * tp + I.b * tp + I.a + tol) fail("growth bound on L", s, t);
    if (std::abs(Ls) > be * tp + tol) fail("growth bound on L_s", s, t);
    if (std::abs(Lt) > ga * tp1 + I.b * tp1 + I.a + tol) fail("growth bound on L_xi", s, t);
  }
}

double quasilinear_energy(const QuasilinearIntegrand& I, const GridFunction& u) {
  const GridSpace& s = u.space();
  const Vec& x = u.values();
  const double m = s.cell_measure(), h = s.spacing();
  double e = 0.0;
  for (auto [a, b] : s.edges()) {
    double ua = a >= 0 ? x[a] : 0.0, ub = b >= 0 ? x[b] : 0.0;
    double sm = 0.5 * (ua + ub), t = std::abs(ub - ua) / h;
    e += m * checked(I.L(sm, t), "L", sm, t);
  }
  if (I.forcing != 0.0) e -= I.forcing * m * x.sum();
  return e;
}

Vec quasilinear_residual_vector(const QuasilinearIntegrand& I, const SpacePtr& space,
                                const Vec& x) {
  const GridSpace& s = *space;
  const double m = s.cell_measure(), h = s.spacing();
  Vec g = Vec::Zero(x.size());
  for (auto [a, b] : s.edges()) {
    double ua = a >= 0 ? x[a] : 0.0, ub = b >= 0 ? x[b] : 0.0;
    double d = (ub - ua) / h, sm = 0.5 * (ua + ub), t = std::abs(d);
    double ls = checked(I.L_s(sm, t), "L_s", sm, t);
    double lt = checked(I.L_t(sm, t), "L_t", sm, t);
    double flux = lt * sgn(d) / h;
    if (b >= 0) g[b] += m * (0.5 * ls + flux);
    if (a >= 0) g[a] += m * (0.5 * ls - flux);
  }
  g.array() -= I.forcing * m;
  return g;
}

double quasilinear_residual(const QuasilinearIntegrand& I, const GridFunction& u,
                            const GridFunction& v) {
  if (!u.space().same_grid(v.space())) throw SpaceMismatch("u and v live on different grids");
  return quasilinear_residual_vector(I, u.space_ptr(), u.values()).dot(v.values());
}

Functional quasilinear_functional(const QuasilinearIntegrand& I, SpacePtr space) {
  Functional f;
  f.name = "quasilinear:" + I.name;
  f.space = space;
  f.symmetry = SymmetryClass::PolarizationNonincreasing;
  f.eval = [I, space](const Vec& x) { return quasilinear_energy(I, GridFunction(space, x)); };
  f.gradient = [I, space](const Vec& x) { return quasilinear_residual_vector(I, space, x); };
  if (I.forcing == 0.0) f.lower_bound = 0.0;
  return f;
}

Certificate quasilinear_experiment(const QuasilinearIntegrand& I, SpacePtr space, double eps,
                                   const PrincipleOptions& opts) {
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  check_integrand(I, 2000, opts.seed);
  const GridSpace& s = *space;
  Functional f = quasilinear_functional(I, space);
  PrincipleOptions o = opts;
  o.metric = "X";
  Problem P = make_problem(f, "X", whole_space());
  GridFunction zero = GridFunction::zeros(space);
  ProbeLog probe = infimum_probe(f, P, zero, o);
  GridFunction u0 = theta(GridFunction(space, probe.argmin));
  o.inf_est = probe.best;
  const double rho = eps / (2.0 * s.K() + 1.0);
  Certificate c = symmetric_ekeland(f, u0, eps, rho, EkelandVariant::II, o);
  c.variant = Variant::Application;
  c.log["experiment"] = "quasilinear";
  c.log["integrand"] = I.name;
  c.log["forcing"] = I.forcing;
  c.log["inf_probe"] = detail::probe_json(probe);
  c.log["test_space"] = "V_u = X on the grid";

  const Vec& v = c.v->values();
  const Vec w = quasilinear_residual_vector(I, space, v);
  const double dual_ascent = s.dual_norm_x_ascent(w, 8);
  double dual = dual_ascent;
  if (s.p() == 2.0) {
    const double dual_solve = s.dual_norm_x_solve(w);
    dual = dual_solve;
    c.add("|dual_solve-dual_ascent|", std::abs(dual_solve - dual_ascent), 1e-8);
    c.log["dual_norm_solve"] = dual_solve;
  }
  c.log["dual_norm_ascent"] = dual_ascent;
  c.add("||w_eps||_X'", dual, eps);
  c.add("||u_eps-u_eps*||_V", detail::sym_residual(*c.v), eps);
  c.add("energy", f.eval(v) - probe.best, eps * rho);

  if (I.name == "dirichlet" && s.p() == 2.0) {
    // K u = forcing m 1, and f is mu-strongly convex in X
    const Eigen::MatrixXd& K = s.stiffness();
    Vec rhs = Vec::Constant(s.size(), I.forcing * s.cell_measure());
    Vec oracle = K.ldlt().solve(rhs);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, s.gram(),
                                                                 Eigen::EigenvaluesOnly);
    const double mu = es.eigenvalues().minCoeff();
    c.add("||u_eps-u_oracle||_X", s.norm_x(v - oracle), dual / mu * (1.0 + 1e-9) + 1e-14);
    c.log["oracle"] = std::vector<double>(oracle.data(), oracle.data() + oracle.size());
    c.log["mu"] = mu;
    c.log["oracle_symmetry_residual"] = s.norm_v(oracle - schwarz(s, oracle));
  }
  c.seal();
  return c;
}

// ---- semi-linear

SemilinearNonlinearity nonlinearity_by_name(const std::string& name) {
  SemilinearNonlinearity N;
  N.name = name;
  if (name == "zero") {
    N.g = [](double) { return 0.0; };
    N.G = [](double) { return 0.0; };
  } else if (name == "linear") {
    N.g = [](double x) { return -x; };
    N.G = [](double x) { return -0.5 * x * x; };
    N.a1 = 1.0;
    N.b = 1.0;
  } else if (name == "cubic") {
    N.g = [](double x) { return x * x * x; };
    N.G = [](double x) { return 0.25 * x * x * x * x; };
    N.b = 1.0;
    N.box = 1.0;
  } else if (name == "cubic_free") {
    N.g = [](double x) { return x * x * x; };
    N.G = [](double x) { return 0.25 * x * x * x * x; };
    N.b = 1.0;
  } else {
    throw InvalidArgument("unknown nonlinearity '" + name + "' (zero|linear|cubic|cubic_free)");
  }
  N.p = 4.0;
  return N;
}

void check_nonlinearity(const SemilinearNonlinearity& N, int samples, std::uint64_t seed) {
  if (!N.g || !N.G) throw InvalidArgument("nonlinearity needs g and G");
  if (!(N.p > 2.0 && N.p <= 6.0)) throw InvalidExponent("growth exponent must lie in (2, 6]");
  for (int k = 0; k < samples; ++k) {
    std::mt19937_64 rng = sample_rng(mix_seed(seed, 0x9e11), std::uint64_t(k));
    std::uniform_real_distribution<double> us(-8.0, 8.0);
    const double s = us(rng), gs = N.g(s);
    if (!std::isfinite(gs)) throw AssumptionViolated("g is not finite at " + std::to_string(s));
    if (N.g(-s) != -gs) throw AssumptionViolated("g is not odd at " + std::to_string(s));
    if (std::abs(gs) > N.a1 + N.b * std::pow(std::abs(s), N.p - 1.0) + 1e-12 * (1.0 + std::abs(gs)))
      throw AssumptionViolated("growth bound |g(s)| <= a1 + b |s|^(p-1) fails at " +
                               std::to_string(s));
  }
}

double lower_derivative(const std::function<double(double)>& g, double s, double delta, int n) {
  if (!(delta > 0.0)) throw InvalidArgument("delta must be positive");
  const int K = std::max(1, int(std::floor((std::sqrt(double(std::max(n, 1))) - 1.0) / 2.0)));
  double best = kInf;
  for (int a = -K; a <= K; ++a) {
    for (int b = -K; b <= K; ++b) {
      if (a == b) continue;
      const double t = delta * a / K, tau = delta * b / K;
      best = std::min(best, (g(s + t) - g(s + tau)) / (t - tau));
    }
  }
  return best;
}

Functional semilinear_functional(const SemilinearNonlinearity& N, SpacePtr space) {
  Functional f;
  f.name = "semilinear:" + N.name;
  f.space = space;
  f.symmetry = SymmetryClass::PolarizationNonincreasing;
  const double m = space->cell_measure();
  const std::optional<double> box = N.box;
  auto G = N.G;
  auto g = N.g;
  f.eval = [space, m, box, G](const Vec& x) {
    if (box && x.lpNorm<Eigen::Infinity>() > *box) return kInf;
    double pot = 0.0;
    for (int i = 0; i < x.size(); ++i) pot += G(x[i]);
    return 0.5 * x.dot(space->stiffness() * x) - m * pot;
  };
  f.gradient = [space, m, g](const Vec& x) {
    Vec r = space->stiffness() * x;
    for (int i = 0; i < x.size(); ++i) r[i] -= m * g(x[i]);
    return r;
  };
  return f;
}

std::vector<SemilinearStep> semilinear_experiment(const SemilinearNonlinearity& N, SpacePtr space,
                                                  const std::vector<double>& eps_schedule,
                                                  const PrincipleOptions& opts) {
  check_nonlinearity(N, 2000, opts.seed);
  const GridSpace& s = *space;
  if (s.p() != 2.0) throw InvalidExponent("the semilinear experiment lives in H^1 (p = 2)");
  Functional f = semilinear_functional(N, space);
  const int n = s.size();

  GridFunction phi = [&] {
    Vec v(n);
    const double r = s.radius();
    for (int i = 0; i < n; ++i) {
      auto c = s.center(i);
      v[i] = 0.25 * (1.0 - 0.5 * (c[0] * c[0] + c[1] * c[1]) / (r * r));
    }
    return GridFunction(space, v);
  }();
  for (double t : {1.0, 10.0, 100.0, 1000.0}) {
    double ft = f.eval(t * phi.values());
    if (std::isnan(ft) || ft < -1e8)
      throw NotBoundedBelow("f(t phi) = " + std::to_string(ft) + " at t = " + std::to_string(t));
  }

  PrincipleOptions o = opts;
  o.metric = "X";
  Problem P = make_problem(f, "X", whole_space());
  ProbeLog probe = infimum_probe(f, P, GridFunction::zeros(space), o);
  o.inf_est = probe.best;
  const Vec base = probe.argmin;

  // fixed non-symmetric positive direction
  Vec dir(n);
  for (int i = 0; i < n; ++i) dir[i] = 1.0 + 0.5 * double(i) / std::max(1, n - 1);
  dir /= s.norm_x(dir);
  const double inf_est = probe.best;
  MinimizingOracle oracle = [&f, base, dir, inf_est](double eps) {
    const double target = 0.5 * eps * eps * eps;
    auto excess = [&](double c) { return f.eval(base + c * dir) - inf_est - target; };
    double lo = 0.0, hi = 1e-6;
    while (excess(hi) < 0.0 && hi < 1e6) {
      lo = hi;
      hi *= 2.0;
    }
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      (excess(mid) < 0.0 ? lo : hi) = mid;
    }
    return GridFunction(f.space, base + lo * dir);
  };

  std::vector<SqpsStep> seq = sqps_sequence(f, eps_schedule, oracle, o);
  std::vector<SemilinearStep> out;
  for (size_t h = 0; h < seq.size(); ++h) {
    SemilinearStep st;
    st.sqps = std::move(seq[h]);
    Certificate& c = st.sqps.certificate;
    const Vec& v = c.v->values();
    c.variant = Variant::Application;
    c.log["experiment"] = "semilinear";
    c.log["nonlinearity"] = N.name;
    if (N.box) c.log["box"] = *N.box;
    st.energy = f.eval(v);
    st.residual_dual = s.dual_norm_x_solve(f.gradient(v));
    st.symmetry_residual = st.sqps.symmetry_residual;
    Eigen::MatrixXd M = s.stiffness();
    nlohmann::ordered_json dg = nlohmann::ordered_json::array();
    for (int i = 0; i < n; ++i) {
      double d = kInf;
      nlohmann::ordered_json sched = nlohmann::ordered_json::array();
      for (double delta : {1e-2, 1e-3, 1e-4}) {
        d = lower_derivative(N.g, v[i], delta, 441);
        sched.push_back({delta, d});
      }
      dg.push_back(sched);
      M(i, i) -= s.cell_measure() * d;
    }
    auto [sampled, exact] = quadratic_form_min(s, M, mix_seed(opts.seed, 0x5ec0 + h));
    st.second_order_min = sampled;
    st.second_order_min_exact = exact;
    c.log["||psi_h||_X'"] = st.residual_dual;
    c.add("-min_w(int|Dw|^2-int Dg(u)w^2)", -sampled, st.sqps.q.tol_q);
    c.log["lower_derivative_schedule"] = dg;
    c.log["second_order_exact"] = exact;
    c.seal();
    out.push_back(std::move(st));
  }
  return out;
}

}  // namespace symvar
