#include <cmath>
#include <limits>

#include "symvar/applications.hpp"
#include "symvar/errors.hpp"
#include "symvar/rearrange.hpp"
#include "symvar/sampling.hpp"
#include "principles_internal.hpp"

namespace symvar {

namespace {

std::string vec_str(const Vec& v) {
  std::string s = "(";
  for (int i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s + ")";
}

std::vector<Vec> probe_points(const GridSpace& s, std::uint64_t seed, int count) {
  std::vector<Vec> pts;
  for (int k = 0; k < count; ++k) {
    std::mt19937_64 rng = sample_rng(mix_seed(seed, 0xf1c5), std::uint64_t(k));
    pts.push_back(uniform_box(rng, s.size(), 0.0, k % 2 ? 1.0 : 4.0));
  }
  return pts;
}

// start point: Theta of the multi-start argmin, with inf_est fixed from the probe
GridFunction probe_start(const Functional& f, const std::string& metric, PrincipleOptions& o,
                         nlohmann::ordered_json& log) {
  Problem P = make_problem(f, metric, whole_space());
  ProbeLog probe = infimum_probe(f, P, GridFunction::zeros(f.space), o);
  o.inf_est = probe.best;
  log = detail::probe_json(probe);
  return theta(GridFunction(f.space, probe.argmin));
}

}  // namespace

FixedPointResult caristi_fixed_point(const Map& F, const Functional& f, double eps,
                                     const PrincipleOptions& opts) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidEpsilon("Caristi needs eps in (0, 1)");
  const GridSpace& s = *f.space;
  auto caristi_gap = [&](const Vec& u) {
    Vec Fu = F(u);
    double fu = f.eval(u);
    return s.norm_x(Fu - u) - (fu - f.eval(Fu)) - 1e-9 * (1.0 + std::abs(fu));
  };
  for (const Vec& u : probe_points(s, opts.seed, 32))
    if (caristi_gap(u) > 0.0)
      throw AssumptionViolated("Caristi condition ||F(u)-u|| <= f(u)-f(F(u)) fails at u = " +
                               vec_str(u));

  PrincipleOptions o = opts;
  o.metric = "X";
  nlohmann::ordered_json probe_log;
  GridFunction u0 = probe_start(f, "X", o, probe_log);
  Certificate c = symmetric_ekeland(f, u0, eps, eps, EkelandVariant::II, o);
  const Vec xi = c.v->values();
  if (caristi_gap(xi) > 0.0)
    throw AssumptionViolated("Caristi condition fails at the output xi = " + vec_str(xi));

  // the Ekeland inequality tested at w = F(xi) gives (1 - eps) ||F(xi) - xi|| <= slack
  const Vec w = F(xi);
  const double res = s.norm_x(w - xi);
  const double slack = std::max(0.0, f.eval(xi) - eps * res - f.eval(w));
  FixedPointResult r{*c.v, res, slack, slack / (1.0 - eps), 1.0, {}};
  c.variant = Variant::Application;
  c.log["experiment"] = "caristi";
  c.log["start_probe"] = probe_log;
  c.add("slack_at_F(xi)", slack, c.slack);
  c.add("||F(xi)-xi||_X", res, r.bound);
  c.seal();
  r.certificate = std::move(c);
  return r;
}

FixedPointResult clarke_fixed_point(const Map& F, SpacePtr space, double sigma_c, double eps,
                                    const PrincipleOptions& opts) {
  if (!(sigma_c >= 0.0 && sigma_c < 1.0)) throw InvalidArgument("contraction sigma must lie in [0, 1)");
  if (!(eps > 0.0 && eps < 1.0 - sigma_c)) throw InvalidEpsilon("Clarke needs eps in (0, 1 - sigma)");
  const GridSpace& s = *space;
  auto nv = [&s](const Vec& d) { return s.norm_v(d); };

  // directional contraction: some t in (0, 1] with ||F(t F(u) + (1-t) u) - F(u)|| <= sigma t ||F(u) - u||
  auto contraction_t = [&](const Vec& u) -> double {
    Vec Fu = F(u);
    double gap = nv(Fu - u);
    if (gap == 0.0) return 1.0;
    for (double t = 1.0; t > 1e-6; t *= 0.5) {
      if (nv(F(t * Fu + (1.0 - t) * u) - Fu) <= sigma_c * t * gap * (1.0 + 1e-12) + 1e-300)
        return t;
    }
    return 0.0;
  };

  for (const Vec& u : probe_points(s, opts.seed, 32)) {
    Vec Fu = F(u);
    if ((Fu.array() < 0.0).any()) throw AssumptionViolated("F(u) leaves S at u = " + vec_str(u));
    for (size_t h = 0; h < s.family().size(); ++h) {
      const Polarizer& H = s.family()[h];
      double err = (F(polarize(u, H)) - polarize(Fu, H)).lpNorm<Eigen::Infinity>();
      if (err > 1e-12 * (1.0 + Fu.lpNorm<Eigen::Infinity>()))
        throw AssumptionViolated("F(u^H) != F(u)^H at u = " + vec_str(u) + ", polarizer " +
                                 std::to_string(h));
    }
    if (contraction_t(u) == 0.0)
      throw AssumptionViolated("no t in (0, 1] satisfies the directional contraction at u = " +
                               vec_str(u));
  }

  Functional f;
  f.name = "clarke_residual";
  f.space = space;
  f.symmetry = SymmetryClass::PolarizationNonincreasing;
  f.lower_bound = 0.0;
  f.eval = [F, space](const Vec& u) { return space->norm_v(u - F(u)); };

  PrincipleOptions o = opts;
  o.metric = "V";
  nlohmann::ordered_json probe_log;
  GridFunction u0 = probe_start(f, "V", o, probe_log);
  Certificate c = symmetric_ekeland(f, u0, eps, eps, EkelandVariant::II, o);
  const Vec xi = c.v->values();
  const double t = contraction_t(xi);
  if (t == 0.0) throw AssumptionViolated("directional contraction fails at the output");
  const Vec Fxi = F(xi);
  const Vec w = t * Fxi + (1.0 - t) * xi;
  const double res = nv(Fxi - xi);
  // f(w) <= (1 - t + sigma t) f(xi), tested against f(w) >= f(xi) - eps ||w - xi||
  const double slack = std::max(0.0, f.eval(xi) - eps * nv(w - xi) - f.eval(w));
  FixedPointResult r{*c.v, res, slack, slack / (t * (1.0 - sigma_c - eps)), t, {}};
  c.variant = Variant::Application;
  c.log["experiment"] = "clarke";
  c.log["sigma_contraction"] = sigma_c;
  c.log["t"] = t;
  c.log["start_probe"] = probe_log;
  c.add("slack_at_w", slack, c.slack);
  c.add("||F(xi)-xi||_V", res, r.bound);
  c.seal();
  r.certificate = std::move(c);
  return r;
}

}  // namespace symvar
