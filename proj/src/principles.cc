#include "symvar/principles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "symvar/errors.hpp"
#include "symvar/rearrange.hpp"
#include "symvar/sampling.hpp"
#include "principles_internal.hpp"

namespace symvar {

namespace detail {

double slack_for(const PrincipleOptions& o, double fv) {
  return o.slack_rel * (1.0 + std::abs(fv));
}

SearchOptions search_options(const PrincipleOptions& o, double rho, std::uint64_t salt) {
  SearchOptions s;
  s.scale = std::max(4.0 * rho, 0.5);
  s.restarts = o.restarts;
  s.seed = mix_seed(o.seed, salt);
  return s;
}

SamplerSpec sampler_for(const PrincipleOptions& o, const Vec& v) {
  SamplerSpec s;
  s.seed = mix_seed(o.seed, 0x7e51f1edULL);
  s.n_samples = o.verify_samples;
  s.box = 2.0 * (1.0 + v.lpNorm<Eigen::Infinity>());
  return s;
}

double sym_residual(const GridFunction& v, const std::string& metric) {
  Vec d = v.values() - schwarz(v).values();
  if (metric == "l1") return d.lpNorm<1>();
  if (metric == "l2") return d.norm();
  return v.space().norm_v(d);
}

std::function<double(const Vec&)> ekeland_deficit(const Problem& P, const Vec& v, double fv,
                                                  double modulus) {
  return [&P, v, fv, modulus](const Vec& w) {
    double fw = P.f(w);
    if (!std::isfinite(fw)) return -std::numeric_limits<double>::infinity();
    return fv - modulus * P.norm(w - v) - fw;
  };
}

nlohmann::ordered_json probe_json(const ProbeLog& log) {
  nlohmann::ordered_json j;
  j["method"] = "multistart local descent";
  j["starts"] = log.start_values.size();
  nlohmann::ordered_json vals = nlohmann::ordered_json::array();
  for (double x : log.start_values)
    vals.push_back(std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json("inf"));
  j["start_values"] = vals;
  j["best"] = log.best;
  return j;
}

double start_scale(const GridFunction& u0) {
  return std::max(1.0, u0.values().lpNorm<Eigen::Infinity>());
}

void seal_ekeland(Certificate& c, const Problem& P, double modulus, const PrincipleOptions& o) {
  const Vec& v = c.v->values();
  double fv = P.f(v);
  c.slack = slack_for(o, fv);
  c.tol_cert = o.tol_cert;
  c.sampler = sampler_for(o, v);
  c.inequality = {"ekeland", modulus, 1.0, o.metric, P.domain.name};
  c.violation = sample_violation(ekeland_deficit(P, v, fv, modulus), v, P, c.sampler);
  c.seal();
}

}  // namespace detail

using namespace detail;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x)) throw InvalidArgument(std::string(name) + " must be positive");
}

Domain domain_by_name(const std::string& name) {
  if (name == "S") return cone();
  return whole_space();
}

struct InfInfo {
  double value;
  nlohmann::ordered_json log;
};

InfInfo infimum_for(const Functional& f, const Problem& P, const GridFunction& u0,
                    const PrincipleOptions& o) {
  if (o.inf_est) return {*o.inf_est, {{"method", "supplied"}, {"best", *o.inf_est}}};
  ProbeLog log = infimum_probe(f, P, u0, o);
  return {log.best, probe_json(log)};
}

Certificate base_certificate(Variant variant, const Functional& f, double sigma, double rho,
                             const PrincipleOptions& o) {
  Certificate c;
  c.variant = variant;
  c.functional = f.name;
  c.sigma = sigma;
  c.rho = rho;
  c.seed = o.seed;
  c.tol_cert = o.tol_cert;
  return c;
}

// K bounds ||.||_V by the engine metric; it is 1 when the engine already
// measures in V or in a plain vector norm
double metric_k(const GridSpace& s, const std::string& metric) {
  return metric == "X" ? s.K() : 1.0;
}

double sym_bound(const GridSpace& s, double rho, const std::string& metric) {
  return (metric_k(s, metric) * (s.c_theta() + 1.0) + 1.0) * rho;
}

void rethrow_with_prefix(const std::string& prefix) {
  try {
    throw;
  } catch (const ConvergenceFailure& e) {
    throw ConvergenceFailure(prefix + e.what(), e.residual(), e.best());
  } catch (const BadStart& e) {
    throw BadStart(prefix + e.what());
  } catch (const SymmetryViolation& e) {
    throw SymmetryViolation(prefix + e.what());
  } catch (const OutsideDomain& e) {
    throw OutsideDomain(prefix + e.what());
  } catch (const AssumptionViolated& e) {
    throw AssumptionViolated(prefix + e.what());
  }
}

// Shared tail of the chain-based variants: start point, chain, and the
// measurements every variant reports.
struct ChainOutcome {
  Symmetrized sym;
  ChainResult chain;
  double f_u0 = 0.0;
  double f_v = 0.0;
};

ChainOutcome run_chain(const Problem& P, const GridFunction& start, double t_rho,
                       double modulus, const PrincipleOptions& o, std::uint64_t salt) {
  ChainOutcome out{approx_symmetrize(start, t_rho), {}, 0.0, 0.0};
  if (!P.domain.has(out.sym.u.values()))
    throw AssumptionViolated("T_rho leaves the admissible set (not polarization stable)");
  out.chain = ekeland_chain(P, out.sym.u.values(), [modulus](const Vec&) { return modulus; },
                            search_options(o, t_rho, salt));
  out.f_v = P.f(out.chain.v);
  return out;
}

nlohmann::ordered_json chain_log(const ChainResult& r) {
  nlohmann::ordered_json j;
  j["steps"] = r.energies.size() - 1;
  j["energies"] = r.energies;
  return j;
}

}  // namespace

Problem make_problem(const Functional& f, const std::string& metric, const Domain& domain) {
  if (!f.space) throw InvalidArgument("functional has no space");
  SpacePtr s = f.space;
  Problem P;
  P.f = f.eval;
  P.grad = f.gradient;
  if (metric == "X") {
    P.norm = [s](const Vec& d) { return s->norm_x(d); };
    P.norm_grad = [s](const Vec& d) { return s->norm_x_gradient(d); };
    if (s->p() == 2.0) P.precondition = [s](const Vec& g) { return s->riesz(g); };
  } else if (metric == "V") {
    P.norm = [s](const Vec& d) { return s->norm_v(d); };
    P.norm_grad = [s](const Vec& d) { return s->norm_v_gradient(d); };
  } else if (metric == "l1") {
    P.norm = [](const Vec& d) { return d.lpNorm<1>(); };
    P.norm_grad = [](const Vec& d) { return Vec(d.array().sign().matrix()); };
  } else if (metric == "l2") {
    P.norm = [](const Vec& d) { return d.norm(); };
    P.norm_grad = [](const Vec& d) {
      double n = d.norm();
      return n > 0.0 ? Vec(d / n) : Vec(Vec::Zero(d.size()));
    };
  } else {
    throw InvalidArgument("unknown metric '" + metric + "' (X|V|l1|l2)");
  }
  P.domain = domain;
  return P;
}

void check_polarization(const Functional& f, double scale, const PrincipleOptions& o) {
  const GridSpace& s = *f.space;
  for (int k = 0; k < o.symmetry_probes; ++k) {
    std::mt19937_64 rng = sample_rng(mix_seed(o.seed, 0x5e77), std::uint64_t(k));
    Vec u = uniform_box(rng, s.size(), 0.0, k % 2 ? 1.0 : scale);
    double fu = f.eval(u);
    if (!std::isfinite(fu)) continue;
    for (size_t h = 0; h < s.family().size(); ++h) {
      double fh = f.eval(polarize(u, s.family()[h]));
      if (fh > fu + o.tol_sym * (1.0 + std::abs(fu)))
        throw SymmetryViolation("f(u^H) > f(u) for " + f.name + " at probe " + std::to_string(k) +
                                ", polarizer " + std::to_string(h) + ": " +
                                std::to_string(fh) + " > " + std::to_string(fu));
    }
  }
}

ProbeLog infimum_probe(const Functional& f, const Problem& P, const GridFunction& u0,
                       const PrincipleOptions& o) {
  const int n = u0.size();
  const double b = start_scale(u0);
  std::vector<Vec> starts{u0.values(), theta(u0).values(), schwarz(u0).values(), Vec::Zero(n)};
  for (int k = 0; k < 4; ++k) {
    std::mt19937_64 rng = sample_rng(mix_seed(o.seed, 0x1f0b), std::uint64_t(k));
    starts.push_back(uniform_box(rng, n, -b, b));
  }
  SearchOptions so;
  so.scale = 0.5 * b;
  so.restarts = 0;
  so.seed = mix_seed(o.seed, 0x1f0c);
  (void)f;
  return estimate_infimum(P, starts, so);
}

Certificate ekeland_point(const Functional& f, const Domain& domain, const GridFunction& u0,
                          double sigma, double rho, const PrincipleOptions& o) {
  require_positive(sigma, "sigma");
  require_positive(rho, "rho");
  Problem P = make_problem(f, o.metric, domain);
  if (!domain.has(u0.values())) throw BadStart("u0 is outside the domain");
  double f0 = f(u0);
  if (!std::isfinite(f0)) throw BadStart("f(u0) is not finite");
  InfInfo inf = infimum_for(f, P, u0, o);
  if (!(f0 <= inf.value + sigma * rho))
    throw BadStart("f(u0) exceeds inf_est + sigma rho");
  ChainResult chain = ekeland_chain(P, u0.values(), [sigma](const Vec&) { return sigma; },
                                    search_options(o, rho, 0xe1));
  Certificate c = base_certificate(Variant::EkelandCore, f, sigma, rho, o);
  c.v = GridFunction(u0.space_ptr(), chain.v);
  double fv = P.f(chain.v);
  c.inf_est = std::min(inf.value, fv);
  c.add("f(v)-f(u0)", fv - f0, 0.0);
  c.add("||v-u0||", P.norm(chain.v - u0.values()), rho + slack_for(o, fv) / sigma);
  c.add("f(u0)-inf_est", f0 - c.inf_est, sigma * rho);
  c.log["inf_probe"] = inf.log;
  c.log["chain"] = chain_log(chain);
  seal_ekeland(c, P, sigma, o);
  return c;
}

Certificate symmetric_ekeland(const Functional& f, const GridFunction& u0, double sigma,
                              double rho, EkelandVariant variant, const PrincipleOptions& o) {
  require_positive(sigma, "sigma");
  require_positive(rho, "rho");
  if (!f.space || !f.space->same_grid(u0.space()))
    throw SpaceMismatch("u0 and f live on different grids");
  if (variant != EkelandVariant::II && variant != EkelandVariant::III && !u0.in_cone())
    throw BadStart("u0 must lie in S");
  if (o.check_symmetry && variant != EkelandVariant::III)
    check_polarization(f, start_scale(u0), o);
  const GridSpace& s = u0.space();
  const double f0 = f(u0);
  if (!std::isfinite(f0)) throw BadStart("f(u0) is not finite");

  switch (variant) {
    case EkelandVariant::I: {
      Domain D = o.domain.value_or(cone());
      if (!D.has(u0.values())) throw BadStart("u0 is outside S'");
      Problem P = make_problem(f, o.metric, D);
      InfInfo inf = infimum_for(f, P, u0, o);
      if (!(f0 <= inf.value + sigma * rho)) throw BadStart("f(u0) exceeds inf_est + sigma rho");
      ChainOutcome r = run_chain(P, u0, rho, sigma, o, 0xa1);
      Certificate c = base_certificate(Variant::SymEkelandI, f, sigma, rho, o);
      c.v = GridFunction(u0.space_ptr(), r.chain.v);
      c.t_rho_sequence = r.sym.sequence;
      c.inf_est = std::min(inf.value, r.f_v);
      const Vec& ut = r.sym.u.values();
      c.add("||v-v*||_V", sym_residual(*c.v, o.metric), (2.0 * metric_k(s, o.metric) + 1.0) * rho);
      c.add("f(v)-f(u0)", r.f_v - f0, 0.0);
      c.add("||v-T_rho u0||", P.norm(r.chain.v - ut), rho);
      c.add("||v-u0||", P.norm(r.chain.v - u0.values()), rho + P.norm(ut - u0.values()));
      c.add("f(u0)-inf_est", f0 - c.inf_est, sigma * rho);
      c.log["inf_probe"] = inf.log;
      c.log["chain"] = chain_log(r.chain);
      seal_ekeland(c, P, sigma, o);
      return c;
    }
    case EkelandVariant::II: {
      Domain D = o.domain.value_or(whole_space());
      Problem P = make_problem(f, o.metric, D);
      GridFunction xi = o.dominating ? GridFunction(u0.space_ptr(), o.dominating(u0.values()))
                                     : theta(u0);
      if (!xi.in_cone()) throw AssumptionViolated("dominating point is not in S");
      double fxi = f(xi);
      if (!(fxi <= f0)) throw AssumptionViolated("dominating point has f(xi) > f(u0)");
      InfInfo inf = infimum_for(f, P, u0, o);
      if (!(f0 <= inf.value + sigma * rho)) throw BadStart("f(u0) exceeds inf_est + sigma rho");
      ChainOutcome r = run_chain(P, xi, rho, sigma, o, 0xa2);
      Certificate c = base_certificate(Variant::SymEkelandII, f, sigma, rho, o);
      c.v = GridFunction(u0.space_ptr(), r.chain.v);
      c.t_rho_sequence = r.sym.sequence;
      c.inf_est = std::min(inf.value, r.f_v);
      const Vec& ut = r.sym.u.values();
      c.add("||v-v*||_V", sym_residual(*c.v, o.metric), sym_bound(s, rho, o.metric));
      c.add("f(v)-f(u0)", r.f_v - f0, 0.0);
      c.add("||v-T_rho xi||", P.norm(r.chain.v - ut), rho);
      c.add("||v-u0||", P.norm(r.chain.v - u0.values()), rho + P.norm(ut - u0.values()));
      c.add("f(u0)-inf_est", f0 - c.inf_est, sigma * rho);
      c.log["xi"] = to_json(xi)["values"];
      c.log["inf_probe"] = inf.log;
      c.log["chain"] = chain_log(r.chain);
      seal_ekeland(c, P, sigma, o);
      return c;
    }
    case EkelandVariant::III: {
      if (o.Y.empty()) throw InvalidArgument("variant III needs a nonempty point set Y");
      int best = -1;
      double fbest = kInf;
      for (size_t i = 0; i < o.Y.size(); ++i) {
        double fy = f(o.Y[i]);
        if (fy < fbest) {
          fbest = fy;
          best = int(i);
        }
      }
      if (best < 0) throw BadStart("f is +inf on all of Y");
      const GridFunction& u = o.Y[best];
      if (!u.in_cone()) throw BadStart("Y must lie in S");
      Domain D = o.domain.value_or(whole_space());
      Problem P = make_problem(f, o.metric, D);
      InfInfo inf = infimum_for(f, P, u, o);
      const double gap = fbest - inf.value;
      if (!(gap < sigma * rho)) throw BadStart("inf_Y f is not below inf_est + sigma rho");
      auto dist_Y = [&](const Vec& v) {
        double d = kInf;
        for (const GridFunction& y : o.Y) d = std::min(d, P.norm(v - y.values()));
        return d;
      };
      PrincipleOptions inner = o;
      inner.dominating = [](const Vec& x) { return x; };

      if (o.f_seq.empty()) {
        // f_h = f and Y inside X_{H*}: T_rho u = u
        for (const GridFunction& y : o.Y) {
          bool fixed = y.in_cone();
          for (const Polarizer& H : s.family()) fixed = fixed && polarize(y.values(), H) == y.values();
          if (!fixed) throw NotSymmetricInput("Y must lie in X_{H*} when f_h = f");
        }
        inner.inf_est = inf.value;
        Certificate c = symmetric_ekeland(f, u, sigma, rho, EkelandVariant::II, inner);
        c.variant = Variant::SymEkelandIII;
        double fv = f(*c.v);
        c.inf_est = std::min(inf.value, fv);
        c.add("|f(v)-inf_est|", std::abs(fv - c.inf_est), sigma * rho);
        c.add("d(v,Y)", dist_Y(c.v->values()), rho);
        c.log["inf_probe"] = inf.log;
        c.log["Y_argmin"] = best;
        c.seal();
        return c;
      }

      const double s_hat = gap / rho + (sigma - gap / rho) / 4.0;
      const double s_tilde = s_hat + (sigma - s_hat) / 2.0;
      const double m = sigma / (sigma - s_tilde) + 1.0;
      const double margin = (s_tilde - s_hat) * rho / 2.0;
      nlohmann::ordered_json tried = nlohmann::ordered_json::array();
      for (int h = std::max(0, o.h0); h < int(o.f_seq.size()); ++h) {
        const Functional& fh = o.f_seq[h];
        GridFunction uh = o.recovery ? GridFunction(u.space_ptr(), o.recovery(u.values(), h)) : u;
        Problem Ph = make_problem(fh, o.metric, D);
        PrincipleOptions po = o;
        po.seed = mix_seed(o.seed, 0x3300 + h);
        ProbeLog lh = infimum_probe(fh, Ph, uh, po);
        double dist = P.norm(uh.values() - u.values());
        double fhu = fh(uh);
        bool ok = uh.in_cone() && dist < rho / m && fhu <= fbest + margin &&
                  lh.best >= inf.value - margin;
        tried.push_back({{"h", h}, {"||u_h-u||", dist}, {"f_h(u_h)", fhu}, {"inf_est_h", lh.best},
                         {"accepted", ok}});
        if (!ok) continue;
        if (o.check_symmetry) check_polarization(fh, start_scale(uh), o);
        const double sigma_p = m * s_tilde / (m - 1.0);
        const double rho_p = (m - 1.0) * rho / m;
        inner.inf_est = lh.best;
        inner.check_symmetry = false;
        Certificate c = symmetric_ekeland(fh, uh, sigma_p, rho_p, EkelandVariant::II, inner);
        c.variant = Variant::SymEkelandIII;
        c.sigma = sigma;
        c.rho = rho;
        double fv = fh(*c.v);
        Symmetrized tu = approx_symmetrize(uh, rho_p);
        c.measured.clear();
        c.add("||v-v*||_V", sym_residual(*c.v, o.metric), sym_bound(s, rho, o.metric));
        c.add("|f_h(v)-inf_est|", std::abs(fv - inf.value), sigma * rho);
        c.add("d(v,Y)", dist_Y(c.v->values()), rho + P.norm(tu.u.values() - uh.values()));
        c.add("f_h(v)-f_h(u_h)", fv - fhu, 0.0);
        c.inf_est = inf.value;
        c.log["h"] = h;
        c.log["m"] = m;
        c.log["sigma_hat"] = s_hat;
        c.log["sigma_tilde"] = s_tilde;
        c.log["inner_sigma"] = sigma_p;
        c.log["inner_rho"] = rho_p;
        c.log["candidates"] = tried;
        c.log["inf_probe"] = inf.log;
        c.seal();
        return c;
      }
      throw ConvergenceFailure("no h >= h0 satisfies the Gamma-limit recovery conditions", gap);
    }
    case EkelandVariant::IV: {
      const double rho1 = rho, rho2 = o.rho2 > 0.0 ? o.rho2 : rho;
      Domain D = o.domain.value_or(whole_space());
      Problem P = make_problem(f, o.metric, D);
      InfInfo inf = infimum_for(f, P, u0, o);
      if (!(f0 < inf.value + sigma * rho1)) throw BadStart("f(u0) is not below inf_est + sigma rho_1");
      // a chain at a smaller modulus leaves a (sigma - sigma_in) ||w - v|| margin: strong minimum
      const double sigma_in = sigma * (2.0 * rho1 + rho2) / (2.0 * (rho1 + rho2));
      ChainOutcome r = run_chain(P, u0, rho1 + rho2, sigma_in, o, 0xa4);
      Certificate c = base_certificate(Variant::SymEkelandIV, f, sigma, rho, o);
      c.v = GridFunction(u0.space_ptr(), r.chain.v);
      c.t_rho_sequence = r.sym.sequence;
      c.inf_est = std::min(inf.value, r.f_v);
      const Vec& ut = r.sym.u.values();
      const Vec& v = r.chain.v;
      c.add("||v-v*||_V", sym_residual(*c.v, o.metric), sym_bound(s, rho1 + rho2, o.metric));
      c.add("f(v)-f(u0)", r.f_v - f0, 0.0);
      c.add("||v-T_rho u0||", P.norm(v - ut), rho1 + rho2);
      c.add("f(u0)-inf_est", f0 - c.inf_est, sigma * rho1);
      // stability: f(w) + sigma ||w - v|| <= f(v) + delta forces ||w - v|| small
      const double sl = slack_for(o, r.f_v);
      nlohmann::ordered_json stab = nlohmann::ordered_json::array();
      for (int k = 1; k <= 3; ++k) {
        const double delta = sigma * rho1 * std::pow(10.0, -k);
        SamplerSpec sp = sampler_for(o, v);
        sp.seed = mix_seed(o.seed, 0x57ab + k);
        const double fv = r.f_v;
        auto in_level = [&P, v, fv, sigma, delta](const Vec& w) {
          double fw = P.f(w);
          if (!std::isfinite(fw) || fw + sigma * P.norm(w - v) > fv + delta) return -1.0;
          return P.norm(w - v);
        };
        ViolationReport rep = sample_violation(in_level, v, P, sp);
        const double bound = (delta + sl) / (sigma - sigma_in);
        c.add("stability(delta=" + std::to_string(delta) + ")", rep.max_violation, bound);
        stab.push_back({{"delta", delta}, {"max_dist", rep.max_violation}, {"bound", bound}});
      }
      c.log["rho2"] = rho2;
      c.log["sigma_in"] = sigma_in;
      c.log["stability"] = stab;
      c.log["inf_probe"] = inf.log;
      c.log["chain"] = chain_log(r.chain);
      seal_ekeland(c, P, sigma, o);
      return c;
    }
    case EkelandVariant::V: {
      Domain D = o.domain.value_or(whole_space());
      Problem P = make_problem(f, o.metric, D);
      ChainOutcome r = run_chain(P, u0, rho, sigma, o, 0xa5);
      Certificate c = base_certificate(Variant::SymEkelandV, f, sigma, rho, o);
      c.v = GridFunction(u0.space_ptr(), r.chain.v);
      c.t_rho_sequence = r.sym.sequence;
      const Vec& ut = r.sym.u.values();
      const Vec& v = r.chain.v;
      const double dist = P.norm(v - ut);
      // (b): exact recorded comparison
      c.add("f(v)+sigma||v-T_rho u0||-f(u0)", r.f_v + sigma * dist - f0, 0.0);
      c.add("f(v)-f(u0)", r.f_v - f0, 0.0);
      InfInfo inf = infimum_for(f, P, u0, o);
      c.inf_est = std::min(inf.value, r.f_v);
      if (f0 <= c.inf_est + sigma * rho) {
        c.add("||v-T_rho u0||", dist, (f0 - r.f_v) / sigma);
        c.add("(f(u0)-f(v))/sigma", (f0 - r.f_v) / sigma, rho);
        c.add("||v-v*||_V", sym_residual(*c.v, o.metric), sym_bound(s, rho, o.metric));
        c.add("||v-u0||", P.norm(v - u0.values()), rho + P.norm(ut - u0.values()));
        c.log["location"] = "available: f(u0) <= inf_est + sigma rho";
      } else {
        c.log["location"] = "unavailable: f(u0) > inf_est + sigma rho";
        c.log["||v-v*||_V"] = sym_residual(*c.v, o.metric);
      }
      c.log["inf_probe"] = inf.log;
      c.log["chain"] = chain_log(r.chain);
      seal_ekeland(c, P, sigma, o);
      return c;
    }
  }
  throw InvalidArgument("unknown variant");
}

Certificate symmetric_borwein_preiss(const Functional& f, const GridFunction& u0, double sigma,
                                     double rho, double p_exp, const PrincipleOptions& o) {
  require_positive(sigma, "sigma");
  require_positive(rho, "rho");
  if (!(p_exp >= 1.0)) throw InvalidExponent("p_exp must be >= 1");
  if (!u0.in_cone()) throw BadStart("u0 must lie in S");
  if (o.check_symmetry) check_polarization(f, start_scale(u0), o);
  const GridSpace& s = u0.space();
  Domain D = o.domain.value_or(whole_space());
  Problem P = make_problem(f, o.metric, D);
  const double f0 = f(u0);
  if (!std::isfinite(f0)) throw BadStart("f(u0) is not finite");
  InfInfo inf = infimum_for(f, P, u0, o);
  const double budget = sigma * std::pow(rho, p_exp);
  if (!(f0 < inf.value + budget)) throw BadStart("f(u0) is not below inf_est + sigma rho^p");

  Symmetrized sym = approx_symmetrize(u0, rho);
  const Vec ut = sym.u.values();
  Vec eta = ut, v = ut, prev = ut;
  bool closed_form = true;
  SearchOptions so = search_options(o, rho, 0xb9);
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  int j = 0;
  for (; j < 60; ++j) {
    std::optional<Vec> pv;
    if (f.prox && o.metric == "X" && D.name == "X") pv = f.prox(eta, sigma, p_exp);
    if (pv) {
      v = *pv;
    } else {
      closed_form = false;
      SearchOptions sj = so;
      sj.seed = mix_seed(so.seed, j);
      sj.extra_starts = {prev};
      v = minimize_penalized(P, Penalty{eta, sigma, p_exp}, sj);
    }
    prev = v;
    double step = P.norm(v - eta);
    steps.push_back({{"j", j}, {"||v_j-eta_j||", step}, {"f(v_j)", P.f(v)}});
    if (step <= rho / 2.0) break;
    eta = 0.5 * (eta + v);
  }
  const double fv = P.f(v);
  if (!(fv < inf.value + budget))
    throw ConvergenceFailure("inner minimizer stalled above inf_est + sigma rho^p", fv - inf.value,
                             std::vector<double>(v.data(), v.data() + v.size()));

  Certificate c = base_certificate(Variant::SymBP, f, sigma, rho, o);
  c.p_exp = p_exp;
  c.v = GridFunction(u0.space_ptr(), v);
  c.eta = GridFunction(u0.space_ptr(), eta);
  c.t_rho_sequence = sym.sequence;
  c.inf_est = std::min(inf.value, fv);
  const double tr = P.norm(ut - u0.values());
  c.add("||v-v*||_V", sym_residual(*c.v, o.metric), sym_bound(s, rho, o.metric));
  c.add("||v-u0||", P.norm(v - u0.values()), rho + tr);
  c.add("||eta-u0||", P.norm(eta - u0.values()), rho + tr);
  c.add("f(v)-inf_est", fv - c.inf_est, budget);
  c.add("f(v)-f(u0)", fv - f0, 0.0);
  c.log["inner"] = {{"iterations", j + 1}, {"closed_form", closed_form}, {"steps", steps}};
  c.log["inf_probe"] = inf.log;

  c.slack = slack_for(o, fv);
  c.sampler = sampler_for(o, v);
  c.inequality = {"borwein-preiss", sigma, p_exp, o.metric, D.name};
  const double base = std::pow(P.norm(v - eta), p_exp);
  auto deficit = [&P, v, eta, fv, sigma, p_exp, base](const Vec& w) {
    double fw = P.f(w);
    if (!std::isfinite(fw)) return -kInf;
    return fv + sigma * (base - std::pow(P.norm(w - eta), p_exp)) - fw;
  };
  c.violation = sample_violation(deficit, v, P, c.sampler);
  c.seal();
  return c;
}

double zhong_radius(const std::function<double(double)>& h, double rho) {
  require_positive(rho, "rho");
  auto integrand = [&h](double s) { return 1.0 / (1.0 + h(s)); };
  auto I = [&](double r) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, r, 30,
                                                                          1e-14);
  };
  // I(r) <= r since h >= 0, so the root is at least rho
  double lo = rho, hi = rho;
  while (I(hi) < rho) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12)
      throw DivergenceAssumptionViolated("integral of 1/(1+h) stays below rho up to r = 1e12");
  }
  if (hi == lo) return hi;
  auto [a, b] = boost::math::tools::bisect([&](double r) { return I(r) - rho; }, lo, hi,
                                           [](double x, double y) { return std::abs(y - x) <= 1e-12; });
  return 0.5 * (a + b);
}

std::function<double(double)> weight_by_name(const std::string& name) {
  if (name == "zero") return [](double) { return 0.0; };
  if (name == "linear") return [](double s) { return s; };
  if (name == "quadratic") return [](double s) { return s * s; };
  throw InvalidArgument("unknown weight '" + name + "' (zero|linear|quadratic)");
}

Certificate symmetric_zhong(const Functional& f, const GridFunction& u0, double sigma,
                            double rho, const std::function<double(double)>& h,
                            const PrincipleOptions& o) {
  require_positive(sigma, "sigma");
  require_positive(rho, "rho");
  if (!u0.in_cone()) throw BadStart("u0 must lie in S");
  if (o.check_symmetry) check_polarization(f, start_scale(u0), o);
  const double r = zhong_radius(h, rho);
  const GridSpace& s = u0.space();
  Domain D = o.domain.value_or(whole_space());
  Problem P = make_problem(f, o.metric, D);
  const double f0 = f(u0);
  if (!std::isfinite(f0)) throw BadStart("f(u0) is not finite");
  InfInfo inf = infimum_for(f, P, u0, o);
  if (!(f0 < inf.value + sigma * rho)) throw BadStart("f(u0) is not below inf_est + sigma rho");

  Symmetrized sym = approx_symmetrize(u0, r);
  const Vec ut = sym.u.values();
  auto modulus = [&](const Vec& x) { return sigma / (1.0 + h(P.norm(x - ut))); };
  ChainResult chain = ekeland_chain(P, ut, modulus, search_options(o, r, 0xc3));
  const Vec& v = chain.v;
  const double fv = P.f(v);
  const double dist = P.norm(v - ut);
  const double mod = sigma / (1.0 + h(dist));

  Certificate c = base_certificate(Variant::SymZhong, f, sigma, rho, o);
  c.v = GridFunction(u0.space_ptr(), v);
  c.t_rho_sequence = sym.sequence;
  c.inf_est = std::min(inf.value, fv);
  c.add("||v-v*||_V", sym_residual(*c.v, o.metric), sym_bound(s, r, o.metric));
  c.add("f(v)-f(u0)", fv - f0, 0.0);
  c.add("||v-u0||", P.norm(v - u0.values()), r + P.norm(ut - u0.values()));
  c.add("||v-T_r u0||", dist, r);
  c.log["r"] = r;
  c.log["weighted_modulus"] = mod;
  c.log["inf_probe"] = inf.log;
  c.log["chain"] = chain_log(chain);
  seal_ekeland(c, P, mod, o);
  return c;
}

Functional dgz_bump(const GridFunction& v, double eps, double delta) {
  require_positive(eps, "eps");
  require_positive(delta, "delta");
  SpacePtr s = v.space_ptr();
  const Vec c = v.values();
  const double k = 3.0 * std::sqrt(3.0) / 8.0;
  Functional g;
  g.name = "bump";
  g.space = s;
  g.eval = [s, c, eps, delta, k](const Vec& w) {
    double t = s->norm_x(w - c) / delta;
    if (t >= 1.0) return 0.0;
    double b = 1.0 - t * t;
    return -eps * k * b * b;
  };
  g.gradient = [s, c, eps, delta, k](const Vec& w) {
    Vec d = w - c;
    double t = s->norm_x(d) / delta;
    if (t >= 1.0 || t == 0.0) return Vec(Vec::Zero(d.size()));
    double db = -4.0 * t * (1.0 - t * t);
    return Vec(-eps * k * db / delta * s->norm_x_gradient(d));
  };
  return g;
}

Certificate dgz_check(const Functional& f, const Functional& g, const GridFunction& v,
                      double eps, const PrincipleOptions& o) {
  require_positive(eps, "eps");
  const GridSpace& s = v.space();
  Functional F;
  F.name = f.name + "+" + g.name;
  F.space = f.space;
  F.eval = [&f, &g](const Vec& w) { return f.eval(w) + g.eval(w); };
  Domain D = o.domain.value_or(whole_space());
  Problem P = make_problem(F, o.metric, D);
  const Vec& x = v.values();
  const double Fv = F.eval(x);

  Certificate c = base_certificate(Variant::DGZCheck, F, eps, eps, o);
  c.v = v;
  c.sampler = sampler_for(o, x);
  SamplerSpec probes = c.sampler;
  probes.seed = mix_seed(o.seed, 0xd62);
  ViolationReport gsup =
      sample_violation([&g](const Vec& w) { return std::abs(g.eval(w)); }, x, P, probes);
  double sup_g = std::max(gsup.max_violation, std::abs(g.eval(x)));
  double sup_dg = 0.0;
  if (g.gradient) {
    SamplerSpec dp = probes;
    if (s.p() != 2.0) dp.n_samples = std::min(dp.n_samples, 500);
    ViolationReport d = sample_violation(
        [&g, &s](const Vec& w) { return s.dual_norm_x(g.gradient(w)); }, x, P, dp);
    sup_dg = d.max_violation;
  } else {
    SamplerSpec dp = probes;
    dp.n_samples = std::min(dp.n_samples, 200);
    ViolationReport d = sample_violation(
        [&g, &v, &o](const Vec& w) {
          return strong_slope(g, GridFunction(v.space_ptr(), w), {1e-4, 1e-6}, 64, o.seed).upper;
        },
        x, P, dp);
    sup_dg = d.max_violation;
  }
  c.add("sup|g|", sup_g, eps);
  c.add("sup||g'||_X'", sup_dg, eps);
  c.inf_est = Fv;
  c.slack = slack_for(o, Fv);
  c.inequality = {"dgz", 0.0, 1.0, o.metric, D.name};
  c.violation = sample_violation(
      [&P, Fv](const Vec& w) {
        double Fw = P.f(w);
        return std::isfinite(Fw) ? Fv - Fw : -kInf;
      },
      x, P, c.sampler);
  c.log["derivative_source"] = g.gradient ? "oracle" : "strong slope";
  c.seal();
  return c;
}

namespace {

QBoundReport q_bound_report(const Functional& f, const Vec& v, double eps, double tol_q,
                            std::uint64_t seed) {
  const GridSpace& s = *f.space;
  const int n = s.size();
  QBoundReport rep;
  rep.tol_q = tol_q;
  rep.min_quotient = kInf;
  const double fv = f.eval(v);
  std::mt19937_64 rng = sample_rng(seed, 0);
  Vec shift = uniform_box(rng, n, 0.0, 1.0);
  const double scales[] = {1.0, 0.1};
  const double ts[] = {1e-1, 1e-2, 1e-3};
  for (long k = 1; k <= 64; ++k) {
    Vec dir = normalized(halton_gaussian(k, n, shift), [&s](const Vec& d) { return s.norm_x(d); });
    for (double sc : scales) {
      Vec z = sc * dir;
      const double nz = s.norm_x(z);
      for (double t : ts) {
        double a = f.eval(v + t * z), b = f.eval(v - t * z);
        if (!std::isfinite(a) || !std::isfinite(b)) continue;
        double q = (a + b - 2.0 * fv) / (t * t) + 2.0 * eps * nz * nz;
        ++rep.probes;
        rep.min_quotient = std::min(rep.min_quotient, q);
      }
    }
  }
  if (rep.probes == 0) rep.min_quotient = 0.0;
  rep.ok = rep.min_quotient >= -tol_q;
  return rep;
}

}  // namespace

std::vector<SqpsStep> sqps_sequence(const Functional& f, const std::vector<double>& eps_schedule,
                                    const MinimizingOracle& oracle, const PrincipleOptions& o) {
  if (eps_schedule.empty()) throw InvalidArgument("empty eps schedule");
  for (size_t h = 1; h < eps_schedule.size(); ++h)
    if (!(eps_schedule[h] < eps_schedule[h - 1]))
      throw InvalidArgument("eps schedule must be decreasing");
  if (o.check_symmetry) check_polarization(f, 1.0, o);
  std::vector<SqpsStep> out;
  for (size_t h = 0; h < eps_schedule.size(); ++h) {
    const double eps = eps_schedule[h];
    try {
      GridFunction u = oracle(eps);
      GridFunction xi = o.dominating ? GridFunction(u.space_ptr(), o.dominating(u.values()))
                                     : theta(u);
      if (!(f(xi) <= f(u))) throw AssumptionViolated("dominating point has f(xi) > f(u)");
      PrincipleOptions po = o;
      po.seed = mix_seed(o.seed, 0x5995 + h);
      po.check_symmetry = false;
      SqpsStep st;
      st.eps = eps;
      st.certificate = symmetric_borwein_preiss(f, xi, eps, eps, 2.0, po);
      const GridFunction& v = *st.certificate.v;
      const GridSpace& s = v.space();
      st.slope = strong_slope(f, v, {1e-3, 1e-4, 1e-5}, 600, po.seed);
      const double tr = s.norm_x(approx_symmetrize(xi, eps).u.values() - xi.values());
      st.slope_bound = 2.0 * eps * s.norm_x(v.values() - st.certificate.eta->values());
      st.symmetry_residual = sym_residual(v);
      st.q = q_bound_report(f, v.values(), eps, 1e-6, po.seed);
      st.certificate.add("slope_upper", st.slope.upper, 4.0 * eps * (eps + tr));
      st.certificate.add("Q_min+2eps||zeta||^2", -st.q.min_quotient, st.q.tol_q);
      st.certificate.log["slope"] = to_json(st.slope);
      st.certificate.log["slope_bound_2eps||v-eta||"] = st.slope_bound;
      st.certificate.log["q_report"] = {{"min", st.q.min_quotient}, {"probes", st.q.probes},
                                        {"tol_q", st.q.tol_q}, {"ok", st.q.ok}};
      st.certificate.seal();
      out.push_back(std::move(st));
    } catch (const Error&) {
      rethrow_with_prefix("sqps step " + std::to_string(h) + ": ");
      throw;
    }
  }
  return out;
}

ViolationReport verify_certificate(const Functional& f, const Certificate& cert, int n_samples,
                                   std::optional<SamplerSpec> sampler,
                                   const std::optional<Domain>& domain) {
  if (!cert.v) return {};
  Domain D = domain ? *domain : domain_by_name(cert.inequality.domain);
  Problem P = make_problem(f, cert.inequality.metric, D);
  SamplerSpec sp = sampler ? *sampler : cert.sampler;
  if (!sampler) sp.seed = mix_seed(cert.sampler.seed, 0x0dd5eed);
  if (n_samples > 0) sp.n_samples = n_samples;
  const Vec v = cert.v->values();
  const double fv = P.f(v);
  const Inequality& q = cert.inequality;
  if (q.kind == "ekeland") return sample_violation(ekeland_deficit(P, v, fv, q.modulus), v, P, sp);
  if (q.kind == "borwein-preiss") {
    if (!cert.eta) throw InvalidArgument("Borwein-Preiss certificate without eta");
    const Vec eta = cert.eta->values();
    const double base = std::pow(P.norm(v - eta), q.power);
    return sample_violation(
        [&P, &q, eta, fv, base](const Vec& w) {
          double fw = P.f(w);
          if (!std::isfinite(fw)) return -kInf;
          return fv + q.modulus * (base - std::pow(P.norm(w - eta), q.power)) - fw;
        },
        v, P, sp);
  }
  if (q.kind == "dgz")
    return sample_violation(
        [&P, fv](const Vec& w) {
          double fw = P.f(w);
          return std::isfinite(fw) ? fv - fw : -kInf;
        },
        v, P, sp);
  if (q.kind == "slope") {
    ViolationReport rep;
    rep.n_samples = 1;
    if (f.gradient) {
      double d = f.space->dual_norm_x(f.gradient(v)) - q.modulus;
      if (d > 0.0) {
        rep.max_violation = d;
        rep.argmax_w = v;
      }
    }
    return rep;
  }
  throw InvalidArgument("unknown inequality kind '" + q.kind + "'");
}

}  // namespace symvar
