#include <algorithm>
#include <cmath>
#include <limits>

#include "symvar/errors.hpp"
#include "symvar/rearrange.hpp"
#include "symvar/sampling.hpp"
#include "principles_internal.hpp"

namespace symvar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Piecewise-linear path with fixed endpoints 0 and psi; the free variables are
// the interior nodes, stacked.
struct PathModel {
  const Functional* f;
  Vec psi;
  int m;    // segments
  int n;    // cells
  int sub;  // evaluation points per segment, nodes included

  Vec node(const Vec& z, int k) const {
    if (k == 0) return Vec::Zero(n);
    if (k == m) return psi;
    return z.segment(Eigen::Index(k - 1) * n, n);
  }

  struct Peak {
    double value = -kInf;
    int segment = 0;
    double s = 0.0;
    Vec point;
  };

  // every evaluation point, in path order
  template <class Visit>
  void walk(const Vec& z, Visit&& visit) const {
    for (int k = 0; k < m; ++k) {
      Vec a = node(z, k), b = node(z, k + 1);
      const int last = k + 1 == m ? sub - 1 : sub - 2;
      for (int i = 0; i <= last; ++i) {
        double s = double(i) / (sub - 1);
        visit(k, s, Vec((1.0 - s) * a + s * b));
      }
    }
  }

  double value(const Vec& z) const {
    double best = -kInf;
    walk(z, [&](int, double, const Vec& x) { best = std::max(best, f->eval(x)); });
    return best;
  }

  Peak peak(const Vec& z, double tie_tol) const {
    std::vector<Peak> all;
    walk(z, [&](int k, double s, const Vec& x) { all.push_back({f->eval(x), k, s, x}); });
    double top = -kInf;
    for (const Peak& p : all) top = std::max(top, p.value);
    Peak pick;
    double pick_g = kInf;
    for (const Peak& p : all) {
      if (p.value < top - tie_tol) continue;
      double g = f->space->dual_norm_x(f->gradient(p.point));
      if (g < pick_g) {
        pick_g = g;
        pick = p;
      }
    }
    return pick;
  }

  Vec gradient(const Vec& z) const {
    Peak p = peak(z, 0.0);
    Vec g = Vec::Zero(z.size());
    Vec df = f->gradient(p.point);
    auto add = [&](int k, double w) {
      if (k > 0 && k < m) g.segment(Eigen::Index(k - 1) * n, n) += w * df;
    };
    add(p.segment, 1.0 - p.s);
    add(p.segment + 1, p.s);
    return g;
  }

  double norm(const Vec& d) const {
    double r = 0.0;
    for (int k = 1; k < m; ++k) r = std::max(r, f->space->norm_x(d.segment(Eigen::Index(k - 1) * n, n)));
    return r;
  }

  Vec norm_grad(const Vec& d) const {
    int arg = 1;
    double r = -1.0;
    for (int k = 1; k < m; ++k) {
      double nk = f->space->norm_x(d.segment(Eigen::Index(k - 1) * n, n));
      if (nk > r) {
        r = nk;
        arg = k;
      }
    }
    Vec g = Vec::Zero(d.size());
    g.segment(Eigen::Index(arg - 1) * n, n) =
        f->space->norm_x_gradient(d.segment(Eigen::Index(arg - 1) * n, n));
    return g;
  }
};

}  // namespace

Certificate path_minimax(const Functional& f, const GridFunction& psi, int m_nodes, double eps,
                         const PathOptions& opts) {
  using namespace detail;
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  if (!f.gradient) throw InvalidArgument("path minimax needs df");
  if (m_nodes < 2)
    throw NoMountainPass("a path with fewer than two segments has max(f(0), f(psi)) as its peak");
  if (opts.subdivisions < 2) throw InvalidArgument("subdivisions must be >= 2");
  const GridSpace& s = psi.space();
  if (!psi.in_cone()) throw NotSymmetricInput("psi must lie in S");
  for (const Polarizer& H : s.family())
    if (polarize(psi.values(), H) != psi.values())
      throw NotSymmetricInput("psi is not fixed by every registered polarizer");
  const PrincipleOptions& o = opts.base;
  if (o.check_symmetry) check_polarization(f, start_scale(psi), o);

  const int n = s.size(), m = m_nodes;
  PathModel model{&f, psi.values(), m, n, opts.subdivisions};
  const double f0 = f.eval(Vec::Zero(n)), fpsi = f.eval(psi.values());
  const double ends = std::max(f0, fpsi);
  const double tol = 1e-9 * (1.0 + std::abs(ends));

  Problem P;
  P.f = [&model](const Vec& z) { return model.value(z); };
  P.grad = [&model](const Vec& z) { return model.gradient(z); };
  P.norm = [&model](const Vec& d) { return model.norm(d); };
  P.norm_grad = [&model](const Vec& d) { return model.norm_grad(d); };
  P.domain = cone();
  P.domain.name = "S^m";

  // straight initial path, then nodewise T_rho
  const double rho = eps / (2.0 * s.K() + 1.0);
  Vec z(Eigen::Index(m - 1) * n);
  std::vector<int> seq;
  nlohmann::ordered_json node_steps = nlohmann::ordered_json::array();
  for (int k = 1; k < m; ++k) {
    GridFunction node(psi.space_ptr(), (double(k) / m) * psi.values());
    Symmetrized t = approx_symmetrize(theta(node), rho);
    z.segment(Eigen::Index(k - 1) * n, n) = t.u.values();
    seq.insert(seq.end(), t.sequence.begin(), t.sequence.end());
    node_steps.push_back(t.sequence.size());
  }

  // sampled mountain-pass geometry on perturbed paths
  nlohmann::ordered_json geo = nlohmann::ordered_json::array();
  for (int g = 0; g < opts.geometry_probes; ++g) {
    std::mt19937_64 rng = sample_rng(mix_seed(o.seed, 0x6e0), std::uint64_t(g));
    Vec d = gaussian(rng, int(z.size()));
    double scale = 0.5 * start_scale(psi) * std::pow(0.5, g % 4);
    Vec zg = P.domain.retract(z + scale * d / std::max(1e-300, d.lpNorm<Eigen::Infinity>()));
    double v = model.value(zg);
    geo.push_back(v);
    if (!(v > ends + tol))
      throw NoMountainPass("sampled path " + std::to_string(g) + " peaks at " + std::to_string(v) +
                           " <= max(f(0), f(psi)) = " + std::to_string(ends));
  }

  const double fhat0 = model.value(z);
  ChainResult chain = ekeland_chain(P, z, [eps](const Vec&) { return eps; },
                                    search_options(o, rho, 0xd7));
  const Vec& zf = chain.v;
  const double fhat = model.value(zf);
  if (!(fhat > ends + tol))
    throw NoMountainPass("the optimized path peaks at " + std::to_string(fhat) +
                         " <= max(f(0), f(psi)) = " + std::to_string(ends));

  PathModel::Peak pk = model.peak(zf, 1e-12 * (1.0 + std::abs(fhat)));
  GridFunction u(psi.space_ptr(), pk.point);
  const double fu = f.eval(pk.point);
  const double slope = s.dual_norm_x(f.gradient(pk.point));

  Certificate c;
  c.variant = Variant::PathMinimax;
  c.functional = f.name;
  c.v = u;
  c.sigma = eps;
  c.rho = rho;
  c.seed = o.seed;
  c.tol_cert = o.tol_cert;
  c.t_rho_sequence = seq;
  // the best peak found bounds c from above; it is the recorded estimate
  c.inf_est = fhat;
  c.add("||df(u)||_X'", slope, eps);
  c.add("||u-u*||_V", sym_residual(u), eps);
  c.add("f(u)-c_est", fu - fhat, eps);
  c.add("c_est-f(u)", fhat - fu, 0.0);
  c.add("max(f(0),f(psi))-c_est", ends - fhat, 0.0);
  c.add("f_hat(gamma)-f_hat(gamma_0)", fhat - fhat0, 0.0);
  c.log["nodes"] = m + 1;
  c.log["subdivisions"] = opts.subdivisions;
  c.log["peak"] = {{"segment", pk.segment}, {"s", pk.s}};
  c.log["T_rho_steps_per_node"] = node_steps;
  c.log["geometry_probes"] = geo;
  c.log["chain"] = {{"steps", chain.energies.size() - 1}, {"energies", chain.energies}};
  nlohmann::ordered_json path = nlohmann::ordered_json::array();
  for (int k = 0; k <= m; ++k) {
    Vec x = model.node(zf, k);
    path.push_back(std::vector<double>(x.data(), x.data() + x.size()));
  }
  c.log["path"] = path;

  // the path-space Ekeland inequality is what the chain certifies; re-checks
  // of the stored point use the slope form
  SamplerSpec sp = sampler_for(o, zf);
  c.sampler = sp;
  c.slack = slack_for(o, fhat);
  c.violation = sample_violation(ekeland_deficit(P, zf, fhat, eps), zf, P, sp);
  c.inequality = {"slope", eps, 1.0, "X", "X"};
  c.seal();
  return c;
}

}  // namespace symvar
