#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "symvar/applications.hpp"
#include "symvar/errors.hpp"
#include "symvar/rearrange.hpp"
#include "symvar/sampling.hpp"
#include "principles_internal.hpp"

namespace symvar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// argmin of a convex function on [0, 1]
double minimize_unit(const std::function<double(double)>& phi) {
  auto r = boost::math::tools::brent_find_minima(phi, 0.0, 1.0, 52);
  double t = r.first, v = r.second;
  for (double e : {0.0, 1.0})
    if (phi(e) <= v) {
      t = e;
      v = phi(e);
    }
  return t;
}

using Projector = std::function<Vec(const Vec&)>;

Vec dykstra(const Vec& y, const std::vector<Projector>& sets, int max_sweeps = 5000) {
  Vec x = y;
  std::vector<Vec> inc(sets.size(), Vec::Zero(y.size()));
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    Vec before = x;
    for (size_t i = 0; i < sets.size(); ++i) {
      Vec z = sets[i](x + inc[i]);
      inc[i] = x + inc[i] - z;
      x = std::move(z);
    }
    if ((x - before).lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + x.lpNorm<Eigen::Infinity>()))
      break;
  }
  return x;
}

double norm_p_of(const std::string& norm) {
  if (norm == "l1") return 1.0;
  if (norm == "l2") return 2.0;
  throw InvalidArgument("unknown norm '" + norm + "' (l1|l2)");
}

bool fixed_by_family(const GridSpace& s, const Vec& v) {
  if ((v.array() < 0.0).any()) return false;
  for (const Polarizer& H : s.family())
    if (polarize(v, H) != v) return false;
  return true;
}

Vec ball_sample(std::mt19937_64& rng, const Ball& B, bool boundary) {
  const int n = int(B.center.size());
  Vec d = gaussian(rng, n);
  d /= d.norm();
  double r = B.radius;
  if (!boundary) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    r *= std::pow(u(rng), 1.0 / n);
  }
  return B.center + r * d;
}

}  // namespace

double lp_norm(const Vec& v, double p) {
  if (p == 1.0) return v.lpNorm<1>();
  if (p == 2.0) return v.norm();
  if (std::isinf(p)) return v.lpNorm<Eigen::Infinity>();
  double s = 0.0;
  for (int i = 0; i < v.size(); ++i) s += std::pow(std::abs(v[i]), p);
  return std::pow(s, 1.0 / p);
}

bool drop_membership(const Vec& y, const Drop& D, double p, double tol) {
  const Vec w = y - D.x, d = D.B.center - D.x;
  const double R = D.B.radius;
  if (p == 2.0) {
    // |w - t d|^2 <= t^2 R^2 for some t in [0, 1]
    const double A = d.squaredNorm() - R * R, Bq = -2.0 * w.dot(d), Cq = w.squaredNorm();
    auto q = [&](double t) { return (A * t + Bq) * t + Cq; };
    double best = std::min(q(0.0), q(1.0));
    if (A > 0.0) {
      double ts = -Bq / (2.0 * A);
      if (ts > 0.0 && ts < 1.0) best = std::min(best, q(ts));
    }
    return best <= tol * (1.0 + Cq + d.squaredNorm());
  }
  auto phi = [&](double t) { return lp_norm(w - t * d, p) - t * R; };
  return phi(minimize_unit(phi)) <= tol * (1.0 + lp_norm(w, p));
}

bool petal_membership(const Vec& y, const Petal& P, double p, double tol) {
  const double base = lp_norm(P.x0 - P.x1, p);
  return P.eps * lp_norm(y - P.x0, p) + lp_norm(y - P.x1, p) <= base + tol * (1.0 + base);
}

Vec project_drop(const Vec& y, const Drop& D) {
  if (drop_membership(y, D, 2.0, 0.0)) return y;
  const Vec w = y - D.x, d = D.B.center - D.x;
  const double R = D.B.radius;
  auto psi = [&](double t) { return (w - t * d).norm() - t * R; };
  const double t = minimize_unit(psi);
  Vec e = w - t * d;
  const double ne = e.norm();
  if (ne <= t * R) return y;
  return D.x + t * d + (ne > 0.0 ? Vec(t * R * e / ne) : Vec(Vec::Zero(y.size())));
}

InclusionReport petal_inclusions(const Petal& P, int samples, double p, std::uint64_t seed) {
  InclusionReport rep;
  const double dist = lp_norm(P.x0 - P.x1, p);
  rep.radius = (1.0 - P.eps) / (1.0 + P.eps) * dist;
  const int n = int(P.x0.size());
  auto slack = [&](const Vec& y) {
    return P.eps * lp_norm(y - P.x0, p) + lp_norm(y - P.x1, p) - dist;
  };
  auto sphere = [&](std::mt19937_64& rng) {
    Vec d = gaussian(rng, n);
    return Vec(P.x1 + rep.radius * d / lp_norm(d, p));
  };
  for (int k = 0; k < samples; ++k) {
    std::mt19937_64 rng = sample_rng(mix_seed(seed, 0xba11), std::uint64_t(k));
    Vec y = sphere(rng);
    ++rep.ball_samples;
    rep.worst = std::max(rep.worst, slack(y));
    if (!petal_membership(y, P, p)) ++rep.ball_failures;
  }
  // the drop of the ball seen from x0: boundary rays x0 + t (b - x0), b on the sphere
  for (int k = 0; k < samples; ++k) {
    std::mt19937_64 rng = sample_rng(mix_seed(seed, 0xd209), std::uint64_t(k));
    Vec b = sphere(rng);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double t = u(rng);
    Vec y = P.x0 + t * (b - P.x0);
    ++rep.drop_samples;
    rep.worst = std::max(rep.worst, slack(y));
    if (!petal_membership(y, P, p)) ++rep.drop_failures;
  }
  return rep;
}

Domain polyhedron(const Eigen::MatrixXd& A, const Vec& b, double tol) {
  if (A.rows() != b.size()) throw InvalidArgument("polyhedron: A and b disagree");
  Domain d;
  d.name = "C";
  d.contains = [A, b, tol](const Vec& u) {
    return A.rows() == 0 || (A * u - b).maxCoeff() <= tol;
  };
  std::vector<Projector> halves;
  for (int i = 0; i < A.rows(); ++i) {
    Vec a = A.row(i).transpose();
    double bi = b[i], aa = a.squaredNorm();
    halves.push_back([a, bi, aa](const Vec& u) {
      double g = a.dot(u) - bi;
      return g > 0.0 ? Vec(u - g / aa * a) : u;
    });
  }
  d.project = [halves](const Vec& u) { return dykstra(u, halves); };
  return d;
}

Certificate symmetric_drop_point(const GridFunction& x, const Ball& B, const Domain& C, double eps,
                                 int minimality_samples, const PrincipleOptions& opts) {
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  const GridSpace& s = x.space();
  SpacePtr space = x.space_ptr();
  if (B.center.size() != s.size()) throw SpaceMismatch("ball center has the wrong length");
  if (!(B.radius > 0.0)) throw InvalidArgument("ball radius must be positive");
  if (!fixed_by_family(s, B.center)) throw NotSymmetricInput("the ball center is not in X_{H*}");
  for (int k = 0; k < 256; ++k) {
    std::mt19937_64 rng = sample_rng(mix_seed(opts.seed, 0xb0), std::uint64_t(k));
    if (!fixed_by_family(s, ball_sample(rng, B, true)))
      throw NotSymmetricInput("the ball is not contained in X_{H*}");
  }
  if (!C.has(x.values())) throw BadStart("x is not in C");

  Functional f;
  f.name = "dist_l2(.,B)";
  f.space = space;
  f.symmetry = SymmetryClass::PolarizationNonincreasing;
  f.lower_bound = 0.0;
  const Vec c0 = B.center;
  const double R = B.radius;
  f.eval = [c0, R](const Vec& u) { return std::max(0.0, (u - c0).norm() - R); };
  f.gradient = [c0, R](const Vec& u) {
    Vec d = u - c0;
    double n = d.norm();
    return n > R ? Vec(d / n) : Vec(Vec::Zero(d.size()));
  };

  // d(B, C) from a multi-start minimization of dist(., B) over C
  PrincipleOptions o = opts;
  o.metric = "l2";
  Problem PC = make_problem(f, "l2", C);
  SearchOptions so = detail::search_options(o, 1.0, 0xdc);
  so.restarts = 0;
  std::vector<Vec> starts{x.values(), C.retract(c0), C.retract(Vec::Zero(s.size()))};
  ProbeLog dlog = estimate_infimum(PC, starts, so);
  const double dBC = dlog.best, diam = 2.0 * R;
  if (!(dBC > 0.0)) throw SeparationViolated("d(B, C) estimate is not positive");
  if (!(eps * diam < (1.0 - eps) * dBC))
    throw SeparationViolated("eps = " + std::to_string(eps) + " exceeds the threshold d/(diam+d) = " +
                             std::to_string(dBC / (diam + dBC)));

  const Drop D{x.values(), B};
  Domain Sp;
  Sp.name = "S'";
  Sp.contains = [D, C](const Vec& u) {
    return (u.array() >= -1e-12).all() && drop_membership(u, D, 2.0, 1e-9) && C.has(u);
  };
  Sp.project = [D, C](const Vec& u) {
    return dykstra(u, {[D](const Vec& v) { return project_drop(v, D); },
                       [C](const Vec& v) { return C.retract(v); },
                       [](const Vec& v) { return Vec(v.cwiseMax(0.0)); }},
                   2000);
  };

  Problem PS = make_problem(f, "l2", Sp);
  ProbeLog plog = infimum_probe(f, PS, x, o);
  GridFunction u0(space, plog.argmin);
  o.domain = Sp;
  o.inf_est = plog.best;
  Certificate c = symmetric_ekeland(f, u0, eps, eps, EkelandVariant::I, o);
  const Vec xi = c.v->values();

  // Drop(xi, B) cap C \ {xi} should be empty
  int hits = 0;
  double far = 0.0;
  for (int k = 0; k < minimality_samples; ++k) {
    std::mt19937_64 rng = sample_rng(mix_seed(opts.seed, 0xd7e), std::uint64_t(k));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vec b = ball_sample(rng, B, false);
    double t = 1.0 - u(rng);
    Vec w = xi + t * (b - xi);
    if (C.has(w) && (w - xi).norm() > 1e-7) {
      ++hits;
      far = std::max(far, (w - xi).norm());
    }
  }
  c.variant = Variant::SymEkelandI;
  c.add("||xi-xi*||", detail::sym_residual(*c.v, "l2"), eps);
  c.add("second points in Drop(xi,B) cap C", hits, 0.0);
  c.log["experiment"] = "drop";
  c.log["d(B,C)_est"] = dBC;
  c.log["d(B,C)_probe"] = detail::probe_json(dlog);
  c.log["eps_threshold"] = dBC / (diam + dBC);
  c.log["minimality_samples"] = minimality_samples;
  c.log["minimality_max_distance"] = far;
  c.seal();
  return c;
}

Certificate symmetric_petal_point(const GridFunction& x, const GridFunction& y, const Domain& C,
                                  double eps, const std::string& norm, int minimality_samples,
                                  const PrincipleOptions& opts) {
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  const double p = norm_p_of(norm);
  const GridSpace& s = x.space();
  SpacePtr space = x.space_ptr();
  if (!s.same_grid(y.space())) throw SpaceMismatch("x and y live on different grids");
  if (!fixed_by_family(s, x.values())) throw NotSymmetricInput("x^H != x for some polarizer");
  if (!fixed_by_family(s, y.values())) throw NotSymmetricInput("y^H != y for some polarizer");
  if (!C.has(x.values())) throw BadStart("x is not in C");
  if (C.has(y.values())) throw BadStart("y must lie outside C");

  Functional f;
  f.name = "dist_" + norm + "(.,y)";
  f.space = space;
  f.symmetry = SymmetryClass::PolarizationNonincreasing;
  f.lower_bound = 0.0;
  const Vec yv = y.values();
  f.eval = [yv, p](const Vec& u) { return lp_norm(u - yv, p); };
  if (p == 2.0) {
    f.gradient = [yv](const Vec& u) {
      Vec d = u - yv;
      double n = d.norm();
      return n > 0.0 ? Vec(d / n) : Vec(Vec::Zero(d.size()));
    };
  } else {
    f.gradient = [yv](const Vec& u) { return Vec((u - yv).array().sign().matrix()); };
  }

  PrincipleOptions o = opts;
  o.metric = norm;
  Problem PC = make_problem(f, norm, C);
  SearchOptions so = detail::search_options(o, 1.0, 0xd1);
  so.restarts = 0;
  ProbeLog dlog = estimate_infimum(PC, {x.values(), C.retract(yv)}, so);
  const double dyC = dlog.best, dxy = lp_norm(x.values() - yv, p);
  if (!(dxy <= dyC + eps * eps + 1e-12 * (1.0 + dxy)))
    throw BadStart("||x - y|| exceeds d(y, C) + eps^2 (d(y, C) estimated as " +
                   std::to_string(dyC) + ")");

  o.domain = C;
  o.inf_est = dyC;
  Certificate c = symmetric_ekeland(f, x, eps, eps, EkelandVariant::V, o);
  const Vec xi = c.v->values();
  const Petal from_x{eps, x.values(), yv}, from_xi{eps, xi, yv};

  int hits = 0;
  const double scale = 1.0 + dxy;
  for (int k = 0; k < minimality_samples; ++k) {
    std::mt19937_64 rng = sample_rng(mix_seed(opts.seed, 0x9e7), std::uint64_t(k));
    Vec d = gaussian(rng, s.size());
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double r = scale * std::pow(10.0, -5.0 * u(rng));
    Vec w = C.retract(xi + r * d / d.norm());
    if (C.has(w) && (w - xi).norm() > 1e-7 && petal_membership(w, from_xi, p)) ++hits;
  }
  c.variant = Variant::SymEkelandV;
  c.add("eps||xi-x||+||xi-y||-||x-y||",
        eps * lp_norm(xi - x.values(), p) + lp_norm(xi - yv, p) - dxy, 0.0);
  c.add("xi in Petal(x,y)", petal_membership(xi, from_x, p) ? 0.0 : 1.0, 0.0);
  c.add("||xi-xi*||", detail::sym_residual(*c.v, norm), eps);
  c.add("second points in Petal(xi,y) cap C", hits, 0.0);
  c.log["experiment"] = "petal";
  c.log["d(y,C)_est"] = dyC;
  c.log["d(y,C)_probe"] = detail::probe_json(dlog);
  c.log["minimality_samples"] = minimality_samples;
  c.seal();
  return c;
}

}  // namespace symvar
