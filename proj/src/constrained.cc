#include <cmath>
#include <limits>

#include "symvar/errors.hpp"
#include "symvar/principles.hpp"
#include "principles_internal.hpp"

namespace symvar {

namespace {

bool feasible(const std::vector<Functional>& G, int n_eq, const Vec& x, double tol) {
  for (int j = 0; j < int(G.size()); ++j) {
    double g = G[j].eval(x);
    if (!std::isfinite(g)) return false;
    if (j < n_eq ? std::abs(g) > tol : g < -tol) return false;
  }
  return true;
}

Eigen::MatrixXd metric_inverse(const GridSpace& s) { return s.gram().inverse(); }

}  // namespace

Domain constraint_domain(const std::vector<Functional>& G, int n_eq, double tol_con) {
  if (n_eq < 0 || n_eq > int(G.size())) throw InvalidArgument("n_eq out of range");
  for (const Functional& g : G)
    if (!g.gradient) throw InvalidArgument("constraint " + g.name + " has no derivative oracle");
  Domain d;
  d.name = "C";
  if (G.empty()) return d;
  const Eigen::MatrixXd Ainv = metric_inverse(*G.front().space);
  d.contains = [G, n_eq, tol_con](const Vec& x) { return feasible(G, n_eq, x, tol_con); };
  d.project = [G, n_eq, tol_con, Ainv](const Vec& x0) {
    Vec x = x0;
    for (int it = 0; it < 50; ++it) {
      std::vector<int> rows;
      std::vector<double> r;
      for (int j = 0; j < int(G.size()); ++j) {
        double g = G[j].eval(x);
        if (!std::isfinite(g)) return x;
        if (j < n_eq ? std::abs(g) > 0.1 * tol_con : g < 0.0) {
          rows.push_back(j);
          r.push_back(g);
        }
      }
      if (rows.empty()) return x;
      Eigen::MatrixXd J(rows.size(), x.size());
      Vec rv(rows.size());
      for (size_t k = 0; k < rows.size(); ++k) {
        J.row(k) = G[rows[k]].gradient(x).transpose();
        rv[k] = r[k];
      }
      Eigen::MatrixXd M = J * Ainv * J.transpose();
      Vec y = M.completeOrthogonalDecomposition().solve(rv);
      Vec dx = -Ainv * J.transpose() * y;
      if (!dx.allFinite() || dx.norm() == 0.0) return x;
      x += dx;
    }
    return x;
  };
  return d;
}

Multipliers extract_multipliers(const Functional& f, const std::vector<Functional>& G, int n_eq,
                                const Vec& u, double tol_con, double rank_tol) {
  if (!f.gradient) throw InvalidArgument("constrained principle needs df");
  const GridSpace& s = *f.space;
  const Vec g = f.gradient(u);
  Multipliers out;
  out.lambda.assign(G.size(), 0.0);
  for (int j = 0; j < int(G.size()); ++j)
    if (j < n_eq || std::abs(G[j].eval(u)) <= tol_con) out.saturated.push_back(j);
  if (out.saturated.empty()) {
    out.residual = s.dual_norm_x(g);
    return out;
  }
  const int k = int(out.saturated.size());
  Eigen::MatrixXd J(k, u.size());
  for (int i = 0; i < k; ++i) J.row(i) = G[out.saturated[i]].gradient(u).transpose();
  const Eigen::MatrixXd Ainv = metric_inverse(s);
  const Eigen::MatrixXd M = J * Ainv * J.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.eigenvalues().minCoeff() < rank_tol)
    throw ConstraintDegeneracy("saturated constraint gradients are dependent (min eigenvalue " +
                               std::to_string(es.eigenvalues().minCoeff()) + ")");
  const Vec b = J * Ainv * g;

  // sign-constrained least squares in the dual metric: enumerate which
  // saturated inequalities are held at lambda = 0
  std::vector<int> ineq;
  for (int i = 0; i < k; ++i)
    if (out.saturated[i] >= n_eq) ineq.push_back(i);
  if (ineq.size() > 16) throw InvalidArgument("too many saturated inequality constraints");
  double best = std::numeric_limits<double>::infinity();
  Vec best_l = Vec::Zero(k);
  for (unsigned mask = 0; mask < (1u << ineq.size()); ++mask) {
    std::vector<int> free;
    for (int i = 0; i < k; ++i) {
      bool held = false;
      for (size_t q = 0; q < ineq.size(); ++q)
        if (ineq[q] == i && (mask >> q) & 1u) held = true;
      if (!held) free.push_back(i);
    }
    Vec l = Vec::Zero(k);
    if (!free.empty()) {
      Eigen::MatrixXd Mf(free.size(), free.size());
      Vec bf(free.size());
      for (size_t a = 0; a < free.size(); ++a) {
        bf[a] = b[free[a]];
        for (size_t c = 0; c < free.size(); ++c) Mf(a, c) = M(free[a], free[c]);
      }
      Vec lf = Mf.ldlt().solve(bf);
      for (size_t a = 0; a < free.size(); ++a) l[free[a]] = lf[a];
    }
    bool ok = true;
    for (int i : ineq) ok = ok && l[i] >= 0.0;
    if (!ok) continue;
    Vec r = g - J.transpose() * l;
    double res = std::sqrt(std::max(0.0, r.dot(Ainv * r)));
    if (res < best) {
      best = res;
      best_l = l;
    }
  }
  for (int i = 0; i < k; ++i) out.lambda[out.saturated[i]] = best_l[i];
  Vec r = g - J.transpose() * best_l;
  out.residual = s.dual_norm_x(r);
  return out;
}

Certificate constrained_symmetric_ekeland(const Functional& f, const std::vector<Functional>& G,
                                          int n_eq, const GridFunction& u0, double eps,
                                          const ConstrainedOptions& opts) {
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  if (!f.gradient) throw InvalidArgument("constrained principle needs df");
  PrincipleOptions o = opts.base;
  Domain D = constraint_domain(G, n_eq, opts.tol_con);
  if (!D.has(u0.values())) throw BadStart("u0 violates the constraints");
  o.domain = D;
  Certificate c = symmetric_ekeland(f, u0, eps, eps, EkelandVariant::II, o);
  c.variant = Variant::Constrained;
  const Vec& v = c.v->values();
  Multipliers mult = extract_multipliers(f, G, n_eq, v, opts.tol_con, opts.rank_tol);
  c.add("||df-sum lambda dG||_X'", mult.residual, eps);
  c.add("f(v)-inf_est", f.eval(v) - c.inf_est, eps * eps);
  c.log["multipliers"] = mult.lambda;
  c.log["saturated"] = mult.saturated;
  c.log["n_eq"] = n_eq;
  c.log["tol_con"] = opts.tol_con;
  c.seal();
  return c;
}

}  // namespace symvar
