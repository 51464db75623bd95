#include "symvar/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "symvar/errors.hpp"
#include "symvar/sampling.hpp"

namespace symvar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec penalty_gradient(const Problem& P, const Penalty& pen, const Vec& w) {
  Vec g = P.grad(w);
  if (pen.weight > 0.0) {
    Vec d = w - pen.center;
    double nd = P.norm(d);
    if (nd > 0.0) g += pen.weight * pen.power * std::pow(nd, pen.power - 1.0) * P.norm_grad(d);
  }
  return g;
}

}  // namespace

Domain whole_space() { return Domain{}; }

Domain cone() {
  Domain d;
  d.name = "S";
  d.contains = [](const Vec& x) { return (x.array() >= 0.0).all(); };
  d.project = [](const Vec& x) { return Vec(x.cwiseMax(0.0)); };
  return d;
}

double penalized_value(const Problem& P, const Penalty& pen, const Vec& w) {
  if (!P.domain.has(w)) return kInf;
  double fw = P.f(w);
  if (!std::isfinite(fw)) return kInf;
  if (pen.weight > 0.0) fw += pen.weight * std::pow(P.norm(w - pen.center), pen.power);
  return fw;
}

Vec local_descent(const Problem& P, const Penalty& pen, const Vec& start,
                  const SearchOptions& opts) {
  const int n = int(start.size());
  Vec x = P.domain.retract(start);
  double fx = penalized_value(P, pen, x);
  if (!std::isfinite(fx)) return x;
  long evals = 1;
  auto value = [&](const Vec& y) {
    ++evals;
    return penalized_value(P, pen, y);
  };
  const bool smooth = P.grad && (pen.weight == 0.0 || P.norm_grad);

  // fixed compass: +-e_i plus a few seeded oblique directions, unit in the metric
  std::vector<Vec> dirs;
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Unit(n, i);
    dirs.push_back(normalized(e, P.norm));
    dirs.push_back(normalized(Vec(-e), P.norm));
  }
  std::mt19937_64 rng = sample_rng(opts.seed, 0x0b11);
  for (int k = 0; k < 4; ++k) {
    Vec d = normalized(gaussian(rng, n), P.norm);
    dirs.push_back(d);
    dirs.push_back(-d);
  }

  for (int round = 0; round < 12 && evals < opts.max_evals; ++round) {
    const double f_round = fx;
    if (smooth) {
      double alpha = opts.scale;
      for (int it = 0; it < opts.max_gradient_iters && evals < opts.max_evals; ++it) {
        Vec g = penalty_gradient(P, pen, x);
        if (!g.allFinite()) break;
        Vec d = P.precondition ? Vec(-P.precondition(g)) : Vec(-g);
        double dn = P.norm(d);
        if (!(dn > 0.0)) break;
        d /= dn;
        bool moved = false;
        while (alpha > opts.min_step * (1.0 + x.lpNorm<Eigen::Infinity>())) {
          Vec y = P.domain.retract(x + alpha * d);
          double fy = value(y);
          if (fy < fx) {
            x = std::move(y);
            fx = fy;
            alpha *= 2.0;
            moved = true;
            break;
          }
          alpha *= 0.5;
        }
        if (!moved) break;
      }
    }
    double step = opts.scale;
    while (step > opts.min_step * (1.0 + x.lpNorm<Eigen::Infinity>()) && evals < opts.max_evals) {
      bool improved = false;
      for (const Vec& d : dirs) {
        Vec y = P.domain.retract(x + step * d);
        double fy = value(y);
        if (fy < fx) {
          x = std::move(y);
          fx = fy;
          improved = true;
        }
      }
      if (!improved) step *= 0.5;
    }
    if (!(fx < f_round)) break;
  }
  return x;
}

Vec minimize_penalized(const Problem& P, const Penalty& pen, const SearchOptions& opts) {
  const int n = int(pen.center.size());
  std::vector<Vec> starts{pen.center};
  for (const Vec& s : opts.extra_starts) starts.push_back(s);
  for (int r = 0; r < opts.restarts; ++r) {
    std::mt19937_64 rng = sample_rng(opts.seed, 0x5747 + r);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vec d = normalized(gaussian(rng, n), P.norm);
    starts.push_back(pen.center + opts.scale * unif(rng) * d);
  }
  Vec best = P.domain.retract(pen.center);
  double best_val = penalized_value(P, pen, best);
  for (const Vec& s : starts) {
    Vec x = local_descent(P, pen, s, opts);
    double fx = penalized_value(P, pen, x);
    if (fx < best_val) {
      best = std::move(x);
      best_val = fx;
    }
  }
  return best;
}

ProbeLog estimate_infimum(const Problem& P, const std::vector<Vec>& starts,
                          const SearchOptions& opts) {
  ProbeLog log;
  log.best = kInf;
  Penalty none;
  for (const Vec& s : starts) {
    none.center = s;
    Vec x = local_descent(P, none, s, opts);
    double fx = penalized_value(P, none, x);
    log.start_values.push_back(fx);
    if (fx < log.best) {
      log.best = fx;
      log.argmin = x;
    }
  }
  if (!std::isfinite(log.best)) throw OutsideDomain("every infimum probe start is outside dom f");
  return log;
}

ChainResult ekeland_chain(const Problem& P, const Vec& start,
                          const std::function<double(const Vec&)>& modulus,
                          const SearchOptions& search, double tol_rel, int max_steps) {
  ChainResult out;
  out.v = start;
  double fv = P.f(start);
  if (!std::isfinite(fv)) throw OutsideDomain("chain start is outside dom f");
  out.energies.push_back(fv);
  for (int k = 0;; ++k) {
    if (k >= max_steps)
      throw ConvergenceFailure("Ekeland chain hit its step cap", fv,
                               std::vector<double>(out.v.data(), out.v.data() + out.v.size()));
    Penalty pen{out.v, modulus(out.v), 1.0};
    SearchOptions so = search;
    so.seed = search.seed + 7919ULL * k;
    Vec w = minimize_penalized(P, pen, so);
    double fw = P.f(w);
    double val = fw + pen.weight * P.norm(w - out.v);
    if (!(val <= fv - tol_rel * (1.0 + std::abs(fv)))) break;
    if (!(fw <= fv)) throw ConvergenceFailure("energy increased along the chain", fw);
    out.v = std::move(w);
    fv = fw;
    out.energies.push_back(fv);
  }
  return out;
}

ViolationReport sample_violation(const std::function<double(const Vec&)>& deficit,
                                 const Vec& v, const Problem& P, const SamplerSpec& spec) {
  ViolationReport rep;
  const int n = int(v.size());
  const int kinds = int(spec.radii.size()) + 1;
  for (int i = 0; i < spec.n_samples; ++i) {
    std::mt19937_64 rng = sample_rng(spec.seed, std::uint64_t(i));
    int kind = i % kinds;
    Vec w;
    if (kind < kinds - 1) {
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      Vec d = normalized(gaussian(rng, n), P.norm);
      w = v + spec.radii[kind] * (0.5 + 0.5 * unif(rng)) * d;
    } else {
      w = uniform_box(rng, n, -spec.box, spec.box);
    }
    w = P.domain.retract(w);
    if (!P.domain.has(w)) continue;
    ++rep.n_samples;
    double d = deficit(w);
    if (std::isfinite(d) && d > rep.max_violation) {
      rep.max_violation = d;
      rep.argmax_w = w;
    }
  }
  return rep;
}

}  // namespace symvar
