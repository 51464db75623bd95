#include "symvar/slopes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "symvar/errors.hpp"
#include "symvar/sampling.hpp"

namespace symvar {

SlopeEstimate strong_slope(const Functional& f, const GridFunction& u,
                           const std::vector<double>& radii, int n_samples,
                           std::uint64_t seed) {
  const GridSpace& s = u.space();
  const Vec& x = u.values();
  const double fu = f.eval(x);
  if (!std::isfinite(fu)) throw OutsideDomain("f(u) is not finite");
  if (radii.empty() || n_samples < 1) throw InvalidArgument("need radii and samples");
  auto xnorm = [&](const Vec& d) { return s.norm_x(d); };
  const int n = s.size();

  SlopeEstimate out;
  out.radii = radii;
  out.samples_per_radius = n_samples;
  Vec descent;
  if (f.has_gradient()) {
    Vec g = f.gradient(x);
    out.lower = s.dual_norm_x(g);
    descent = normalized(Vec(-(s.p() == 2.0 ? s.riesz(g) : g)), xnorm);
  }

  std::mt19937_64 shift_rng = sample_rng(seed, 0);
  Vec shift = uniform_box(shift_rng, n, 0.0, 1.0);
  for (size_t ri = 0; ri < radii.size(); ++ri) {
    const double r = radii[ri];
    auto quotient = [&](const Vec& d) {
      double fx = f.eval(x + r * d);
      return std::isfinite(fx) ? (fu - fx) / r : -std::numeric_limits<double>::infinity();
    };
    // 60% low-discrepancy exploration, the rest a (1+1) refinement
    int explore = std::max(1, (n_samples * 3) / 5);
    Vec best_d;
    double best = -std::numeric_limits<double>::infinity();
    int used = 0;
    if (descent.size() == n && descent.norm() > 0.0) {
      best_d = descent;
      best = quotient(descent);
      ++used;
    }
    for (long i = 1; used < explore; ++i, ++used) {
      Vec d = normalized(halton_gaussian(i, n, shift), xnorm);
      double q = quotient(d);
      if (q > best) {
        best = q;
        best_d = d;
      }
    }
    std::mt19937_64 rng = sample_rng(seed, 1 + ri);
    double tau = 0.5;
    for (; used < n_samples && best_d.size() == n; ++used) {
      Vec d = normalized(Vec(best_d + tau * gaussian(rng, n) / std::sqrt(double(n))), xnorm);
      double q = quotient(d);
      if (q > best) {
        best = q;
        best_d = d;
        tau *= 1.5;
      } else {
        tau = std::max(1e-6, tau * 0.85);
      }
    }
    out.upper = std::max(out.upper, std::max(0.0, best));
  }
  return out;
}

QEstimate q_form(const Functional& f, const GridFunction& u, const GridFunction& w,
                 double delta, int n_samples, std::uint64_t seed) {
  if (!(delta > 0.0) || n_samples < 1) throw InvalidArgument("need delta > 0 and samples");
  const GridSpace& s = u.space();
  const int n = s.size();
  auto xnorm = [&](const Vec& d) { return s.norm_x(d); };
  QEstimate out;
  out.t_min = std::numeric_limits<double>::infinity();
  int finite_total = 0;
  const double schedule[3] = {100.0 * delta, 10.0 * delta, delta};
  for (int level = 0; level < 3; ++level) {
    const double dl = schedule[level];
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_samples; ++i) {
      Vec z = u.values(), zeta = w.values();
      double t = dl;
      if (i > 0) {
        std::mt19937_64 rng = sample_rng(seed, std::uint64_t(level) << 40 | std::uint64_t(i));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        z += dl * unif(rng) * normalized(gaussian(rng, n), xnorm);
        zeta += dl * unif(rng) * normalized(gaussian(rng, n), xnorm);
        t = dl * (0.5 + 0.5 * unif(rng));
      }
      double fp = f.eval(z + t * zeta), fm = f.eval(z - t * zeta), f0 = f.eval(z);
      if (!std::isfinite(fp) || !std::isfinite(fm) || !std::isfinite(f0)) continue;
      ++finite_total;
      ++out.probe_count;
      out.t_min = std::min(out.t_min, t);
      best = std::max(best, (fp + fm - 2.0 * f0) / (t * t));
    }
    out.schedule.push_back({dl, best});
  }
  if (finite_total == 0) throw OutsideDomain("every q_form probe hit +inf");
  out.value = out.schedule.back().second;
  return out;
}

nlohmann::ordered_json to_json(const SlopeEstimate& s) {
  nlohmann::ordered_json j;
  j["lower"] = s.lower;
  j["upper"] = s.upper;
  j["radii"] = s.radii;
  j["samples_per_radius"] = s.samples_per_radius;
  return j;
}

nlohmann::ordered_json to_json(const QEstimate& q) {
  nlohmann::ordered_json j;
  j["value"] = q.value;
  j["probe_count"] = q.probe_count;
  j["t_min"] = q.t_min;
  nlohmann::ordered_json sched = nlohmann::ordered_json::array();
  for (auto [d, v] : q.schedule) sched.push_back({{"delta", d}, {"value", v}});
  j["schedule"] = sched;
  return j;
}

}  // namespace symvar
