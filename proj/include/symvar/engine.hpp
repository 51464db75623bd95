#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "symvar/funcspace.hpp"

namespace symvar {

// A closed set given by membership and (optionally) a retraction onto it.
// Without a projection, infeasible points are treated as +inf (barrier).
struct Domain {
  std::string name = "X";
  std::function<bool(const Vec&)> contains;
  std::function<Vec(const Vec&)> project;

  bool has(const Vec& x) const { return !contains || contains(x); }
  Vec retract(const Vec& x) const { return project ? project(x) : x; }
};

Domain whole_space();
Domain cone();  // S: nonnegative grid functions, projection = clamp at 0

// Everything the engines need about (f, metric, domain) on a flat vector.
struct Problem {
  std::function<double(const Vec&)> f;
  std::function<Vec(const Vec&)> grad;          // optional
  std::function<double(const Vec&)> norm;
  std::function<Vec(const Vec&)> norm_grad;     // optional, for x != 0
  std::function<Vec(const Vec&)> precondition;  // optional gradient -> direction map
  Domain domain;
};

// w -> f(w) + weight * norm(w - center)^power
struct Penalty {
  Vec center;
  double weight = 0.0;
  double power = 1.0;
};

struct SearchOptions {
  double scale = 1.0;  // first step length and restart radius
  int restarts = 4;
  std::uint64_t seed = 0;
  int max_gradient_iters = 4000;
  long max_evals = 60000;
  double min_step = 1e-13;
  std::vector<Vec> extra_starts;
};

double penalized_value(const Problem& P, const Penalty& pen, const Vec& w);

// gradient steps (when derivatives exist) alternated with a compass search
Vec local_descent(const Problem& P, const Penalty& pen, const Vec& start,
                  const SearchOptions& opts);

// best of local_descent from the center, extra starts and seeded restarts
Vec minimize_penalized(const Problem& P, const Penalty& pen, const SearchOptions& opts);

struct ProbeLog {
  double best = 0.0;
  std::vector<double> start_values;
  Vec argmin;
};

// documented multi-start estimate of inf f over the domain
ProbeLog estimate_infimum(const Problem& P, const std::vector<Vec>& starts,
                          const SearchOptions& opts);

struct ChainResult {
  Vec v;
  std::vector<double> energies;
};

// Ekeland's greedy chain: v_{k+1} = argmin f + sigma_k ||. - v_k||, accepted
// while it lowers f(v_k) by more than tol_rel (1 + |f(v_k)|).
ChainResult ekeland_chain(const Problem& P, const Vec& start,
                          const std::function<double(const Vec&)>& modulus,
                          const SearchOptions& search, double tol_rel = 1e-12,
                          int max_steps = 400);

struct SamplerSpec {
  std::uint64_t seed = 1;
  int n_samples = 10000;
  std::vector<double> radii{1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  double box = 2.0;  // global probes are uniform in [-box, box]^n
};

struct ViolationReport {
  int n_samples = 0;
  double max_violation = 0.0;
  std::optional<Vec> argmax_w;
};

// max over sampled w of the positive part of deficit(w); sample i depends only
// on (seed, i), so more samples never lower the maximum.
ViolationReport sample_violation(const std::function<double(const Vec&)>& deficit,
                                 const Vec& v, const Problem& P, const SamplerSpec& spec);

}  // namespace symvar
