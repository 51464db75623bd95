#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <json.hpp>

#include "symvar/funcspace.hpp"

namespace symvar {

// Brackets the weak slope: lower from the gradient (C^1 case), upper from the
// sampled strong slope.
struct SlopeEstimate {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<double> radii;
  int samples_per_radius = 0;
};

struct QEstimate {
  double value = 0.0;
  int probe_count = 0;
  double t_min = 0.0;
  // (delta, max quotient) for every delta of the schedule, coarsest first
  std::vector<std::pair<double, double>> schedule;
};

SlopeEstimate strong_slope(const Functional& f, const GridFunction& u,
                           const std::vector<double>& radii, int n_samples,
                           std::uint64_t seed = 0);

// Q_u(w): max second-difference quotient with z, zeta, t coupled through delta.
// The schedule is (100 delta, 10 delta, delta); value is the one at delta.
QEstimate q_form(const Functional& f, const GridFunction& u, const GridFunction& w,
                 double delta, int n_samples, std::uint64_t seed = 0);

nlohmann::ordered_json to_json(const SlopeEstimate& s);
nlohmann::ordered_json to_json(const QEstimate& q);

}  // namespace symvar
