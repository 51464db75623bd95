#pragma once

#include <random>

#include "symvar/funcspace.hpp"
#include "symvar/sampling.hpp"

namespace symvar::test {

inline Vec random_cone(std::uint64_t seed, int n, double hi = 1.0) {
  std::mt19937_64 rng = sample_rng(seed, 0);
  return uniform_box(rng, n, 0.0, hi);
}

inline Vec random_signed(std::uint64_t seed, int n) {
  std::mt19937_64 rng = sample_rng(seed, 1);
  return uniform_box(rng, n, -1.0, 1.0);
}

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(Eigen::Index(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace symvar::test
