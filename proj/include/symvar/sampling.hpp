#pragma once

#include <cstdint>
#include <random>

#include "symvar/funcspace.hpp"

namespace symvar {

// Counter-based seeding: sample i of a stream depends only on (seed, i), so a
// run with 2n samples sees the first n samples of a run with n.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);
std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index);

Vec gaussian(std::mt19937_64& rng, int n);
Vec uniform_box(std::mt19937_64& rng, int n, double lo, double hi);

// Halton point `index` (>= 1) in [0,1)^n, rotated by `shift` (Cranley-Patterson).
Vec halton(long index, int n, const Vec& shift);
// Halton point mapped through the inverse normal CDF.
Vec halton_gaussian(long index, int n, const Vec& shift);

// d / norm(d) for the given norm; d is returned unchanged when norm(d) = 0.
template <class Norm>
Vec normalized(const Vec& d, const Norm& norm) {
  double nd = norm(d);
  return nd > 0.0 ? Vec(d / nd) : d;
}

}  // namespace symvar
