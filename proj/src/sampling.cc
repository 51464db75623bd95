#include "symvar/sampling.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/erf.hpp>

namespace symvar {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over the combined key
  std::uint64_t z = seed * 0x9e3779b97f4a7c15ULL + index + 0x632be59bd9b4e019ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(mix_seed(seed, index));
}

Vec gaussian(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal;
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

Vec uniform_box(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> unif(lo, hi);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = unif(rng);
  return v;
}

namespace {

int nth_prime(int k) {
  static const std::vector<int> primes = [] {
    std::vector<int> out;
    for (int c = 2; out.size() < 512; ++c) {
      bool prime = true;
      for (int p : out) {
        if (p * p > c) break;
        if (c % p == 0) { prime = false; break; }
      }
      if (prime) out.push_back(c);
    }
    return out;
  }();
  return primes.at(k);
}

double radical_inverse(long i, int base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * (i % base);
    i /= base;
  }
  return r;
}

}  // namespace

Vec halton(long index, int n, const Vec& shift) {
  Vec x(n);
  for (int k = 0; k < n; ++k) {
    double v = radical_inverse(index, nth_prime(k)) + (shift.size() > k ? shift[k] : 0.0);
    x[k] = v - std::floor(v);
  }
  return x;
}

Vec halton_gaussian(long index, int n, const Vec& shift) {
  Vec x = halton(index, n, shift);
  for (int k = 0; k < n; ++k) {
    double q = std::clamp(x[k], 1e-12, 1.0 - 1e-12);
    x[k] = std::sqrt(2.0) * boost::math::erf_inv(2.0 * q - 1.0);
  }
  return x;
}

}  // namespace symvar
