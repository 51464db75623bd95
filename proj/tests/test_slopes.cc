#include <cmath>

#include <doctest.h>

#include "support.hpp"
#include "symvar/errors.hpp"
#include "symvar/functionals.hpp"
#include "symvar/slopes.hpp"

using namespace symvar;

namespace {

Functional affine(SpacePtr s, Vec c) {
  Functional f;
  f.name = "affine";
  f.space = s;
  f.eval = [c](const Vec& u) { return c.dot(u) + 0.5; };
  f.gradient = [c](const Vec&) { return c; };
  return f;
}

Functional random_quadratic(SpacePtr s, std::uint64_t seed) {
  const int n = s->size();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) B.col(j) = test::random_signed(seed * 31 + j, n);
  Eigen::MatrixXd A = B.transpose() * B + Eigen::MatrixXd::Identity(n, n);
  Vec b = test::random_signed(seed * 97, n);
  Functional f;
  f.name = "quadratic";
  f.space = s;
  f.eval = [A, b](const Vec& u) { return 0.5 * u.dot(A * u) + b.dot(u); };
  f.gradient = [A, b](const Vec& u) { return Vec(A * u + b); };
  return f;
}

Functional plus(const Functional& f, const Functional& g) {
  Functional h = f;
  h.eval = [f, g](const Vec& u) { return f.eval(u) + g.eval(u); };
  h.gradient = nullptr;
  return h;
}

}  // namespace

TEST_CASE("strong slope vanishes at a minimizer") {
  auto s = make_grid(1, 8, 1.0, 2.0);
  GridFunction a = symmetric_profile(s, 0.5);
  SlopeEstimate e = strong_slope(quadratic_v(a), a, {1e-3, 1e-4}, 500, 3);
  CHECK(e.upper < 1e-9);
}

TEST_CASE("strong slope of a linear functional is its dual norm") {
  auto s = make_grid(1, 16, 1.0, 2.0);
  Vec c = test::random_signed(5, 16);
  c /= s->dual_norm_x(c);
  SlopeEstimate e = strong_slope(affine(s, c), GridFunction::zeros(s), {1e-3}, 500, 11);
  CHECK(e.upper >= 0.95);
  CHECK(e.upper <= 1.0 + 1e-9);
  CHECK(e.lower == doctest::Approx(1.0));

  // without the gradient oracle only the sampled upper estimate is available
  auto t = make_grid(1, 4, 1.0, 2.0);
  Vec d = test::random_signed(6, 4);
  d /= t->dual_norm_x(d);
  Functional blind = affine(t, d);
  blind.gradient = nullptr;
  SlopeEstimate b = strong_slope(blind, GridFunction::zeros(t), {1e-3}, 500, 11);
  CHECK(b.lower == 0.0);
  CHECK(b.upper >= 0.95);
  CHECK(b.upper <= 1.0 + 1e-9);
}

TEST_CASE("strong slope brackets the gradient norm on random quadratics") {
  auto s = make_grid(1, 8, 1.0, 2.0);
  for (std::uint64_t k = 1; k <= 10; ++k) {
    Functional f = random_quadratic(s, k);
    GridFunction u(s, test::random_signed(1000 + k, 8));
    SlopeEstimate e = strong_slope(f, u, {1e-3, 1e-4}, 500, k);
    const double g = s->dual_norm_x(f.gradient(u.values()));
    CHECK(std::abs(e.upper - g) <= 0.1 * g + 1e-6);
    CHECK(e.lower <= e.upper + 1e-3 * g);
  }
}

TEST_CASE("strong slope rejects points outside the domain") {
  auto s = make_grid(1, 4, 1.0, 2.0);
  GridFunction far(s, Vec::Constant(4, 10.0));
  CHECK_THROWS_AS(strong_slope(quartic_ball(s), far, {1e-3}, 10), OutsideDomain);
}

TEST_CASE("q_form of the half squared norm is the squared norm") {
  auto s = make_grid(1, 8, 1.0, 2.0);
  GridFunction w(s, test::random_signed(8, 8));
  QEstimate q = q_form(half_norm_sq(s), GridFunction::zeros(s), w, 1e-7, 200, 2);
  const double nw = s->norm_x(w.values());
  CHECK(std::abs(q.value - nw * nw) <= 1e-6);
  CHECK(q.schedule.size() == 3);
}

TEST_CASE("q_form of an affine functional vanishes") {
  auto s = make_grid(1, 8, 1.0, 2.0);
  GridFunction u(s, test::random_signed(9, 8)), w(s, test::random_signed(10, 8));
  QEstimate q = q_form(affine(s, test::random_signed(12, 8)), u, w, 1e-3, 200, 4);
  CHECK(std::abs(q.value) <= 1e-9 * 1e6);  // second differences of size 1e-16 over t^2 >= 2.5e-7
}

TEST_CASE("q_form matches the Hessian of the quartic") {
  auto s = make_grid(1, 8, 1.0, 2.0);
  Vec u = test::random_signed(20, 8);
  u *= 0.3 / s->norm_x(u);
  Vec w = test::random_signed(21, 8);
  const Eigen::MatrixXd& G = s->gram();
  const double uw = u.dot(G * w), ww = w.dot(G * w), uu = u.dot(G * u);
  const double exact = (1.0 - uu) * ww - 2.0 * uw * uw;
  QEstimate q = q_form(quartic_ball(s), GridFunction(s, u), GridFunction(s, w), 1e-3, 400, 5);
  CHECK(std::abs(q.value - exact) <= 0.05 * std::abs(exact));

  // the error shrinks at least linearly along the schedule
  QEstimate r = q_form(quartic_ball(s), GridFunction(s, u), GridFunction(s, w), 1e-4, 400, 5);
  const double coarse = std::abs(r.schedule[0].second - exact);
  const double fine = std::abs(r.schedule[2].second - exact);
  CHECK(std::log(coarse / fine) / std::log(100.0) >= 0.9);
}

TEST_CASE("q_form ignores affine perturbations") {
  auto s = make_grid(1, 8, 1.0, 2.0);
  Vec u = 0.2 * test::random_signed(30, 8);
  GridFunction gu(s, u), w(s, test::random_signed(31, 8));
  Functional f = quartic_ball(s);
  QEstimate a = q_form(f, gu, w, 1e-3, 100, 6);
  QEstimate b = q_form(plus(f, affine(s, test::random_signed(32, 8))), gu, w, 1e-3, 100, 6);
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-5));
}

TEST_CASE("q_form with every probe at +inf") {
  auto s = make_grid(1, 4, 1.0, 2.0);
  GridFunction far(s, Vec::Constant(4, 10.0));
  CHECK_THROWS_AS(q_form(quartic_ball(s), far, far, 1e-3, 10), OutsideDomain);
}
