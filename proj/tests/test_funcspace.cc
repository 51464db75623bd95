#include <cmath>

#include <doctest.h>

#include "support.hpp"
#include "symvar/errors.hpp"
#include "symvar/funcspace.hpp"

using namespace symvar;
using symvar::test::vec;

TEST_CASE("make_grid lays out symmetric uniform cells") {
  auto s = make_grid(1, 4, 1.0, 2.0, 4.0);
  REQUIRE(s->size() == 4);
  CHECK(s->cell_measure() == doctest::Approx(0.5));
  const double want[] = {-0.75, -0.25, 0.25, 0.75};
  for (int i = 0; i < 4; ++i) CHECK(s->center(i)[0] == doctest::Approx(want[i]));

  auto two = make_grid(1, 2, 1.0, 2.0, 4.0);
  CHECK(two->center(0)[0] == doctest::Approx(-0.5));
  CHECK(two->center(1)[0] == doctest::Approx(0.5));

  auto plane = make_grid(2, 4, 1.0, 2.0, 4.0);
  CHECK(plane->size() == 16);
  CHECK(plane->cell_measure() == doctest::Approx(0.25));
}

TEST_CASE("make_grid rejects bad input") {
  CHECK_THROWS_AS(make_grid(1, 5, 1.0, 2.0), InvalidGrid);
  CHECK_THROWS_AS(make_grid(3, 4, 1.0, 2.0), InvalidGrid);
  CHECK_THROWS_AS(make_grid(1, 4, 1.0, 1.0), InvalidExponent);
  CHECK_THROWS_AS(make_grid(1, 4, 1.0, 0.5), InvalidExponent);
}

TEST_CASE("exponent defaults") {
  // p >= N: qV = 2p, qW the midpoint
  auto s = make_grid(1, 4, 1.0, 2.0);
  CHECK(s->q_v() == doctest::Approx(4.0));
  CHECK(s->q_w() == doctest::Approx(3.0));
  // p < N: the Sobolev exponent Np / (N - p)
  auto t = make_grid(2, 4, 1.0, 1.5);
  CHECK(t->q_v() == doctest::Approx(6.0));
  CHECK(t->p() < t->q_w());
  CHECK(t->q_w() < t->q_v());
}

TEST_CASE("norm_X on the two-cell grid") {
  auto s = make_grid(1, 2, 1.0, 2.0);
  CHECK(s->norm_x(Vec::Zero(2)) == 0.0);
  CHECK(s->norm_x(vec({0.0, 1.0})) == doctest::Approx(std::sqrt(3.0)));
  Vec u = vec({0.3, -1.7});
  CHECK(s->norm_x(-2.5 * u) == doctest::Approx(2.5 * s->norm_x(u)));
}

TEST_CASE("norm_V of a single-cell indicator") {
  auto s = make_grid(1, 8, 1.0, 2.0);
  const double m = s->cell_measure();
  Vec e = Vec::Zero(8);
  e[3] = 1.0;
  CHECK(s->norm_v(e) == doctest::Approx(std::max(std::pow(m, 0.5), std::pow(m, 0.25))));
  CHECK(s->norm_v(Vec::Zero(8)) == 0.0);
  // unit total measure: constant 1 has norm 1 in every L^r
  auto unit = make_grid(1, 4, 0.5, 2.0);
  CHECK(unit->norm_v(Vec::Ones(4)) == doctest::Approx(1.0));
  CHECK(unit->norm_w(Vec::Ones(4)) == doctest::Approx(1.0));
}

TEST_CASE("norms are homogeneous and subadditive") {
  for (auto s : {make_grid(1, 8, 1.0, 2.0), make_grid(1, 6, 2.0, 3.0), make_grid(2, 4, 1.0, 1.5)}) {
    for (int k = 0; k < 50; ++k) {
      Vec u = test::random_signed(100 + k, s->size()), v = test::random_signed(900 + k, s->size());
      for (auto nrm : {&GridSpace::norm_x, &GridSpace::norm_v, &GridSpace::norm_w}) {
        const double nu = (*s.*nrm)(u), nv = (*s.*nrm)(v);
        CHECK((*s.*nrm)(u + v) <= nu + nv + 1e-12);
        CHECK(std::abs((*s.*nrm)(-3.0 * u) - 3.0 * nu) <= 1e-12 * (1.0 + nu));
      }
    }
  }
}

TEST_CASE("stored K dominates the sampled embedding ratio") {
  for (auto s : {make_grid(1, 8, 1.0, 2.0), make_grid(1, 16, 1.0, 2.0), make_grid(2, 4, 1.0, 2.0)}) {
    for (int k = 0; k < 200; ++k) {
      Vec u = test::random_signed(31 + k, s->size());
      CHECK(s->norm_v(u) <= s->K() * s->norm_x(u) * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("dual norm: linear solve and ascent agree for p = 2") {
  auto s = make_grid(1, 8, 1.0, 2.0);
  for (int k = 0; k < 10; ++k) {
    Vec g = test::random_signed(77 + k, 8);
    CHECK(s->dual_norm_x_solve(g) == doctest::Approx(s->dual_norm_x_ascent(g)).epsilon(1e-8));
  }
}

TEST_CASE("theta is the pointwise absolute value") {
  auto s = make_grid(1, 2, 1.0, 2.0);
  GridFunction u(s, vec({-1.0, 2.0}));
  CHECK(theta(u).values() == vec({1.0, 2.0}));
  GridFunction pos(s, vec({0.5, 0.0}));
  CHECK(theta(pos).values() == pos.values());
  CHECK(theta(theta(u)).values() == theta(u).values());

  auto t = make_grid(1, 8, 1.0, 2.0);
  for (int k = 0; k < 100; ++k) {
    GridFunction a(t, test::random_signed(200 + k, 8)), b(t, test::random_signed(500 + k, 8));
    CHECK(norm_V(theta(a) - theta(b)) <= norm_V(a - b) + 1e-15);
  }
}

TEST_CASE("grid functions reject bad values") {
  auto s = make_grid(1, 2, 1.0, 2.0);
  CHECK_THROWS_AS(GridFunction(s, Vec::Zero(3)), SpaceMismatch);
  CHECK_THROWS(GridFunction(s, vec({0.0, std::nan("")})));
}

TEST_CASE("grid function JSON round trip") {
  auto s = make_grid(1, 4, 1.0, 2.0);
  GridFunction u(s, vec({0.1, 0.2, 0.3, 0.4}));
  auto j = to_json(u);
  CHECK(j["n"] == 4);
  GridFunction back = grid_function_from_json(j);
  CHECK(back.values() == u.values());
  CHECK(to_json(back).dump() == j.dump());
}
