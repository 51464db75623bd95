#include <cmath>

#include <doctest.h>

#include "support.hpp"
#include "symvar/errors.hpp"
#include "symvar/functionals.hpp"
#include "symvar/principles.hpp"
#include "symvar/rearrange.hpp"

using namespace symvar;
using symvar::test::vec;

namespace {

PrincipleOptions seeded(std::uint64_t seed) {
  PrincipleOptions o;
  o.seed = seed;
  return o;
}

Vec ramp(int n) {
  Vec d(n);
  for (int i = 0; i < n; ++i) d[i] = 1.0 + i;
  return d / d.norm();
}

// base + t dir with f(base + t dir) - f(base) = target
GridFunction at_level(const Functional& f, const GridFunction& base, double target) {
  const Vec dir = ramp(base.size());
  const double f0 = f(base);
  double lo = 0.0, hi = 1.0;
  while (f.eval(base.values() + hi * dir) - f0 < target) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (f.eval(base.values() + mid * dir) - f0 < target ? lo : hi) = mid;
  }
  return GridFunction(base.space_ptr(), base.values() + lo * dir);
}

bool all_within(const Certificate& c) {
  for (const Measured& m : c.measured)
    if (!(m.value <= m.bound + c.tol_cert)) return false;
  return c.violation.max_violation <= c.slack;
}

Functional l2_constraint(SpacePtr s, double level, const std::string& name) {
  const double m = s->cell_measure();
  Functional G;
  G.name = name;
  G.space = s;
  G.eval = [m, level](const Vec& u) { return m * u.squaredNorm() - level; };
  G.gradient = [m](const Vec& u) { return Vec(2.0 * m * u); };
  return G;
}

}  // namespace

TEST_CASE("ekeland_point at the global minimizer") {
  auto s = make_grid(1, 8, 1.0, 2.0);
  GridFunction a = symmetric_profile(s, 0.5);
  Certificate c = ekeland_point(quadratic_x(a), whole_space(), a, 0.1, 0.1, seeded(1));
  CHECK(c.passed);
  CHECK((c.v->values() - a.values()).norm() == 0.0);
  CHECK(c.violation.max_violation == 0.0);
  CHECK(c.violation.n_samples >= 10000);
}

TEST_CASE("ekeland_point on a quadratic from an almost minimal start") {
  auto s = make_grid(1, 8, 1.0, 2.0);
  GridFunction a = symmetric_profile(s, 0.5);
  Functional f = quadratic_x(a);
  const double sigma = 0.1, rho = 0.1;
  GridFunction u0 = at_level(f, a, 0.9 * sigma * rho);
  Certificate c = ekeland_point(f, whole_space(), u0, sigma, rho, seeded(2));
  CHECK(c.passed);
  const double d = s->norm_x(c.v->values() - a.values());
  // ||v - a||^2 <= sigma ||v - a||, the Ekeland set of the quadratic
  CHECK(d <= sigma + 1e-9);
  CHECK(f(*c.v) <= f(u0));
}

TEST_CASE("ekeland_point on the two-cell double well") {
  auto s = make_grid(1, 2, 1.0, 2.0);
  Functional f = norm_double_well(s);
  GridFunction well(s, Vec::Constant(2, std::sqrt(0.5)));
  GridFunction u0 = at_level(f, well, 0.5 * 0.01);
  Certificate c = ekeland_point(f, whole_space(), u0, 0.1, 0.1, seeded(3));
  CHECK(c.passed);
  CHECK(c.violation.n_samples >= 10000);
  CHECK(std::abs(s->cell_measure() * c.v->values().squaredNorm() - 1.0) < 0.1);
}

TEST_CASE("ekeland_point rejects a high start") {
  auto s = make_grid(1, 8, 1.0, 2.0);
  GridFunction a = symmetric_profile(s, 0.5);
  GridFunction far(s, a.values() + Vec::Constant(8, 1.0));
  CHECK_THROWS_AS(ekeland_point(quadratic_x(a), whole_space(), far, 0.1, 0.1, seeded(4)), BadStart);
}

TEST_CASE("the X-distance to a nonzero profile is not polarization-nonincreasing") {
  // ||u - a||_X^2 with a != 0 rises under some polarizations of the grid
  auto s = make_grid(1, 8, 1.0, 2.0);
  GridFunction a = symmetric_profile(s, 0.5);
  CHECK_THROWS_AS(symmetric_ekeland(quadratic_x(a), a, 0.1, 0.1, EkelandVariant::II, seeded(5)),
                  SymmetryViolation);
}

TEST_CASE("symmetric_ekeland variants at a symmetric minimizer") {
  auto s = make_grid(1, 8, 1.0, 2.0);
  GridFunction a = symmetric_profile(s, 0.5);
  Functional f = quadratic_v(a);
  for (auto var : {EkelandVariant::I, EkelandVariant::II, EkelandVariant::IV, EkelandVariant::V}) {
    CAPTURE(int(var));
    Certificate c = symmetric_ekeland(f, a, 0.1, 0.1, var, seeded(6));
    CHECK(c.passed);
    CHECK(c.v->values() == a.values());
    CHECK(c.find("||v-v*||_V")->value == 0.0);
  }
}

TEST_CASE("symmetric_ekeland variants from a non-symmetric start") {
  auto s = make_grid(1, 8, 1.0, 2.0);
  GridFunction a = symmetric_profile(s, 0.5);
  Functional f = quadratic_v(a);
  for (double sr : {0.1, 0.01}) {
    GridFunction u0 = at_level(f, a, 0.5 * sr * sr);
    for (auto var : {EkelandVariant::I, EkelandVariant::II, EkelandVariant::IV, EkelandVariant::V}) {
      CAPTURE(int(var));
      CAPTURE(sr);
      Certificate c = symmetric_ekeland(f, u0, sr, sr, var, seeded(7));
      CHECK(c.passed);
      const Measured* sym = c.find("||v-v*||_V");
      REQUIRE(sym);
      CHECK(sym->value < sym->bound);
      CHECK(f(*c.v) <= f(u0));
    }
  }
}

TEST_CASE("variant V records the altered location exactly") {
  auto s = make_grid(1, 8, 1.0, 2.0);
  Functional f = norm_double_well(s);
  GridFunction u0(s, Vec::Constant(8, 0.3) + 0.05 * ramp(8));
  // no energy precondition for variant V
  Certificate c = symmetric_ekeland(f, u0, 0.1, 0.1, EkelandVariant::V, seeded(8));
  const Measured* b = c.find("f(v)+sigma||v-T_rho u0||-f(u0)");
  REQUIRE(b);
  CHECK(b->value <= 0.0);
  CHECK(c.passed);
}

TEST_CASE("variant V from an almost minimal start stays within rho") {
  auto s = make_grid(1, 8, 1.0, 2.0);
  GridFunction a = symmetric_profile(s, 0.5);
  Functional f = quadratic_v(a);
  GridFunction u0 = at_level(f, a, 0.5 * 0.01);
  Certificate c = symmetric_ekeland(f, u0, 0.1, 0.1, EkelandVariant::V, seeded(9));
  const Measured* d = c.find("||v-T_rho u0||");
  const Measured* q = c.find("(f(u0)-f(v))/sigma");
  REQUIRE(d);
  REQUIRE(q);
  CHECK(d->value <= q->value + 1e-12);
  CHECK(q->value <= 0.1);
}

TEST_CASE("variant IV reports a stability modulus") {
  auto s = make_grid(1, 8, 1.0, 2.0);
  GridFunction a = symmetric_profile(s, 0.5);
  Functional f = quadratic_v(a);
  Certificate c = symmetric_ekeland(f, at_level(f, a, 0.005), 0.1, 0.1, EkelandVariant::IV, seeded(10));
  int rows = 0;
  for (const Measured& m : c.measured)
    if (m.name.rfind("stability", 0) == 0) ++rows;
  CHECK(rows > 0);
  CHECK(c.passed);
}

TEST_CASE("variant III with f_h = f and symmetric Y") {
  auto s = make_grid(1, 8, 1.0, 2.0);
  GridFunction a = symmetric_profile(s, 0.5);
  PrincipleOptions o = seeded(11);
  o.Y = {a, symmetric_profile(s, 0.4)};
  Certificate c = symmetric_ekeland(quadratic_v(a), a, 0.1, 0.1, EkelandVariant::III, o);
  CHECK(c.passed);
  CHECK(c.variant == Variant::SymEkelandIII);

  o.Y = {GridFunction(s, a.values() + 1e-3 * ramp(8))};
  CHECK_THROWS_AS(symmetric_ekeland(quadratic_v(a), a, 0.1, 0.1, EkelandVariant::III, o),
                  NotSymmetricInput);
}

TEST_CASE("Borwein-Preiss on a quadratic with a closed-form inner minimizer") {
  auto s = make_grid(1, 8, 1.0, 2.0);
  Functional f = half_norm_sq(s);
  SUBCASE("start at the minimizer") {
    Certificate c = symmetric_borwein_preiss(f, GridFunction::zeros(s), 0.1, 0.1, 2.0, seeded(12));
    CHECK(c.passed);
    CHECK(c.v->values().norm() == 0.0);
    CHECK(c.eta->values().norm() == 0.0);
  }
  SUBCASE("start at half the budget") {
    GridFunction u0 = at_level(f, GridFunction::zeros(s), 0.5 * 0.1 * 0.01);
    Certificate c = symmetric_borwein_preiss(f, u0, 0.1, 0.1, 2.0, seeded(13));
    CHECK(c.passed);
    CHECK(c.violation.max_violation <= 1e-10);
    CHECK(c.violation.n_samples >= 10000);
  }
  SUBCASE("p = 1 gives an Ekeland-type certificate") {
    GridFunction u0 = at_level(f, GridFunction::zeros(s), 0.5 * 0.01);
    Certificate c = symmetric_borwein_preiss(f, u0, 0.1, 0.1, 1.0, seeded(14));
    CHECK(c.passed);
  }
}

TEST_CASE("zhong_radius closed forms") {
  CHECK(zhong_radius(weight_by_name("zero"), 0.7) == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(zhong_radius(weight_by_name("linear"), 1.0) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-10));
  CHECK(zhong_radius(weight_by_name("quadratic"), 0.5) == doctest::Approx(std::tan(0.5)).epsilon(1e-10));
  // int_0^inf ds / (1 + e^s) = log 2 < 1
  CHECK_THROWS_AS(zhong_radius([](double s) { return std::exp(s); }, 1.0),
                  DivergenceAssumptionViolated);
  CHECK_THROWS_AS(weight_by_name("cubic"), InvalidArgument);
}

TEST_CASE("symmetric_zhong") {
  auto s = make_grid(1, 8, 1.0, 2.0);
  GridFunction a = symmetric_profile(s, 0.5);
  Functional f = quadratic_v(a);
  GridFunction u0 = at_level(f, a, 0.5 * 0.01);
  SUBCASE("h = 0 behaves like Ekeland with r = rho") {
    Certificate c = symmetric_zhong(f, u0, 0.1, 0.1, weight_by_name("zero"), seeded(15));
    CHECK(c.passed);
    CHECK(c.log["r"].get<double>() == doctest::Approx(0.1));
  }
  SUBCASE("h(s) = s uses r = e^rho - 1 and bounds the weighted slope") {
    auto h = weight_by_name("linear");
    Certificate c = symmetric_zhong(f, u0, 0.1, 0.1, h, seeded(16));
    CHECK(c.passed);
    const double r = std::expm1(0.1);
    CHECK(c.log["r"].get<double>() == doctest::Approx(r).epsilon(1e-9));
    CHECK(c.find("||v-v*||_V")->bound == doctest::Approx((2.0 * s->K() + 1.0) * r));
    const double dist = c.find("||v-T_r u0||")->value;
    SlopeEstimate sl = strong_slope(f, *c.v, {1e-3, 1e-4}, 500, 16);
    CHECK((1.0 + h(dist)) * sl.upper <= 0.1 + 1e-6);
  }
}

TEST_CASE("dgz_check") {
  auto s = make_grid(1, 8, 1.0, 2.0);
  GridFunction a = symmetric_profile(s, 0.5);
  Functional f = quadratic_v(a);
  Functional zero = linear(s, 0.0);
  SUBCASE("g = 0 at a minimizer") { CHECK(dgz_check(f, zero, a, 0.1, seeded(17)).passed); }
  SUBCASE("the shipped bump") {
    Functional g = dgz_bump(a, 0.1, 1.0);
    Certificate c = dgz_check(f, g, a, 0.1, seeded(18));
    CHECK(c.passed);
    CHECK(c.find("sup||g'||_X'")->value <= 0.1 + 1e-12);
  }
  SUBCASE("a point that is not a minimizer fails with a witness") {
    GridFunction off(s, a.values() + 0.3 * ramp(8));
    Certificate c = dgz_check(f, zero, off, 0.1, seeded(19));
    CHECK_FALSE(c.passed);
    CHECK(c.violation.max_violation > 0.0);
    CHECK(c.violation.argmax_w.has_value());
  }
}

TEST_CASE("constrained principle on the two-cell eigenproblem") {
  auto s = make_grid(1, 2, 1.0, 2.0);
  Functional f = quadratic_x(GridFunction::zeros(s));
  Functional G = l2_constraint(s, 1.0, "L2=1");
  // on the constraint, slightly off the symmetric minimizer
  const double th = std::atan(1.0) + 0.005;
  GridFunction u0(s, vec({std::cos(th), std::sin(th)}));
  ConstrainedOptions co;
  co.base = seeded(20);
  Certificate c = constrained_symmetric_ekeland(f, {G}, 1, u0, 0.01, co);
  CHECK(c.passed);
  // gram = [[3,-1],[-1,3]], mass = I: lambda = 2 at (1,1)/sqrt 2
  CHECK(std::abs(c.v->values()[0] - std::sqrt(0.5)) <= 0.01);
  CHECK(std::abs(c.v->values()[1] - std::sqrt(0.5)) <= 0.01);
  CHECK(c.log["multipliers"][0].get<double>() == doctest::Approx(2.0).epsilon(1e-3));

  SUBCASE("an inactive inequality gets lambda = 0") {
    Functional loose = l2_constraint(s, 10.0, "L2<=10");
    loose.eval = [m = s->cell_measure()](const Vec& u) { return 10.0 - m * u.squaredNorm(); };
    loose.gradient = [m = s->cell_measure()](const Vec& u) { return Vec(-2.0 * m * u); };
    Multipliers mult = extract_multipliers(f, {G, loose}, 1, c.v->values(), 1e-8, 1e-9);
    REQUIRE(mult.lambda.size() == 2);
    CHECK(mult.lambda[1] == 0.0);
  }
  SUBCASE("duplicate equalities are degenerate") {
    CHECK_THROWS_AS(constrained_symmetric_ekeland(f, {G, G}, 2, c.v.value(), 0.01, co),
                    ConstraintDegeneracy);
  }
}

TEST_CASE("constrained principle without constraints") {
  auto s = make_grid(1, 8, 1.0, 2.0);
  GridFunction a = symmetric_profile(s, 0.5);
  Functional f = quadratic_v(a);
  ConstrainedOptions co;
  co.base = seeded(21);
  Certificate c = constrained_symmetric_ekeland(f, {}, 0, at_level(f, a, 1e-5), 0.01, co);
  CHECK(c.passed);
  CHECK(c.find("||df-sum lambda dG||_X'")->value <= 0.01);
}

TEST_CASE("path minimax on the radial double well") {
  auto s = make_grid(1, 2, 1.0, 2.0);
  Functional f = radial_double_well(s);
  GridFunction psi(s, Vec::Constant(2, std::sqrt(0.5)));
  PathOptions po;
  po.base = seeded(22);
  Certificate c = path_minimax(f, psi, 6, 0.01, po);
  CHECK(c.passed);
  CHECK(c.find("||df(u)||_X'")->value <= 0.01);
  // the ridge of r^2 (r - 1)^2 sits at r = 1/2
  CHECK(std::sqrt(s->cell_measure() * c.v->values().squaredNorm()) == doctest::Approx(0.5).epsilon(0.05));

  CHECK_THROWS_AS(path_minimax(f, psi, 1, 0.01, po), NoMountainPass);
  CHECK_THROWS_AS(path_minimax(f, GridFunction(s, vec({0.2, 0.9})), 6, 0.01, po), NotSymmetricInput);
}

TEST_CASE("nodewise polarization fixes a path of symmetric nodes") {
  auto s = make_grid(1, 8, 1.0, 2.0);
  for (double t : {0.0, 0.25, 0.5, 1.0}) {
    Vec node = symmetric_profile(s, t).values();
    for (const Polarizer& H : s->family()) CHECK(polarize(node, H) == node);
  }
}

TEST_CASE("sqps_sequence on the half squared norm") {
  auto s = make_grid(1, 8, 1.0, 2.0);
  Functional f = half_norm_sq(s);
  const Vec dir = ramp(8) / s->norm_x(ramp(8));
  MinimizingOracle oracle = [&](double eps) {
    // f(c dir) = c^2 / 2 = eps^3 / 2
    return GridFunction(s, std::pow(eps, 1.5) * dir);
  };
  auto steps = sqps_sequence(f, {0.1, 0.01}, oracle, seeded(23));
  REQUIRE(steps.size() == 2);
  for (const SqpsStep& st : steps) {
    CHECK(st.q.min_quotient >= 0.0);
    CHECK(st.symmetry_residual < (2.0 * s->K() + 1.0) * st.eps);
    CHECK(st.certificate.passed);
  }
  CHECK(steps[1].certificate.v->values().norm() < steps[0].certificate.v->values().norm() + 1e-15);
}

TEST_CASE("verify_certificate") {
  auto s = make_grid(1, 8, 1.0, 2.0);
  GridFunction a = symmetric_profile(s, 0.5);
  Functional f = quadratic_v(a);
  Certificate c = symmetric_ekeland(f, a, 0.1, 0.1, EkelandVariant::II, seeded(24));
  CHECK(verify_certificate(f, c, 10000).max_violation == 0.0);

  Certificate bad = c;
  bad.v = GridFunction(s, a.values() + 10.0 * 0.1 * ramp(8));
  ViolationReport r = verify_certificate(f, bad, 10000);
  CHECK(r.max_violation > 0.0);
  REQUIRE(r.argmax_w.has_value());

  double prev = 0.0;
  for (int n : {500, 1000, 2000, 4000}) {
    double cur = verify_certificate(f, bad, n).max_violation;
    CHECK(cur >= prev);
    prev = cur;
  }
  // idempotent
  CHECK(verify_certificate(f, bad, 1000).max_violation == verify_certificate(f, bad, 1000).max_violation);
}

TEST_CASE("certificates are deterministic and round-trip through JSON") {
  auto s = make_grid(1, 8, 1.0, 2.0);
  GridFunction a = symmetric_profile(s, 0.5);
  Functional f = norm_double_well(s);
  GridFunction u0(s, Vec::Constant(8, 0.5) + 0.01 * ramp(8));
  Certificate c1 = symmetric_ekeland(f, u0, 0.1, 0.1, EkelandVariant::V, seeded(25));
  Certificate c2 = symmetric_ekeland(f, u0, 0.1, 0.1, EkelandVariant::V, seeded(25));
  const std::string j1 = to_json(c1).dump(), j2 = to_json(c2).dump();
  CHECK(j1 == j2);
  Certificate back = certificate_from_json(nlohmann::ordered_json::parse(j1));
  CHECK(to_json(back).dump() == j1);
  CHECK(all_within(back) == back.passed);
}
