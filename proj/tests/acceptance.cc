// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "symvar/applications.hpp"
#include "symvar/errors.hpp"
#include "symvar/functionals.hpp"
#include "symvar/principles.hpp"
#include "symvar/rearrange.hpp"
#include "symvar/sampling.hpp"

using namespace symvar;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;
  void fail(const std::string& why) {
    pass = false;
    notes.push_back(why);
  }
  void note(const std::string& s) { notes.push_back(s); }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::vector<SpacePtr> rearrangement_grids() {
  std::vector<SpacePtr> g;
  for (int n : {4, 8, 16, 32, 64}) g.push_back(make_grid(1, n, 1.0, 2.0));
  for (int n : {4, 6, 8}) g.push_back(make_grid(2, n, 1.0, 2.0));
  return g;
}

std::string grid_name(const GridSpace& s) {
  return std::to_string(s.dimension()) + "D n=" + std::to_string(s.n());
}

std::vector<double> sorted_values(const Vec& v) {
  std::vector<double> x(v.data(), v.data() + v.size());
  std::sort(x.begin(), x.end());
  return x;
}

// random u in S; every third draw uses a small value set so ties occur
Vec random_cone_point(std::mt19937_64& rng, int n, int k) {
  Vec u = uniform_box(rng, n, 0.0, 1.0);
  if (k % 3 == 0) u = (3.0 * u).array().floor() / 3.0;
  return u;
}

Outcome criterion1() {
  Outcome out;
  auto t0 = Clock::now();
  long checks = 0;
  double worst = 0.0;
  for (const SpacePtr& sp : rearrangement_grids()) {
    const GridSpace& s = *sp;
    const auto& fam = s.family();
    int bad_meas = 0, bad_contr = 0, bad_idem = 0, bad_star = 0;
    for (int k = 0; k < 1000; ++k) {
      std::mt19937_64 rng = sample_rng(0xa11, std::uint64_t(k) + 7919u * std::uint64_t(s.size()));
      Vec u = random_cone_point(rng, s.size(), k);
      Vec v = random_cone_point(rng, s.size(), k + 1);
      const Polarizer& H = fam[size_t(rng() % fam.size())];
      Vec uH = polarize(u, H), vH = polarize(v, H);
      // cells outside H are always paired, so no mass leaves the grid
      if (sorted_values(uH) != sorted_values(u)) ++bad_meas;
      if (sorted_values(schwarz(s, u)) != sorted_values(u)) ++bad_meas;
      double excess = s.norm_v(uH - vH) - s.norm_v(u - v);
      worst = std::max(worst, excess);
      if (excess > 1e-12) ++bad_contr;
      if (polarize(uH, H) != uH) ++bad_idem;
      if (schwarz(s, schwarz(s, u)) != schwarz(s, u)) ++bad_idem;
      if (schwarz(s, uH) != schwarz(s, u)) ++bad_star;
      ++checks;
    }
    if (bad_meas + bad_contr + bad_idem + bad_star > 0)
      out.fail(grid_name(s) + ": equimeasurability " + std::to_string(bad_meas) + ", contractivity " +
               std::to_string(bad_contr) + ", idempotence " + std::to_string(bad_idem) +
               ", (u^H)*=u* " + std::to_string(bad_star));
  }
  double t = seconds_since(t0);
  if (t >= 10.0) out.fail("runtime " + fmt("%.2f", t) + " s");
  out.note(std::to_string(checks) + " triples, worst contraction excess " + fmt("%.3g", worst) +
           ", " + fmt("%.2f", t) + " s");
  return out;
}

// iterate the whole family until nothing changes: a common fixed point
Vec family_fixed_point(const GridSpace& s, Vec u) {
  for (int sweep = 0; sweep < 10000; ++sweep) {
    bool changed = false;
    for (const Polarizer& H : s.family()) {
      Vec w = polarize(u, H);
      if (w != u) {
        u = std::move(w);
        changed = true;
      }
    }
    if (!changed) break;
  }
  return u;
}

Outcome criterion2() {
  Outcome out;
  for (const SpacePtr& sp : rearrangement_grids()) {
    const GridSpace& s = *sp;
    int converged = 0, mismatch = 0, candidates = 0;
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      std::mt19937_64 rng = sample_rng(0xa12, std::uint64_t(k) + 7919u * std::uint64_t(s.size()));
      Vec u = random_cone_point(rng, s.size(), k);
      GridFunction gu(sp, u);
      try {
        Symmetrized t = approx_symmetrize(gu, 1e-3);
        if (t.residual < 1e-3) ++converged;
        worst = std::max(worst, t.residual);
      } catch (const ConvergenceFailure& e) {
        worst = std::max(worst, e.residual());
      }
      // the equivalence, over u, u*, and a common fixed point reached from u
      for (const Vec& c : {u, schwarz(s, u), family_fixed_point(s, u)}) {
        bool sym = schwarz(s, c) == c;
        bool fixed = std::all_of(s.family().begin(), s.family().end(),
                                 [&](const Polarizer& H) { return polarize(c, H) == c; });
        if (sym != fixed) ++mismatch;
        ++candidates;
      }
    }
    std::string line = grid_name(s) + ": " + std::to_string(converged) + "/100 converged (worst " +
                       fmt("%.3g", worst) + "), equivalence mismatches " +
                       std::to_string(mismatch) + "/" + std::to_string(candidates);
    if (converged < 100 || mismatch > 0)
      out.fail(line);
  }
  if (out.pass) out.note("all grids converge, equivalence exact");
  return out;
}

Outcome criterion3() {
  Outcome out;
  auto t0 = Clock::now();
  auto zero = weight_by_name("zero"), lin = weight_by_name("linear");
  double worst = 0.0;
  for (double rho : {0.1, 0.5, 1.0, 2.0}) {
    double e0 = std::abs(zhong_radius(zero, rho) - rho);
    double e1 = std::abs(zhong_radius(lin, rho) - std::expm1(rho));
    worst = std::max({worst, e0, e1});
    if (e0 > 1e-8 || e1 > 1e-8) out.fail("rho=" + fmt("%g", rho) + " errors " + fmt("%.3g", e0) + ", " + fmt("%.3g", e1));
  }
  double t = seconds_since(t0);
  if (t >= 1.0) out.fail("runtime " + fmt("%.3f", t) + " s");
  out.note("worst error " + fmt("%.3g", worst) + ", " + fmt("%.4f", t) + " s");
  return out;
}

// non-symmetric nonnegative direction
Vec ramp(const GridSpace& s) {
  Vec d(s.size());
  for (int i = 0; i < s.size(); ++i) d[i] = 1.0 + i;
  return d / d.norm();
}

// base + t dir with f - f(base) = target, by bisection on t
GridFunction start_at_level(const Functional& f, const GridFunction& base, const Vec& dir,
                            double target) {
  const double f0 = f(base);
  double lo = 0.0, hi = 1.0;
  while (f.eval(base.values() + hi * dir) - f0 < target) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (f.eval(base.values() + mid * dir) - f0 < target ? lo : hi) = mid;
  }
  return GridFunction(base.space_ptr(), base.values() + lo * dir);
}

struct EkCase {
  std::string name;
  Functional f;
  GridFunction base;
};

std::vector<EkCase> ekeland_cases(const SpacePtr& s) {
  GridFunction a = symmetric_profile(s, 0.5);
  // the L^2 unit sphere: constant 1/sqrt(|Omega|)
  double omega = s->cell_measure() * s->size();
  GridFunction well(s, Vec::Constant(s->size(), 1.0 / std::sqrt(omega)));
  return {{"quadratic_v", quadratic_v(a), a}, {"norm_double_well", norm_double_well(s), well}};
}

std::vector<std::string> certificate_failures(const Certificate& c) {
  std::vector<std::string> r;
  for (const Measured& m : c.measured)
    if (!(m.value <= m.bound + c.tol_cert))
      r.push_back(m.name + " " + fmt("%.3g", m.value) + " > " + fmt("%.3g", m.bound));
  if (!(c.violation.max_violation <= c.slack))
    r.push_back("violation " + fmt("%.3g", c.violation.max_violation) + " > slack " + fmt("%.3g", c.slack));
  return r;
}

Certificate run_ekeland(const EkCase& k, double sr, EkelandVariant var, std::uint64_t seed) {
  PrincipleOptions o;
  o.seed = seed;
  GridFunction u0 = start_at_level(k.f, k.base, ramp(k.base.space()), 0.5 * sr * sr);
  return symmetric_ekeland(k.f, u0, sr, sr, var, o);
}

Outcome criterion4() {
  Outcome out;
  SpacePtr s = make_grid(1, 8, 1.0, 2.0);
  const std::vector<std::pair<std::string, EkelandVariant>> variants{
      {"I", EkelandVariant::I}, {"II", EkelandVariant::II}, {"IV", EkelandVariant::IV},
      {"V", EkelandVariant::V}};
  int certs = 0;
  for (const auto& [vn, var] : variants) {
    auto t0 = Clock::now();
    for (const EkCase& k : ekeland_cases(s))
      for (double sr : {0.1, 0.01}) {
        std::string tag = "variant " + vn + " " + k.name + " sigma=rho=" + fmt("%g", sr);
        try {
          Certificate c = run_ekeland(k, sr, var, 17);
          ++certs;
          auto bad = certificate_failures(c);
          const Measured* sym = c.find("||v-v*||_V");
          const Measured* dom = c.find("f(v)-f(u0)");
          if (!sym || sym->value >= sym->bound) bad.push_back("symmetry bound not strict");
          if (!dom || dom->value > 0.0) bad.push_back("f(v) > f(u0)");
          if (c.violation.n_samples < 10000) bad.push_back("fewer than 1e4 samples");
          if (!c.passed) bad.push_back("certificate FAILED");
          for (const auto& b : bad) out.fail(tag + ": " + b);
        } catch (const std::exception& e) {
          out.fail(tag + ": " + e.what());
        }
      }
    double t = seconds_since(t0);
    if (t >= 60.0) out.fail("variant " + vn + " runtime " + fmt("%.1f", t) + " s");
    out.note("variant " + vn + " " + fmt("%.2f", t) + " s");
  }
  out.note(std::to_string(certs) + " certificates");
  return out;
}

Certificate run_bp_quadratic(std::uint64_t seed) {
  SpacePtr s = make_grid(1, 8, 1.0, 2.0);
  Functional f = half_norm_sq(s);
  PrincipleOptions o;
  o.seed = seed;
  GridFunction u0 = start_at_level(f, GridFunction::zeros(s), ramp(*s), 0.5 * 0.1 * 0.01);
  return symmetric_borwein_preiss(f, u0, 0.1, 0.1, 2.0, o);
}

Outcome criterion5() {
  Outcome out;
  try {
    Certificate c = run_bp_quadratic(23);
    if (c.violation.n_samples < 10000) out.fail("quadratic: fewer than 1e4 samples");
    if (c.violation.max_violation > 1e-10)
      out.fail("quadratic: max_violation " + fmt("%.3g", c.violation.max_violation));
    for (const auto& b : certificate_failures(c)) out.fail("quadratic: " + b);
    out.note("quadratic max_violation " + fmt("%.3g", c.violation.max_violation));
  } catch (const std::exception& e) {
    out.fail(std::string("quadratic: ") + e.what());
  }
  SpacePtr s = make_grid(1, 8, 1.0, 2.0);
  EkCase dw = ekeland_cases(s)[1];
  for (double sr : {0.1, 0.01}) {
    try {
      PrincipleOptions o;
      o.seed = 29;
      GridFunction u0 = start_at_level(dw.f, dw.base, ramp(*s), 0.5 * sr * sr * sr);
      Certificate c = symmetric_borwein_preiss(dw.f, u0, sr, sr, 2.0, o);
      if (!c.passed) out.fail("double well sigma=" + fmt("%g", sr) + " FAILED");
      for (const auto& b : certificate_failures(c)) out.fail("double well: " + b);
      out.note("double well sigma=" + fmt("%g", sr) + " violation " +
               fmt("%.3g", c.violation.max_violation) + " <= slack " + fmt("%.3g", c.slack));
    } catch (const std::exception& e) {
      out.fail(std::string("double well: ") + e.what());
    }
  }
  return out;
}

Outcome criterion6() {
  Outcome out;
  auto t0 = Clock::now();
  SpacePtr s = make_grid(1, 8, 1.0, 2.0);
  PrincipleOptions o;
  o.seed = 31;
  try {
    auto steps = semilinear_experiment(nonlinearity_by_name("cubic"), s, {0.1, 0.05, 0.01}, o);
    for (size_t h = 0; h < steps.size(); ++h) {
      const SemilinearStep& st = steps[h];
      if (h > 0) {
        if (!(st.symmetry_residual < steps[h - 1].symmetry_residual))
          out.fail("symmetry residual not decreasing at h=" + std::to_string(h));
        if (!(st.sqps.slope.upper < steps[h - 1].sqps.slope.upper))
          out.fail("slope upper bound not decreasing at h=" + std::to_string(h));
      }
      // min_quotient already carries the +2 eps ||zeta||^2 term
      if (st.sqps.q.min_quotient < -1e-6)
        out.fail("Q bound " + fmt("%.3g", st.sqps.q.min_quotient) + " at h=" + std::to_string(h));
      out.note("eps=" + fmt("%g", st.sqps.eps) + " sym " + fmt("%.3g", st.symmetry_residual) +
               " slope " + fmt("%.3g", st.sqps.slope.upper) + " Qmin " +
               fmt("%.3g", st.sqps.q.min_quotient));
    }
  } catch (const std::exception& e) {
    out.fail(e.what());
  }
  double t = seconds_since(t0);
  if (t >= 300.0) out.fail("runtime " + fmt("%.1f", t) + " s");
  out.note(fmt("%.2f", t) + " s");
  return out;
}

Certificate run_quasilinear(std::uint64_t seed) {
  SpacePtr s = make_grid(1, 8, 1.0, 2.0);
  PrincipleOptions o;
  o.seed = seed;
  return quasilinear_experiment(dirichlet_integrand(1.0), s, 0.01, o);
}

Outcome criterion7() {
  Outcome out;
  try {
    Certificate c = run_quasilinear(37);
    for (const char* name : {"||w_eps||_X'", "||u_eps-u_eps*||_V", "|dual_solve-dual_ascent|",
                             "||u_eps-u_oracle||_X"}) {
      const Measured* m = c.find(name);
      if (!m) {
        out.fail(std::string("missing ") + name);
        continue;
      }
      if (m->value > m->bound) out.fail(std::string(name) + " " + fmt("%.3g", m->value) + " > " + fmt("%.3g", m->bound));
      out.note(std::string(name) + " " + fmt("%.3g", m->value));
    }
    if (!c.passed) out.fail("certificate FAILED");
  } catch (const std::exception& e) {
    out.fail(e.what());
  }
  return out;
}

Functional caristi_potential(const SpacePtr& s) {
  Functional f;
  f.name = "2||u||_X";
  f.space = s;
  f.symmetry = SymmetryClass::PolarizationNonincreasing;
  f.lower_bound = 0.0;
  f.eval = [s](const Vec& u) { return 2.0 * s->norm_x(u); };
  return f;
}

template <class E, class F>
bool throws_as(F&& f) {
  try {
    f();
  } catch (const E&) {
    return true;
  } catch (...) {
    return false;
  }
  return false;
}

Outcome criterion8() {
  Outcome out;
  SpacePtr s = make_grid(1, 8, 1.0, 2.0);
  PrincipleOptions o;
  o.seed = 41;
  Map half = [](const Vec& u) { return Vec(0.5 * u); };
  try {
    for (double eps : {0.5, 0.1}) {
      FixedPointResult r = caristi_fixed_point(half, caristi_potential(s), eps, o);
      if (r.slack > 1e-6) out.fail("Caristi slack " + fmt("%.3g", r.slack));
      if (r.residual > r.slack / (1.0 - eps)) out.fail("Caristi residual above slack/(1-eps)");
      if (!r.certificate.passed) out.fail("Caristi certificate FAILED");
      out.note("Caristi eps=" + fmt("%g", eps) + " residual " + fmt("%.3g", r.residual));
    }
    const double sc = 0.5, eps = 0.2;
    FixedPointResult r = clarke_fixed_point(half, s, sc, eps, o);
    if (r.slack > 1e-6) out.fail("Clarke slack " + fmt("%.3g", r.slack));
    if (r.residual > r.slack / (r.t * (1.0 - sc - eps))) out.fail("Clarke residual above bound");
    if (!r.certificate.passed) out.fail("Clarke certificate FAILED");
    out.note("Clarke residual " + fmt("%.3g", r.residual));
  } catch (const std::exception& e) {
    out.fail(e.what());
  }
  // negative paths
  Map lopsided = [](const Vec& u) {
    Vec w = 0.5 * u;
    w[0] += 0.1;
    return w;
  };
  if (!throws_as<AssumptionViolated>([&] { clarke_fixed_point(lopsided, s, 0.5, 0.2, o); }))
    out.fail("broken equivariance not rejected");
  if (!throws_as<InvalidEpsilon>([&] { clarke_fixed_point(half, s, 0.5, 0.6, o); }))
    out.fail("Clarke eps outside (0, 1-sigma) not rejected");
  if (!throws_as<InvalidEpsilon>([&] { caristi_fixed_point(half, caristi_potential(s), 1.0, o); }))
    out.fail("Caristi eps = 1 not rejected");
  out.note("negative tests raise the declared errors");
  return out;
}

Certificate run_drop(std::uint64_t seed) {
  SpacePtr s = make_grid(1, 2, 1.0, 2.0);
  PrincipleOptions o;
  o.seed = seed;
  Eigen::MatrixXd A(3, 2);
  A << -1, 0, 0, -1, 1, 1;
  Vec b(3);
  b << 0, 0, 10 - 4 * std::sqrt(2.0);
  Ball B{(Vec(2) << 6, 4).finished(), 1.0};
  return symmetric_drop_point(GridFunction(s, (Vec(2) << 2.5, 0.5).finished()), B,
                              polyhedron(A, b), 0.1, 10000, o);
}

Certificate run_petal(std::uint64_t seed) {
  SpacePtr s = make_grid(1, 2, 1.0, 2.0);
  PrincipleOptions o;
  o.seed = seed;
  Eigen::MatrixXd A(3, 2);
  A << 1, -1, -1, 1, -1, 0;
  Vec b(3);
  b << 0, 0, -1;
  return symmetric_petal_point(GridFunction(s, (Vec(2) << 1, 1).finished()),
                               GridFunction::zeros(s), polyhedron(A, b), 0.1, "l1", 10000, o);
}

Outcome criterion9() {
  Outcome out;
  int instances = 0;
  for (double p : {1.0, 2.0, 3.0})
    for (double eps : {0.1, 0.5, 0.9}) {
      Petal P{eps, (Vec(2) << 0.0, 0.0).finished(), (Vec(2) << 2.0, 1.0).finished()};
      InclusionReport r = petal_inclusions(P, 1000, p, 43);
      ++instances;
      if (r.ball_samples < 1000 || r.drop_samples < 1000) out.fail("fewer than 1e3 boundary samples");
      if (r.ball_failures + r.drop_failures > 0)
        out.fail("p=" + fmt("%g", p) + " eps=" + fmt("%g", eps) + ": " +
                 std::to_string(r.ball_failures + r.drop_failures) + " counterexamples");
    }
  out.note(std::to_string(instances) + " petal instances, zero counterexamples");
  try {
    Certificate c = run_drop(47);
    Vec want(2);
    want << 6 - 2 * std::sqrt(2.0), 4 - 2 * std::sqrt(2.0);
    double err = (c.v->values() - want).lpNorm<Eigen::Infinity>();
    if (err > 1e-6) out.fail("drop point off by " + fmt("%.3g", err));
    const Measured* hits = c.find("second points in Drop(xi,B) cap C");
    if (!hits || hits->value != 0.0) out.fail("drop: second point sampled");
    if (!c.passed) out.fail("drop certificate FAILED");
    out.note("drop error " + fmt("%.3g", err));
  } catch (const std::exception& e) {
    out.fail(std::string("drop: ") + e.what());
  }
  try {
    Certificate c = run_petal(53);
    double err = (c.v->values() - Vec::Ones(2)).lpNorm<Eigen::Infinity>();
    if (err > 1e-6) out.fail("petal point off by " + fmt("%.3g", err));
    const Measured* hits = c.find("second points in Petal(xi,y) cap C");
    if (!hits || hits->value != 0.0) out.fail("petal: second point sampled");
    if (!c.passed) out.fail("petal certificate FAILED");
    out.note("petal error " + fmt("%.3g", err));
  } catch (const std::exception& e) {
    out.fail(std::string("petal: ") + e.what());
  }
  return out;
}

Outcome criterion10(const std::filesystem::path& dir) {
  Outcome out;
  SpacePtr s = make_grid(1, 8, 1.0, 2.0);
  const std::vector<std::pair<std::string, std::function<Certificate()>>> runs{
      {"ekeland_I", [&] { return run_ekeland(ekeland_cases(s)[0], 0.1, EkelandVariant::I, 17); }},
      {"ekeland_V", [&] { return run_ekeland(ekeland_cases(s)[1], 0.01, EkelandVariant::V, 17); }},
      {"borwein_preiss", [] { return run_bp_quadratic(23); }},
      {"quasilinear", [] { return run_quasilinear(37); }},
      {"caristi",
       [&] {
         PrincipleOptions o;
         o.seed = 41;
         return caristi_fixed_point([](const Vec& u) { return Vec(0.5 * u); },
                                    caristi_potential(s), 0.5, o)
             .certificate;
       }},
      {"drop", [] { return run_drop(47); }},
      {"petal", [] { return run_petal(53); }},
  };
  std::filesystem::create_directories(dir);
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  for (const auto& [name, run] : runs) {
    try {
      for (int rep : {0, 1}) {
        std::ofstream os(dir / (name + "_" + std::to_string(rep) + ".json"), std::ios::binary);
        os << to_json(run()).dump(2) << "\n";
      }
      if (slurp(dir / (name + "_0.json")) != slurp(dir / (name + "_1.json")))
        out.fail(name + " certificates differ");
    } catch (const std::exception& e) {
      out.fail(name + ": " + e.what());
    }
  }
  out.note(std::to_string(runs.size()) + " certificate pairs compared in " + dir.string());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::filesystem::path dir = argc > 1 ? argv[1] : "acceptance_certificates";
  const std::vector<std::function<Outcome()>> criteria{
      criterion1, criterion2, criterion3, criterion4, criterion5,
      criterion6, criterion7, criterion8, criterion9, [&] { return criterion10(dir); }};
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = Clock::now();
    Outcome r = criteria[i]();
    std::cout << "criterion " << i + 1 << ": " << (r.pass ? "PASS" : "FAIL") << " ("
              << fmt("%.2f", seconds_since(t0)) << " s)\n";
    for (const auto& n : r.notes) std::cout << "    " << n << "\n";
    std::cout.flush();
    failed += !r.pass;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed") << "\n";
  return failed ? 1 : 0;
}
