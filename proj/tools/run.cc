#include "run.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <vector>

#include "symvar/applications.hpp"
#include "symvar/errors.hpp"
#include "symvar/functionals.hpp"
#include "symvar/principles.hpp"
#include "symvar/rearrange.hpp"

namespace symvar::cli {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

void write_json(const fs::path& p, const ojson& j) { write_text(p, j.dump(2) + "\n"); }

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : text_(join(header)) {}
  void row(const std::vector<std::string>& cells) { text_ += join(cells); }
  const std::string& text() const { return text_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s + "\n";
  }
  std::string text_;
};

Vec values(const ojson& a) {
  std::vector<double> v = a.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), Eigen::Index(v.size()));
}

Vec sized(const ojson& section, const std::string& sec, const std::string& key, int n) {
  Vec v = values(section.at(key));
  if (v.size() != n)
    throw ConfigError("/" + sec + "/" + key, "expected " + std::to_string(n) + " values, got " +
                                                 std::to_string(v.size()));
  return v;
}

SpacePtr make_space(const ojson& g) {
  double qv = g.at("q_v").get<double>();
  return make_grid(g.at("dimension").get<int>(), g.at("cells").get<int>(), g.at("radius").get<double>(),
                   g.at("p").get<double>(), g.at("q_w").get<double>(),
                   qv > 0.0 ? std::optional<double>(qv) : std::nullopt);
}

Functional make_f(const ExperimentConfig& c, SpacePtr s) {
  nlohmann::json params = {{"a_amp", c.functional.at("a_amp").get<double>()},
                           {"c", c.functional.at("c").get<double>()}};
  return make_functional(c.functional.at("name").get<std::string>(), s, params);
}

// non-symmetric nonnegative direction, unit in l^2
Vec ramp(int n) {
  Vec d(n);
  for (int i = 0; i < n; ++i) d[i] = 1.0 + i;
  return d / d.norm();
}

GridFunction start_point(const ExperimentConfig& c, const Functional& f, SpacePtr s) {
  const std::string base = c.start.at("base").get<std::string>();
  Vec b;
  if (base == "zero") b = Vec::Zero(s->size());
  else if (base == "profile") b = symmetric_profile(s, c.start.at("amp").get<double>()).values();
  else if (base == "constant") b = Vec::Constant(s->size(), c.start.at("value").get<double>());
  else b = sized(c.start, "start", "values", s->size());
  const double level = c.start.at("level").get<double>();
  if (level <= 0.0) return GridFunction(s, b);
  // bisection on t for f(b + t ramp) - f(b) = level
  const Vec dir = ramp(s->size());
  const double f0 = f.eval(b);
  double lo = 0.0, hi = 1.0;
  while (f.eval(b + hi * dir) - f0 < level) {
    hi *= 2.0;
    if (hi > 1e12) throw ConfigError("/start/level", "level not reached along the ramp");
  }
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (f.eval(b + mid * dir) - f0 < level ? lo : hi) = mid;
  }
  return GridFunction(s, b + lo * dir);
}

PrincipleOptions options(const ExperimentConfig& c) {
  PrincipleOptions o;
  o.seed = c.seed;
  o.verify_samples = c.samples;
  return o;
}

EkelandVariant variant(const std::string& v) {
  if (v == "I") return EkelandVariant::I;
  if (v == "II") return EkelandVariant::II;
  if (v == "IV") return EkelandVariant::IV;
  return EkelandVariant::V;
}

std::vector<double> schedule(const ExperimentConfig& c) {
  std::vector<double> e = c.params.at("eps_schedule").get<std::vector<double>>();
  if (e.empty()) throw ConfigError("/params/eps_schedule", "empty schedule");
  return e;
}

Csv measures(const Certificate& cert) {
  Csv csv({"name", "value", "bound", "within"});
  for (const Measured& m : cert.measured)
    csv.row({"\"" + m.name + "\"", num(m.value), num(m.bound),
             m.value <= m.bound + cert.tol_cert ? "1" : "0"});
  csv.row({"\"sampled violation\"", num(cert.violation.max_violation), num(cert.slack),
           cert.violation.max_violation <= cert.slack ? "1" : "0"});
  return csv;
}

void report_failures(const Certificate& cert, std::ostream& console) {
  for (const Measured& m : cert.measured)
    if (!(m.value <= m.bound + cert.tol_cert))
      console << "  " << m.name << " = " << num(m.value) << " > bound " << num(m.bound) << "\n";
  if (!(cert.violation.max_violation <= cert.slack))
    console << "  sampled violation " << num(cert.violation.max_violation) << " > slack "
            << num(cert.slack) << "\n";
}

// one certificate: certificate.json + measures.csv
int emit(const Certificate& cert, const fs::path& dir, const std::string& name, std::ostream& console) {
  write_json(dir / "certificate.json", to_json(cert));
  write_text(dir / "measures.csv", measures(cert).text());
  console << name << ": " << (cert.passed ? "PASS" : "FAILED") << "\n";
  if (!cert.passed) report_failures(cert, console);
  return cert.passed ? kExitPass : kExitFailed;
}

Domain polyhedron_of(const ExperimentConfig& c, int n) {
  const ojson& A = c.geometry.at("A");
  if (A.empty()) throw ConfigError("/geometry/A", "required");
  Eigen::MatrixXd M(A.size(), n);
  for (size_t i = 0; i < A.size(); ++i) {
    if (int(A[i].size()) != n)
      throw ConfigError("/geometry/A/" + std::to_string(i), "expected " + std::to_string(n) + " columns");
    for (int k = 0; k < n; ++k) M(i, k) = A[i][k].get<double>();
  }
  return polyhedron(M, sized(c.geometry, "geometry", "b", int(A.size())));
}

Functional l2_constraint(SpacePtr s, const ojson& spec) {
  const double m = s->cell_measure();
  const double level = spec.at("level").get<double>();
  const double sign = spec.at("type").get<std::string>() == "eq" ? 1.0 : -1.0;
  Functional G;
  G.name = sign > 0 ? "L2=" + num(level) : "L2<=" + num(level);
  G.space = s;
  G.eval = [m, level, sign](const Vec& u) { return sign * (m * u.squaredNorm() - level); };
  G.gradient = [m, sign](const Vec& u) { return Vec(sign * 2.0 * m * u); };
  return G;
}

Map affine_map(const ExperimentConfig& c) {
  const double k = c.map.at("factor").get<double>(), a = c.map.at("a").get<double>();
  return [k, a](const Vec& u) { return Vec(a + k * (u.array() - a)); };
}

int run_polarize(const ExperimentConfig& c, SpacePtr s, const fs::path& dir, std::ostream& console) {
  const Vec u = sized(c.polarize, "polarize", "u", s->size());
  const int idx = c.polarize.at("polarizer").get<int>();
  if (idx < 0 || idx >= int(s->family().size()))
    throw ConfigError("/polarize/polarizer",
                      "index out of range [0, " + std::to_string(s->family().size()) + ")");
  const Polarizer& H = s->family()[idx];
  const Vec uH = polarize(u, H);
  ojson j;
  j["polarizer"] = polarizer_json(H);
  j["u"] = to_json(GridFunction(s, u));
  j["u_H"] = to_json(GridFunction(s, uH));
  write_json(dir / "function.json", j);
  Csv csv({"cell", "x", "y", "u", "u_H", "partner", "inside"});
  for (int i = 0; i < s->size(); ++i) {
    auto x = s->center(i);
    csv.row({std::to_string(i), num(x[0]), num(x[1]), num(u[i]), num(uH[i]), std::to_string(H.partner[i]),
             H.inside[i] ? "1" : "0"});
  }
  write_text(dir / "cells.csv", csv.text());
  console << "u^H =";
  for (int i = 0; i < uH.size(); ++i) console << (i ? ", " : " (") << num(uH[i]);
  console << ")\n";
  return kExitPass;
}

int run_symmetrize(const ExperimentConfig& c, SpacePtr s, const fs::path& dir, std::ostream& console) {
  GridFunction u0 = start_point(c, half_norm_sq(s), s);
  Symmetrized sym = approx_symmetrize(u0, c.param("rho"));
  ojson j;
  j["u0"] = to_json(u0);
  j["T_rho(u0)"] = to_json(sym.u);
  j["residual"] = sym.residual;
  j["sequence"] = sequence_json(*s, sym.sequence);
  write_json(dir / "function.json", j);
  Csv csv({"step", "polarizer"});
  for (size_t i = 0; i < sym.sequence.size(); ++i) csv.row({std::to_string(i), std::to_string(sym.sequence[i])});
  write_text(dir / "sequence.csv", csv.text());
  console << "symmetrize: " << sym.sequence.size() << " polarizations, ||u - u*||_V = " << num(sym.residual)
          << "\n";
  return kExitPass;
}

int run_zhong_radius(const ExperimentConfig& c, const fs::path& dir, std::ostream& console) {
  const std::string h = c.params.at("h").get<std::string>();
  const double rho = c.param("rho");
  const double r = zhong_radius(weight_by_name(h), rho);
  Csv csv({"h", "rho", "r"});
  csv.row({h, num(rho), num(r)});
  write_text(dir / "radius.csv", csv.text());
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10f", r);
  console << buf << "\n";
  return kExitPass;
}

int run_quasilinear(const ExperimentConfig& c, SpacePtr s, const fs::path& dir, std::ostream& console) {
  QuasilinearIntegrand I = integrand_by_name(c.integrand.at("name").get<std::string>(),
                                             c.integrand.at("p").get<double>(),
                                             c.integrand.at("forcing").get<double>());
  ojson all = ojson::array();
  Csv csv({"eps", "energy", "symmetry_residual", "dual_residual", "passed"});
  bool ok = true;
  for (double eps : schedule(c)) {
    Certificate cert = quasilinear_experiment(I, s, eps, options(c));
    auto val = [&](const std::string& n) { return cert.find(n) ? num(cert.find(n)->value) : ""; };
    csv.row({num(eps), val("energy"), val("||u_eps-u_eps*||_V"), val("||w_eps||_X'"), cert.passed ? "1" : "0"});
    if (!cert.passed) {
      console << "  eps = " << num(eps) << " failed\n";
      report_failures(cert, console);
    }
    ok = ok && cert.passed;
    all.push_back(to_json(cert));
  }
  write_json(dir / "certificate.json", all);
  write_text(dir / "steps.csv", csv.text());
  console << "quasilinear: " << (ok ? "PASS" : "FAILED") << "\n";
  return ok ? kExitPass : kExitFailed;
}

int run_semilinear(const ExperimentConfig& c, SpacePtr s, const fs::path& dir, std::ostream& console) {
  auto steps = semilinear_experiment(nonlinearity_by_name(c.nonlinearity.at("name").get<std::string>()), s,
                                     schedule(c), options(c));
  ojson all = ojson::array();
  Csv csv({"eps", "energy", "symmetry_residual", "dual_residual", "q_min", "q_min_exact", "slope_upper",
           "slope_bound", "passed"});
  bool ok = true;
  for (const SemilinearStep& st : steps) {
    const Certificate& cert = st.sqps.certificate;
    csv.row({num(st.sqps.eps), num(st.energy), num(st.symmetry_residual), num(st.residual_dual),
             num(st.second_order_min), num(st.second_order_min_exact), num(st.sqps.slope.upper),
             num(st.sqps.slope_bound), cert.passed ? "1" : "0"});
    if (!cert.passed) report_failures(cert, console);
    ok = ok && cert.passed;
    all.push_back(to_json(cert));
  }
  write_json(dir / "certificate.json", all);
  write_text(dir / "steps.csv", csv.text());
  console << "semilinear: " << (ok ? "PASS" : "FAILED") << "\n";
  return ok ? kExitPass : kExitFailed;
}

int run_verify(const ExperimentConfig& c, SpacePtr s, const fs::path& dir, std::ostream& console) {
  std::string rel = c.verify.at("certificate").get<std::string>();
  if (rel.empty()) throw ConfigError("/verify/certificate", "required");
  fs::path path = fs::path(rel).is_absolute() ? fs::path(rel) : c.base_dir / rel;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("/verify/certificate", "cannot open " + path.string());
  ojson j;
  try {
    j = ojson::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("/verify/certificate", path.string() + " is not valid JSON");
  }
  Certificate cert = certificate_from_json(j);
  if (!cert.v) throw ConfigError("/verify/certificate", "certificate has no point v");
  if (cert.v->values().size() != s->size())
    throw ConfigError("/grid", "the certificate lives on " + std::to_string(cert.v->values().size()) + " cells");
  Functional f = make_f(c, s);
  const double shift = c.verify.at("perturb").get<double>();
  if (shift != 0.0) cert.v = GridFunction(s, cert.v->values() + shift * cert.rho * ramp(s->size()));
  ViolationReport rep = verify_certificate(f, cert, c.samples);
  const bool ok = rep.max_violation <= cert.slack;
  ojson out;
  out["certificate"] = path.filename().string();
  out["perturb"] = shift;
  out["slack"] = cert.slack;
  out["report"] = to_json(rep);
  out["passed"] = ok;
  write_json(dir / "verify.json", out);
  Csv csv({"n_samples", "max_violation", "slack", "passed"});
  csv.row({std::to_string(rep.n_samples), num(rep.max_violation), num(cert.slack), ok ? "1" : "0"});
  write_text(dir / "verify.csv", csv.text());
  console << "verify: " << (ok ? "PASS" : "FAILED") << " (max violation " << num(rep.max_violation)
          << ", slack " << num(cert.slack) << ")\n";
  return ok ? kExitPass : kExitFailed;
}

}  // namespace

fs::path output_directory(const ExperimentConfig& c, const Overrides& o) {
  if (o.out) return *o.out;
  if (!c.output_dir.empty()) return c.output_dir;
  if (const char* env = std::getenv("SYMVAR_OUT"); env && *env) return env;
  return "symvar_out";
}

int run(ExperimentConfig c, const Overrides& o, std::ostream& console) {
  if (o.seed) c.seed = *o.seed;
  if (o.samples) {
    if (*o.samples <= 0) throw ConfigError("--samples", "expected a positive integer");
    c.samples = *o.samples;
  }
  const fs::path dir = output_directory(c, o);
  fs::create_directories(dir);
  write_text(dir / "config.json", canonical_text(c));

  const std::string& cmd = c.subcommand;
  if (cmd == "zhong-radius") return run_zhong_radius(c, dir, console);
  SpacePtr s = make_space(c.grid);
  if (cmd == "polarize") return run_polarize(c, s, dir, console);
  if (cmd == "symmetrize") return run_symmetrize(c, s, dir, console);
  if (cmd == "quasilinear") return run_quasilinear(c, s, dir, console);
  if (cmd == "semilinear") return run_semilinear(c, s, dir, console);
  if (cmd == "verify") return run_verify(c, s, dir, console);

  const PrincipleOptions opts = options(c);
  if (cmd == "caristi") {
    const double a = c.map.at("a").get<double>(), w = c.map.at("weight").get<double>();
    Functional f;
    f.name = "weight ||u-a||_X";
    f.space = s;
    f.symmetry = SymmetryClass::PolarizationNonincreasing;
    f.lower_bound = 0.0;
    f.eval = [s, a, w](const Vec& u) { return w * s->norm_x(Vec(u.array() - a)); };
    return emit(caristi_fixed_point(affine_map(c), f, c.param("eps"), opts).certificate, dir, cmd, console);
  }
  if (cmd == "clarke")
    return emit(clarke_fixed_point(affine_map(c), s, c.map.at("factor").get<double>(), c.param("eps"), opts)
                    .certificate,
                dir, cmd, console);
  if (cmd == "drop" || cmd == "petal") {
    const int n = s->size();
    Domain C = polyhedron_of(c, n);
    GridFunction x(s, sized(c.geometry, "geometry", "x", n));
    const double eps = c.param("eps");
    const int ms = c.params.at("minimality_samples").get<int>();
    if (cmd == "drop") {
      Ball B{sized(c.geometry, "geometry", "center", n), c.geometry.at("radius").get<double>()};
      return emit(symmetric_drop_point(x, B, C, eps, ms, opts), dir, cmd, console);
    }
    GridFunction y(s, sized(c.geometry, "geometry", "y", n));
    return emit(symmetric_petal_point(x, y, C, eps, c.params.at("norm").get<std::string>(), ms, opts), dir, cmd,
                console);
  }

  Functional f = make_f(c, s);
  GridFunction u0 = start_point(c, f, s);
  if (cmd == "ekeland-core")
    return emit(ekeland_point(f, whole_space(), u0, c.param("sigma"), c.param("rho"), opts), dir, cmd, console);
  if (cmd == "ekeland") {
    PrincipleOptions vo = opts;
    vo.rho2 = c.param("rho2");
    return emit(symmetric_ekeland(f, u0, c.param("sigma"), c.param("rho"),
                                  variant(c.params.at("variant").get<std::string>()), vo),
                dir, cmd, console);
  }
  if (cmd == "bp")
    return emit(symmetric_borwein_preiss(f, u0, c.param("sigma"), c.param("rho"), c.param("p_exp"), opts), dir,
                cmd, console);
  if (cmd == "zhong")
    return emit(symmetric_zhong(f, u0, c.param("sigma"), c.param("rho"),
                                weight_by_name(c.params.at("h").get<std::string>()), opts),
                dir, cmd, console);
  if (cmd == "dgz") {
    const double eps = c.param("eps");
    return emit(dgz_check(f, dgz_bump(u0, eps, c.param("delta")), u0, eps, opts), dir, cmd, console);
  }
  if (cmd == "constrained") {
    ConstrainedOptions co;
    co.base = opts;
    const int n_eq = c.constraint.at("type").get<std::string>() == "eq" ? 1 : 0;
    return emit(constrained_symmetric_ekeland(f, {l2_constraint(s, c.constraint)}, n_eq, u0, c.param("eps"), co),
                dir, cmd, console);
  }
  if (cmd == "path") {
    PathOptions po;
    po.base = opts;
    po.subdivisions = c.params.at("subdivisions").get<int>();
    return emit(path_minimax(f, u0, c.params.at("m_nodes").get<int>(), c.param("eps"), po), dir, cmd, console);
  }
  throw ConfigError("/subcommand", "no runner for '" + cmd + "'");
}

}  // namespace symvar::cli
