#include "symvar/certificate.hpp"

#include <cmath>

#include "symvar/errors.hpp"
#include "symvar/rearrange.hpp"

namespace symvar {

namespace {

const std::pair<Variant, const char*> kVariantNames[] = {
    {Variant::EkelandCore, "EkelandCore"},   {Variant::SymEkelandI, "SymEkelandI"},
    {Variant::SymEkelandII, "SymEkelandII"}, {Variant::SymEkelandIII, "SymEkelandIII"},
    {Variant::SymEkelandIV, "SymEkelandIV"}, {Variant::SymEkelandV, "SymEkelandV"},
    {Variant::SymBP, "SymBP"},               {Variant::SymZhong, "SymZhong"},
    {Variant::DGZCheck, "DGZCheck"},         {Variant::Constrained, "Constrained"},
    {Variant::PathMinimax, "PathMinimax"},   {Variant::Application, "Application"},
};

std::vector<double> as_vector(const Vec& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

std::string to_string(Variant v) {
  for (auto [k, name] : kVariantNames)
    if (k == v) return name;
  return "EkelandCore";
}

Variant variant_from_string(const std::string& s) {
  for (auto [k, name] : kVariantNames)
    if (s == name) return k;
  throw InvalidArgument("unknown certificate variant '" + s + "'");
}

void Certificate::seal() {
  passed = violation.max_violation <= slack;
  for (const Measured& m : measured)
    if (!(m.value <= m.bound + tol_cert)) passed = false;
}

const Measured* Certificate::find(const std::string& name) const {
  for (const Measured& m : measured)
    if (m.name == name) return &m;
  return nullptr;
}

nlohmann::ordered_json to_json(const ViolationReport& r) {
  nlohmann::ordered_json j;
  j["n_samples"] = r.n_samples;
  j["max_violation"] = r.max_violation;
  j["argmax_w"] = r.argmax_w ? nlohmann::ordered_json(as_vector(*r.argmax_w))
                             : nlohmann::ordered_json(nullptr);
  return j;
}

nlohmann::ordered_json to_json(const Certificate& c) {
  nlohmann::ordered_json j;
  j["variant"] = to_string(c.variant);
  j["status"] = c.passed ? "PASS" : "FAILED";
  j["functional"] = c.functional;
  j["seed"] = c.seed;
  j["parameters"] = {{"sigma", c.sigma}, {"rho", c.rho}, {"p_exp", c.p_exp}};
  if (c.v) {
    const GridSpace& s = c.v->space();
    j["space"] = {{"dimension", s.dimension()}, {"n", s.n()},     {"radius", s.radius()},
                  {"p", s.p()},                 {"qV", s.q_v()},  {"qW", s.q_w()},
                  {"K", s.K()},                 {"C_theta", s.c_theta()}};
    j["v"] = as_vector(c.v->values());
  } else {
    j["space"] = nullptr;
    j["v"] = nullptr;
  }
  j["eta"] = c.eta ? nlohmann::ordered_json(as_vector(c.eta->values()))
                   : nlohmann::ordered_json(nullptr);
  j["inf_est"] = c.inf_est;
  nlohmann::ordered_json meas = nlohmann::ordered_json::array();
  for (const Measured& m : c.measured)
    meas.push_back({{"name", m.name}, {"value", m.value}, {"bound", m.bound}});
  j["measured"] = meas;
  j["tol_cert"] = c.tol_cert;
  auto viol = to_json(c.violation);
  viol["slack"] = c.slack;
  j["violation"] = viol;
  j["inequality"] = {{"kind", c.inequality.kind},
                     {"modulus", c.inequality.modulus},
                     {"power", c.inequality.power},
                     {"metric", c.inequality.metric},
                     {"domain", c.inequality.domain}};
  j["sampler"] = {{"seed", c.sampler.seed},
                  {"n_samples", c.sampler.n_samples},
                  {"radii", c.sampler.radii},
                  {"box", c.sampler.box}};
  if (c.v)
    j["t_rho_sequence"] = sequence_json(c.v->space(), c.t_rho_sequence);
  else
    j["t_rho_sequence"] = nlohmann::ordered_json::array();
  j["t_rho_indices"] = c.t_rho_sequence;
  j["log"] = c.log;
  return j;
}

Certificate certificate_from_json(const nlohmann::ordered_json& j) {
  Certificate c;
  c.variant = variant_from_string(j.at("variant").get<std::string>());
  c.functional = j.at("functional").get<std::string>();
  c.seed = j.at("seed").get<std::uint64_t>();
  const auto& par = j.at("parameters");
  c.sigma = par.at("sigma").get<double>();
  c.rho = par.at("rho").get<double>();
  c.p_exp = par.at("p_exp").get<double>();
  if (!j.at("v").is_null()) {
    const auto& s = j.at("space");
    auto space = make_grid(s.at("dimension").get<int>(), s.at("n").get<int>(),
                           s.at("radius").get<double>(), s.at("p").get<double>(),
                           s.at("qW").get<double>(), s.at("qV").get<double>());
    auto vals = j.at("v").get<std::vector<double>>();
    c.v = GridFunction(space, Eigen::Map<Vec>(vals.data(), vals.size()));
    if (!j.at("eta").is_null()) {
      auto e = j.at("eta").get<std::vector<double>>();
      c.eta = GridFunction(space, Eigen::Map<Vec>(e.data(), e.size()));
    }
  }
  c.inf_est = j.at("inf_est").get<double>();
  for (const auto& m : j.at("measured"))
    c.add(m.at("name").get<std::string>(), m.at("value").get<double>(),
          m.at("bound").get<double>());
  c.tol_cert = j.at("tol_cert").get<double>();
  const auto& viol = j.at("violation");
  c.violation.n_samples = viol.at("n_samples").get<int>();
  c.violation.max_violation = viol.at("max_violation").get<double>();
  if (!viol.at("argmax_w").is_null()) {
    auto w = viol.at("argmax_w").get<std::vector<double>>();
    c.violation.argmax_w = Vec(Eigen::Map<Vec>(w.data(), w.size()));
  }
  c.slack = viol.at("slack").get<double>();
  const auto& ineq = j.at("inequality");
  c.inequality = {ineq.at("kind").get<std::string>(), ineq.at("modulus").get<double>(),
                  ineq.at("power").get<double>(), ineq.at("metric").get<std::string>(),
                  ineq.at("domain").get<std::string>()};
  const auto& smp = j.at("sampler");
  c.sampler.seed = smp.at("seed").get<std::uint64_t>();
  c.sampler.n_samples = smp.at("n_samples").get<int>();
  c.sampler.radii = smp.at("radii").get<std::vector<double>>();
  c.sampler.box = smp.at("box").get<double>();
  c.t_rho_sequence = j.at("t_rho_indices").get<std::vector<int>>();
  c.log = j.at("log");
  c.passed = j.at("status").get<std::string>() == "PASS";
  return c;
}

}  // namespace symvar
