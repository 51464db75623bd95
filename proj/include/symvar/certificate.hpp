#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "symvar/engine.hpp"
#include "symvar/funcspace.hpp"

namespace symvar {

enum class Variant {
  EkelandCore,
  SymEkelandI,
  SymEkelandII,
  SymEkelandIII,
  SymEkelandIV,
  SymEkelandV,
  SymBP,
  SymZhong,
  DGZCheck,
  Constrained,
  PathMinimax,
  Application,
};

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct Measured {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
};

// Which variational inequality the certificate claims, so it can be re-sampled.
//   ekeland:        f(w) >= f(v) - modulus ||w - v||
//   borwein-preiss: f(w) >= f(v) + modulus (||v - eta||^power - ||w - eta||^power)
//   dgz:            f(w) + g(w) >= f(v) + g(v)
struct Inequality {
  std::string kind = "ekeland";
  double modulus = 0.0;
  double power = 1.0;
  std::string metric = "X";
  std::string domain = "X";
};

struct Certificate {
  Variant variant = Variant::EkelandCore;
  std::string functional;
  std::optional<GridFunction> v;
  std::optional<GridFunction> eta;
  double sigma = 0.0;
  double rho = 0.0;
  double p_exp = 1.0;
  std::vector<Measured> measured;
  ViolationReport violation;
  double slack = 0.0;
  std::vector<int> t_rho_sequence;
  Inequality inequality;
  SamplerSpec sampler;
  double inf_est = 0.0;
  double tol_cert = 1e-7;
  std::uint64_t seed = 0;
  nlohmann::ordered_json log = nlohmann::ordered_json::object();
  bool passed = false;

  void add(const std::string& name, double value, double bound) {
    measured.push_back({name, value, bound});
  }
  // PASS iff every measured value is within bound + tol_cert and the sampled
  // violation is within slack
  void seal();
  const Measured* find(const std::string& name) const;
};

nlohmann::ordered_json to_json(const Certificate& c);
Certificate certificate_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const ViolationReport& r);

}  // namespace symvar
