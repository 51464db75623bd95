#pragma once

// Helpers shared by the engines in principles.cc, constrained.cc, minimax.cc
// and the applications.

#include <cstdint>
#include <functional>
#include <string>

#include "symvar/certificate.hpp"
#include "symvar/engine.hpp"
#include "symvar/principles.hpp"

namespace symvar::detail {

double slack_for(const PrincipleOptions& o, double fv);
SearchOptions search_options(const PrincipleOptions& o, double rho, std::uint64_t salt);
SamplerSpec sampler_for(const PrincipleOptions& o, const Vec& v);
// ||v - v*||_V; plain l1 / l2 when the engine runs in those (then X = V)
double sym_residual(const GridFunction& v, const std::string& metric = "V");
// f(v) - modulus ||w - v|| - f(w); -inf outside dom f
std::function<double(const Vec&)> ekeland_deficit(const Problem& P, const Vec& v, double fv,
                                                  double modulus);
nlohmann::ordered_json probe_json(const ProbeLog& log);
double start_scale(const GridFunction& u0);
// samples the Ekeland inequality at c.v and seals the certificate
void seal_ekeland(Certificate& c, const Problem& P, double modulus, const PrincipleOptions& o);

}  // namespace symvar::detail
